#include "gadgetforge/lower.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>

namespace gadgetforge::lower {

using gadgets::Endpoint;
using gadgets::GadgetSpec;
using gadgets::Instance;
using machine::Natural;

namespace {

class Builder {
 public:
  explicit Builder(std::string lowering) { art_.lowering = std::move(lowering); }

  void add(const std::string& id, const GadgetSpec& spec, State initial, const std::string& role) {
    art_.system.add_spec(spec);
    art_.system.instances.push_back({id, spec.name(), initial});
    art_.roles.emplace_back(id, role);
  }
  void node(const std::string& name) { art_.system.nodes.push_back(name); }
  void edge(const std::string& a, const std::string& b) {
    art_.system.add_edge(Endpoint::parse(a), Endpoint::parse(b));
  }
  // Boundary node named `name` mapped to spec location `location`.
  void port(const std::string& name, const std::string& location) {
    node(name);
    boundary_.push_back(Endpoint::external(name));
    art_.port_map.emplace_back("node:" + name, location);
  }
  void param(const std::string& k, const std::string& v) { art_.params.emplace_back(k, v); }

  LoweringArtifact finish(const GadgetSpec& spec, Encoding encoding, Relation relation = Relation::Bisimulation) {
    art_.spec = spec;
    art_.encoding = std::move(encoding);
    art_.relation = relation;
    art_.system.boundary = boundary_;
    art_.system.start = boundary_.front();
    art_.system.goal = boundary_.back();
    gadgets::validate(art_.system);
    return std::move(art_);
  }
  LoweringArtifact& artifact() { return art_; }

 private:
  LoweringArtifact art_;
  std::vector<Endpoint> boundary_;
};

std::string range_text(const Range& r) {
  std::ostringstream o;
  o << r.a << ',' << r.b << ',' << r.c << ',' << r.d;
  return o.str();
}

std::string tunnel(const std::string& base, std::size_t count, std::size_t k) {
  return count == 1 ? base : base + std::to_string(k);
}

}  // namespace

void check_range(const Range& r) {
  if (r.a == 0) throw std::invalid_argument("range a,b,c,d requires a > 0 (got a = 0)");
  if (r.c == 0) throw std::invalid_argument("range a,b,c,d requires c > 0 (got c = 0)");
  if (r.a > r.b) throw std::invalid_argument("range a,b,c,d requires a <= b");
  if (r.c > r.d) throw std::invalid_argument("range a,b,c,d requires c <= d");
}

Range parse_range(const std::string& text) {
  std::vector<std::uint64_t> v;
  std::istringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    std::size_t used = 0;
    try {
      v.push_back(std::stoull(part, &used));
    } catch (const std::exception&) {
      used = std::string::npos;
    }
    if (used != part.size() || part.empty() || part[0] == '-')
      throw std::invalid_argument("range must be four naturals a,b,c,d (got '" + text + "')");
  }
  if (v.size() != 4) throw std::invalid_argument("range must be four naturals a,b,c,d (got '" + text + "')");
  Range r{v[0], v[1], v[2], v[3]};
  check_range(r);
  return r;
}

std::string counter_instance(const std::string& counter) { return "counter_" + counter; }
std::string instruction_instance(std::size_t index) { return "instr_" + std::to_string(index); }

LoweringArtifact compile_machine_to_incdecjz(const machine::Program& program, const std::vector<Natural>& initial,
                                             FlowMode flow) {
  machine::validate(program);
  if (!initial.empty() && initial.size() != program.counters.size())
    throw std::invalid_argument("expected " + std::to_string(program.counters.size()) + " initial counter values");
  Builder b("compile_machine_to_incdecjz");
  b.param("flow_mode", flow == FlowMode::Primitive ? "primitive" : "expanded");
  b.node("start");
  b.node("goal");
  const auto counter_spec = gadgets::inc_dec_jz();
  const auto flow_spec = gadgets::inc_decnz_decnz();
  for (std::size_t c = 0; c < program.counters.size(); ++c) {
    State v = 0;
    if (!initial.empty()) {
      if (initial[c] > std::numeric_limits<State>::max())
        throw std::invalid_argument("initial value of counter " + program.counters[c] + " does not fit in 64 bits");
      v = initial[c].convert_to<State>();
    }
    b.add(counter_instance(program.counters[c]), counter_spec, v, "counter " + program.counters[c]);
  }
  const auto& ins = program.instructions;
  auto is_halt = [&](std::size_t i) { return std::holds_alternative<machine::Halt>(ins[i]); };
  std::vector<std::size_t> flow_ids;
  for (std::size_t i = 0; i < ins.size(); ++i) {
    if (is_halt(i)) continue;
    flow_ids.push_back(i);
    std::string text = machine::serialize({program.counters, {ins[i]}});
    text = text.substr(text.find('\n') + 1);
    text = text.substr(text.find(' ') + 1);
    text.pop_back();
    b.add(instruction_instance(i), flow_spec, 0, "instruction " + std::to_string(i) + " (" + text + ")");
  }
  auto entry = [&](std::size_t j) {
    return is_halt(j) ? std::string("node:goal") : instruction_instance(j) + ".inc.in";
  };
  auto counter_of = [&](std::size_t i) -> std::size_t {
    return std::visit(
        [](const auto& x) -> std::size_t {
          if constexpr (std::is_same_v<std::decay_t<decltype(x)>, machine::Halt>) return 0;
          else return x.counter;
        },
        ins[i]);
  };
  const auto& cs = program.counters;
  for (auto i : flow_ids)
    if (std::holds_alternative<machine::Inc>(ins[i]))
      b.edge(instruction_instance(i) + ".inc.out", counter_instance(cs[counter_of(i)]) + ".inc.in");
  for (auto i : flow_ids)
    if (std::holds_alternative<machine::Dec>(ins[i]))
      b.edge(instruction_instance(i) + ".inc.out", counter_instance(cs[counter_of(i)]) + ".dec.in");
  for (auto i : flow_ids)
    if (std::holds_alternative<machine::JZ>(ins[i]))
      b.edge(instruction_instance(i) + ".inc.out", counter_instance(cs[counter_of(i)]) + ".jz.in");
  const std::pair<const char*, const char*> shared[] = {
      {"inc.out", "dec0.in"}, {"dec.out", "dec0.in"}, {"jz.nz", "dec0.in"}, {"jz.z", "dec1.in"}};
  for (const auto& [counter_port, flow_port] : shared)
    for (auto i : flow_ids)
      for (const auto& c : cs)
        b.edge(counter_instance(c) + "." + counter_port, instruction_instance(i) + "." + flow_port);
  for (auto i : flow_ids)
    if (i + 1 < ins.size()) b.edge(instruction_instance(i) + ".dec0.out", entry(i + 1));
  for (auto i : flow_ids)
    if (const auto* jz = std::get_if<machine::JZ>(&ins[i]))
      b.edge(instruction_instance(i) + ".dec1.out", entry(jz->target));
  b.edge("node:start", entry(0));

  auto& art = b.artifact();
  art.system.start = Endpoint::external("start");
  art.system.goal = Endpoint::external("goal");
  gadgets::validate(art.system);
  LoweringArtifact out = std::move(art);
  if (flow == FlowMode::Expanded) {
    auto expanded = substitute(out, build_inc_decnz_decnz());
    expanded.lowering = out.lowering;
    expanded.params = out.params;
    return expanded;
  }
  return out;
}

LoweringArtifact build_inc_decnz_decnz() {
  Builder b("build_inc_decnz_decnz");
  const auto g = gadgets::inc_dec_jz();
  b.add("T", g, 0, "top counter");
  b.add("M", g, 0, "DecNZ0 latch");
  b.add("B", g, 0, "DecNZ1 latch");
  b.port("inc_in", "inc.in");
  b.port("inc_out", "inc.out");
  b.port("dec0_in", "dec0.in");
  b.port("dec0_out", "dec0.out");
  b.port("dec1_in", "dec1.in");
  b.port("dec1_out", "dec1.out");
  b.edge("node:inc_in", "T.inc.in");
  b.edge("node:inc_out", "T.inc.out");
  b.edge("node:dec0_in", "M.inc.in");
  b.edge("M.inc.out", "T.jz.in");
  b.edge("node:dec1_in", "B.inc.in");
  b.edge("B.inc.out", "T.jz.in");
  b.edge("T.jz.nz", "T.dec.in");
  b.edge("T.dec.out", "M.jz.in");
  b.edge("T.dec.out", "B.jz.in");
  b.edge("M.jz.nz", "M.dec.in");
  b.edge("M.dec.out", "node:dec0_out");
  b.edge("B.jz.nz", "B.dec.in");
  b.edge("B.dec.out", "node:dec1_out");
  return b.finish(gadgets::inc_decnz_decnz(), Encoding::linear_map({{1, 0}, {0, 0}, {0, 0}}));
}

LoweringArtifact sim_incdecjz_via_incjzdec() {
  Builder b("sim_incdecjz_via_incjzdec");
  const auto g = gadgets::inc_jzdec();
  b.add("G0", g, 0, "G0");
  b.add("G1", g, 0, "G1");
  b.add("H0", g, 0, "H0");
  b.add("H1", g, 0, "H1");
  b.add("H2", g, 0, "H2");
  b.port("inc_in", "inc.in");
  b.port("inc_out", "inc.out");
  b.port("dec_in", "dec.in");
  b.port("dec_out", "dec.out");
  b.port("jz_in", "jz.in");
  b.port("jz_z", "jz.z");
  b.port("jz_nz", "jz.nz");
  // Inc: G0 then G1, H1's zero branch leads out.
  b.edge("node:inc_in", "G0.inc.in");
  b.edge("G0.inc.out", "G1.inc.in");
  b.edge("H1.inc.out", "G1.inc.in");
  b.edge("G1.inc.out", "H1.jzdec.in");
  b.edge("H1.jzdec.z", "node:inc_out");
  b.edge("H1.jzdec.nz", "node:jz_nz");
  // Dec: G0, then H2 marks the path while G1 follows.
  b.edge("node:dec_in", "G0.jzdec.in");
  b.edge("G0.jzdec.z", "node:dec_out");
  b.edge("H2.jzdec.nz", "node:dec_out");
  b.edge("G0.jzdec.nz", "H2.inc.in");
  b.edge("H2.inc.out", "G1.jzdec.in");
  b.edge("H0.jzdec.z", "G1.jzdec.in");
  // JZ: through the H0 diode into G1.
  b.edge("node:jz_in", "H0.jzdec.in");
  b.edge("G1.jzdec.z", "node:jz_z");
  b.edge("G1.jzdec.nz", "H2.jzdec.in");
  b.edge("H2.jzdec.z", "H1.inc.in");
  return b.finish(gadgets::inc_dec_jz(), Encoding::linear_map({{1, 0}, {1, 0}, {0, 0}, {0, 0}, {0, 0}}));
}

LoweringArtifact sim_incjzdec_via_incdecnzpz() {
  Builder b("sim_incjzdec_via_incdecnzpz");
  b.add("X", gadgets::inc_decnz_pz(), 0, "counter");
  b.port("inc_in", "inc.in");
  b.port("inc_out", "inc.out");
  b.port("jz_in", "jzdec.in");
  b.port("jz_z", "jzdec.z");
  b.port("jz_nz", "jzdec.nz");
  b.edge("node:inc_in", "X.inc.in");
  b.edge("X.inc.out", "node:inc_out");
  b.edge("node:jz_in", "X.decnz.in");
  b.edge("node:jz_in", "X.pz.in");
  b.edge("X.pz.out", "node:jz_z");
  b.edge("X.decnz.out", "node:jz_nz");
  return b.finish(gadgets::inc_jzdec(), Encoding::linear_map({{1, 0}}));
}

LoweringArtifact build_sscd_from_incdecnz() {
  Builder b("build_sscd_from_incdecnz");
  const auto g = gadgets::inc_decnz_pz();
  b.add("X", g, 1, "door 1 token");
  b.add("Y", g, 0, "door 2 token");
  b.port("L1", "L1");
  b.port("R1", "R1");
  b.port("L2", "L2");
  b.port("R2", "R2");
  b.edge("node:L1", "X.decnz.in");
  b.edge("X.decnz.out", "Y.inc.in");
  b.edge("Y.inc.out", "node:R1");
  b.edge("node:L2", "Y.decnz.in");
  b.edge("Y.decnz.out", "X.inc.in");
  b.edge("X.inc.out", "node:R2");
  return b.finish(gadgets::sscd(), Encoding::table_map({{1, 0}, {0, 1}}));
}

namespace {

// Adds the six duplicator gadgets and their wiring under `prefix`. The
// endpoints for In0/Out0/In1/Out1/e0/e1 are given by the caller.
void wire_duplicator(Builder& b, const std::string& prefix, const Range& r, const std::string& in0,
                     const std::string& out0, const std::string& in1, const std::string& out1, const std::string& e0,
                     const std::string& e1, const std::string& role) {
  const auto g = gadgets::incab_decnzcd_pz(r.a, r.b, r.c, r.d);
  const std::string L = prefix + "L", R = prefix + "R";
  const std::string DL = prefix + "DL", DLb = prefix + "DLb", DR = prefix + "DR", DRb = prefix + "DRb";
  b.add(L, g, 0, role + " flag 0");
  b.add(R, g, 0, role + " flag 1");
  b.add(DL, g, 0, role + " diode 0 forward");
  b.add(DLb, g, 0, role + " diode 0 back");
  b.add(DR, g, 0, role + " diode 1 forward");
  b.add(DRb, g, 0, role + " diode 1 back");
  struct Side {
    const std::string &own, &other, &fwd, &back, &in, &out;
  };
  for (const Side& s : {Side{L, R, DL, DLb, in0, out0}, Side{R, L, DR, DRb, in1, out1}}) {
    b.edge(s.in, s.own + ".inc.in");
    b.edge(s.back + ".pz.out", s.in);
    b.edge(s.own + ".inc.out", s.back + ".pz.in");
    b.edge(s.own + ".inc.out", s.fwd + ".pz.in");
    b.edge(s.fwd + ".pz.out", e0);
    b.edge(e1, s.other + ".pz.in");
    b.edge(s.other + ".pz.out", s.own + ".decnz.in");
    b.edge(s.own + ".decnz.out", s.own + ".decnz.in");
    b.edge(s.own + ".decnz.in", s.out);
  }
}

}  // namespace

LoweringArtifact build_edge_duplicator(const Range& r) {
  check_range(r);
  Builder b("build_edge_duplicator");
  b.param("range", range_text(r));
  for (const char* n : {"In0", "Out0", "In1", "Out1", "e0", "e1"}) b.node(n);
  wire_duplicator(b, "", r, "node:In0", "node:Out0", "node:In1", "node:Out1", "node:e0", "node:e1", "duplicator");
  auto& art = b.artifact();
  std::vector<Endpoint> boundary;
  for (const char* n : {"In0", "Out0", "In1", "Out1", "e0", "e1"}) boundary.push_back(Endpoint::external(n));
  art.system.boundary = boundary;
  art.system.start = boundary.front();
  art.system.goal = boundary[1];
  art.encoding = Encoding::linear_map(std::vector<std::pair<std::uint64_t, std::uint64_t>>(6, {0, 0}));
  gadgets::validate(art.system);
  return std::move(art);
}

LoweringArtifact edge_duplicator_harness(const Range& r, bool duplicate_inc) {
  check_range(r);
  Builder b("edge_duplicator_harness");
  b.param("range", range_text(r));
  b.param("tunnel", duplicate_inc ? "inc" : "decnz");
  const auto spec = gadgets::incab_decnzcd_pz(r.a, r.b, r.c, r.d, duplicate_inc ? 2 : 1, duplicate_inc ? 1 : 2);
  b.add("X", gadgets::incab_decnzcd_pz(r.a, r.b, r.c, r.d), 0, "guarded gadget");
  const std::string dup = duplicate_inc ? "inc" : "decnz";
  const std::string kept = duplicate_inc ? "decnz" : "inc";
  b.port("In0", dup + "0.in");
  b.port("Out0", dup + "0.out");
  b.port("In1", dup + "1.in");
  b.port("Out1", dup + "1.out");
  b.port(kept + "_in", kept + ".in");
  b.port(kept + "_out", kept + ".out");
  b.port("pz_in", "pz.in");
  b.port("pz_out", "pz.out");
  b.node("e0");
  b.node("e1");
  b.edge("node:e0", "X." + dup + ".in");
  b.edge("X." + dup + ".out", "node:e1");
  b.edge("node:" + kept + "_in", "X." + kept + ".in");
  b.edge("X." + kept + ".out", "node:" + kept + "_out");
  b.edge("node:pz_in", "X.pz.in");
  b.edge("X.pz.out", "node:pz_out");
  wire_duplicator(b, "D/", r, "node:In0", "node:Out0", "node:In1", "node:Out1", "node:e0", "node:e1", "duplicator");
  std::vector<std::pair<std::uint64_t, std::uint64_t>> enc(7, {0, 0});
  enc[0] = {1, 0};
  auto art = b.finish(spec, Encoding::linear_map(enc), Relation::SimulationEquivalence);
  return art;
}

LoweringArtifact sim_incdecnzpz_via_incab(const Range& r, DuplicatorMode mode) {
  check_range(r);
  const std::uint64_t abcd = r.a * r.b * r.c * r.d;
  const std::size_t g0_inc = r.a * r.c * r.d, g0_dec = r.a * r.b * r.d;
  const std::size_t g1_inc = r.b * r.c * r.d, g1_dec = r.a * r.b * r.c;
  Builder b("sim_incdecnzpz_via_incab");
  b.param("range", range_text(r));
  b.param("mode", mode == DuplicatorMode::Direct ? "direct" : "via-duplicators");
  b.port("inc_in", "inc.in");
  b.port("inc_out", "inc.out");
  b.port("decnz_in", "decnz.in");
  b.port("decnz_out", "decnz.out");
  b.port("pz_in", "pz.in");
  b.port("pz_out", "pz.out");
  const bool exact = r.a == r.b && r.c == r.d;
  const Relation rel = exact ? Relation::Bisimulation : Relation::SimulationEquivalence;

  // Chains of tunnel endpoints: each entry is (entrance endpoint, exit endpoint).
  using Chain = std::vector<std::pair<std::string, std::string>>;
  Chain inc_chain, dec_chain;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> enc;
  if (mode == DuplicatorMode::Direct) {
    b.add("G0", gadgets::incab_decnzcd_pz(r.a, r.b, r.c, r.d, g0_inc, g0_dec), 0, "G0");
    b.add("G1", gadgets::incab_decnzcd_pz(r.a, r.b, r.c, r.d, g1_inc, g1_dec), 0, "G1");
    enc = {{abcd, 0}, {abcd, 0}};
    for (const auto& [g, ni, nd] : {std::tuple{"G0", g0_inc, g0_dec}, std::tuple{"G1", g1_inc, g1_dec}}) {
      for (std::size_t k = 0; k < ni; ++k)
        inc_chain.emplace_back(std::string(g) + "." + tunnel("inc", ni, k) + ".in",
                               std::string(g) + "." + tunnel("inc", ni, k) + ".out");
      for (std::size_t k = 0; k < nd; ++k)
        dec_chain.emplace_back(std::string(g) + "." + tunnel("decnz", nd, k) + ".in",
                               std::string(g) + "." + tunnel("decnz", nd, k) + ".out");
    }
  } else {
    const auto single = gadgets::incab_decnzcd_pz(r.a, r.b, r.c, r.d);
    b.add("G0", single, 0, "G0");
    b.add("G1", single, 0, "G1");
    enc = {{abcd, 0}, {abcd, 0}};
    std::size_t dup_count = 0;
    // Copies of one tunnel: each duplicator turns the last copy into two.
    auto copies = [&](const std::string& g, const std::string& t, std::size_t count, Chain& chain) {
      std::string in = g + "." + t + ".in", out = g + "." + t + ".out";
      for (std::size_t k = 1; k < count; ++k) {
        const std::string p = "dup" + std::to_string(dup_count++) + "/";
        for (const char* n : {"In0", "Out0", "In1", "Out1", "e0", "e1"}) b.node(p + n);
        b.edge("node:" + p + "e0", in);
        b.edge(out, "node:" + p + "e1");
        wire_duplicator(b, p, r, "node:" + p + "In0", "node:" + p + "Out0", "node:" + p + "In1",
                        "node:" + p + "Out1", "node:" + p + "e0", "node:" + p + "e1", g + " " + t + " duplicator");
        for (int i = 0; i < 6; ++i) enc.emplace_back(0, 0);
        chain.emplace_back("node:" + p + "In0", "node:" + p + "Out0");
        in = "node:" + p + "In1";
        out = "node:" + p + "Out1";
      }
      chain.emplace_back(in, out);
    };
    copies("G0", "inc", g0_inc, inc_chain);
    copies("G1", "inc", g1_inc, inc_chain);
    copies("G0", "decnz", g0_dec, dec_chain);
    copies("G1", "decnz", g1_dec, dec_chain);
  }
  auto link = [&](const std::string& from, const Chain& chain, const std::string& to) {
    b.edge(from, chain.front().first);
    for (std::size_t k = 0; k + 1 < chain.size(); ++k) b.edge(chain[k].second, chain[k + 1].first);
    b.edge(chain.back().second, to);
  };
  link("node:inc_in", inc_chain, "node:inc_out");
  link("node:decnz_in", dec_chain, "node:decnz_out");
  b.edge("node:pz_in", "G1.pz.in");
  b.edge("G1.pz.out", "G0.pz.in");
  b.edge("G0.pz.out", "node:pz_out");
  return b.finish(gadgets::inc_decnz_pz(), Encoding::linear_map(enc), rel);
}

namespace {

Encoding compose(const Encoding& outer_enc, const std::vector<std::pair<std::size_t, std::size_t>>& origin,
                 const std::vector<const Encoding*>& inner_enc, const std::vector<std::size_t>& inner_pos) {
  // origin[k] = (outer instance, -1 or inner index) for each new instance k.
  if (outer_enc.kind == Encoding::Kind::None) return {};
  if (outer_enc.kind == Encoding::Kind::Linear) {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> lin;
    for (std::size_t k = 0; k < origin.size(); ++k) {
      const auto [o, inner] = origin[k];
      const auto [ko, oo] = outer_enc.linear[o];
      if (inner == SIZE_MAX) {
        lin.emplace_back(ko, oo);
        continue;
      }
      const auto* ie = inner_enc[k];
      if (ie->kind != Encoding::Kind::Linear) throw std::invalid_argument("cannot compose a table encoding linearly");
      const auto [ki, oi] = ie->linear[inner_pos[k]];
      lin.emplace_back(ki * ko, ki * oo + oi);
    }
    return Encoding::linear_map(std::move(lin));
  }
  std::vector<std::vector<State>> rows;
  for (const auto& row : outer_enc.table) {
    std::vector<State> v;
    for (std::size_t k = 0; k < origin.size(); ++k) {
      const auto [o, inner] = origin[k];
      if (inner == SIZE_MAX) v.push_back(row[o]);
      else v.push_back(inner_enc[k]->apply(row[o])[inner_pos[k]]);
    }
    rows.push_back(std::move(v));
  }
  return Encoding::table_map(std::move(rows));
}

}  // namespace

LoweringArtifact substitute(const LoweringArtifact& outer, const LoweringArtifact& inner) {
  if (!inner.spec) throw std::invalid_argument("inner artifact has no spec");
  const auto& spec = *inner.spec;
  const auto& in_sys = inner.system;
  if (!in_sys.boundary) throw std::invalid_argument("inner artifact has no boundary");
  std::map<std::string, std::string> boundary_for_location;
  for (const auto& [ep, loc] : inner.port_map) boundary_for_location[loc] = ep;

  LoweringArtifact out;
  out.lowering = outer.lowering;
  out.params = outer.params;
  out.spec = outer.spec;
  out.port_map = outer.port_map;
  out.relation = outer.relation;
  out.internal_cap = outer.internal_cap;
  auto& sys = out.system;
  sys.nodes = outer.system.nodes;

  std::vector<bool> replaced(outer.system.instances.size(), false);
  std::vector<std::pair<std::size_t, std::size_t>> origin;
  std::vector<const Encoding*> inner_enc;
  std::vector<std::size_t> inner_pos;
  for (std::size_t i = 0; i < outer.system.instances.size(); ++i) {
    const auto& inst = outer.system.instances[i];
    const auto* sp = outer.system.find_spec(inst.spec);
    replaced[i] = sp && *sp == spec;
    if (!replaced[i]) {
      sys.add_spec(*sp);
      sys.instances.push_back(inst);
      out.roles.emplace_back(inst.id, outer.role_of(inst.id));
      origin.emplace_back(i, SIZE_MAX);
      inner_enc.push_back(nullptr);
      inner_pos.push_back(0);
      continue;
    }
    const auto states = inner.encoding.apply(inst.initial);
    for (std::size_t k = 0; k < in_sys.instances.size(); ++k) {
      const auto& ii = in_sys.instances[k];
      sys.add_spec(*in_sys.find_spec(ii.spec));
      sys.instances.push_back({inst.id + "/" + ii.id, ii.spec, states[k]});
      out.roles.emplace_back(inst.id + "/" + ii.id, outer.role_of(inst.id) + " / " + inner.role_of(ii.id));
      origin.emplace_back(i, k);
      inner_enc.push_back(&inner.encoding);
      inner_pos.push_back(k);
    }
    for (const auto& n : in_sys.nodes) sys.nodes.push_back(inst.id + "/" + n);
    for (const auto& e : in_sys.edges) {
      auto rename = [&](const Endpoint& x) {
        return x.is_node() ? Endpoint::external(inst.id + "/" + x.node) : Endpoint::at(inst.id + "/" + x.instance, x.port);
      };
      sys.edges.push_back({rename(e.a), rename(e.b)});
    }
  }
  auto splice = [&](const Endpoint& e) -> Endpoint {
    if (e.is_node()) return e;
    auto idx = outer.system.instance_index(e.instance);
    if (!idx || !replaced[*idx]) return e;
    auto loc = spec.location_index(e.port);
    if (!loc) throw std::invalid_argument("unknown port " + e.str());
    auto it = boundary_for_location.find(spec.locations()[*loc]);
    if (it == boundary_for_location.end())
      throw std::invalid_argument("inner artifact has no boundary port for " + spec.locations()[*loc]);
    auto b = Endpoint::parse(it->second);
    return b.is_node() ? Endpoint::external(e.instance + "/" + b.node) : Endpoint::at(e.instance + "/" + b.instance, b.port);
  };
  std::vector<gadgets::Edge> outer_edges;
  for (const auto& e : outer.system.edges) outer_edges.push_back({splice(e.a), splice(e.b)});
  // Outer edges first so the spliced system keeps the outer ordering.
  outer_edges.insert(outer_edges.end(), sys.edges.begin(), sys.edges.end());
  sys.edges = std::move(outer_edges);
  sys.start = splice(outer.system.start);
  sys.goal = splice(outer.system.goal);
  if (outer.system.boundary) {
    std::vector<Endpoint> nb;
    for (const auto& e : *outer.system.boundary) nb.push_back(splice(e));
    sys.boundary = nb;
    for (auto& [from, to] : out.port_map) from = splice(Endpoint::parse(from)).str();
  }
  out.encoding = compose(outer.encoding, origin, inner_enc, inner_pos);
  gadgets::validate(sys);
  return out;
}

Fragment emit_initializer(const std::vector<Natural>& values) {
  Fragment f;
  for (std::size_t i = 0; i < values.size(); ++i) f.counters.push_back("c" + std::to_string(i));
  const std::size_t acc = values.size(), zero = values.size() + 1;
  bool any = false;
  auto& code = f.instructions;
  // Moves `from` into `to` multiplied by `factor`, looping through a JZ on the zero counter.
  auto move = [&](std::size_t from, std::size_t to, int factor) {
    const std::size_t top = code.size();
    const std::size_t end = top + 3 + static_cast<std::size_t>(factor);
    code.push_back(machine::JZ{from, end});
    code.push_back(machine::Dec{from});
    for (int k = 0; k < factor; ++k) code.push_back(machine::Inc{to});
    code.push_back(machine::JZ{zero, top});
  };
  for (std::size_t i = 0; i < values.size(); ++i) {
    const Natural& v = values[i];
    if (v == 0) continue;
    any = true;
    const auto bits = static_cast<std::size_t>(boost::multiprecision::msb(v));
    std::size_t cur = i;
    code.push_back(machine::Inc{cur});
    for (std::size_t k = bits; k-- > 0;) {
      const std::size_t next = cur == i ? acc : i;
      move(cur, next, 2);
      if (boost::multiprecision::bit_test(v, static_cast<unsigned>(k))) code.push_back(machine::Inc{next});
      cur = next;
    }
    if (cur != i) move(acc, i, 1);
  }
  if (any) {
    f.counters.push_back("__acc");
    f.counters.push_back("__zero");
  }
  return f;
}

machine::Program with_halt(const Fragment& fragment) {
  machine::Program p;
  p.counters = fragment.counters;
  p.instructions = fragment.instructions;
  p.instructions.push_back(machine::Halt{});
  return p;
}

machine::Program prepend_initializer(const machine::Program& program, const std::vector<Natural>& values) {
  if (values.size() != program.counters.size())
    throw std::invalid_argument("expected " + std::to_string(program.counters.size()) + " initial values");
  auto frag = emit_initializer(values);
  machine::Program out;
  out.counters = program.counters;
  std::vector<std::size_t> remap(frag.counters.size());
  for (std::size_t i = 0; i < values.size(); ++i) remap[i] = i;
  for (std::size_t k = values.size(); k < frag.counters.size(); ++k) {
    std::string name = frag.counters[k];
    while (std::find(out.counters.begin(), out.counters.end(), name) != out.counters.end()) name += "_";
    remap[k] = out.counters.size();
    out.counters.push_back(name);
  }
  const std::size_t shift = frag.instructions.size();
  for (const auto& ins : frag.instructions) {
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, machine::Inc>) out.instructions.push_back(machine::Inc{remap[x.counter]});
          else if constexpr (std::is_same_v<T, machine::Dec>) out.instructions.push_back(machine::Dec{remap[x.counter]});
          else if constexpr (std::is_same_v<T, machine::JZ>) out.instructions.push_back(machine::JZ{remap[x.counter], x.target});
          else out.instructions.push_back(x);
        },
        ins);
  }
  for (const auto& ins : program.instructions) {
    if (const auto* jz = std::get_if<machine::JZ>(&ins)) out.instructions.push_back(machine::JZ{jz->counter, jz->target + shift});
    else out.instructions.push_back(ins);
  }
  return out;
}

Target parse_target(const std::string& name) {
  if (name == "inc-dec-jz") return Target::IncDecJZ;
  if (name == "inc-jzdec") return Target::IncJZDec;
  if (name == "inc-decnz-pz") return Target::IncDecNZPZ;
  if (name == "inc-ab") return Target::IncAB;
  throw std::invalid_argument("invalid target '" + name + "' (expected inc-dec-jz, inc-jzdec, inc-decnz-pz or inc-ab)");
}

const char* to_string(Target target) {
  switch (target) {
    case Target::IncDecJZ: return "inc-dec-jz";
    case Target::IncJZDec: return "inc-jzdec";
    case Target::IncDecNZPZ: return "inc-decnz-pz";
    case Target::IncAB: return "inc-ab";
  }
  return "?";
}

LoweringArtifact pipeline(const machine::Program& program, const std::vector<Natural>& initial, Target target,
                          const Range& range) {
  if (target == Target::IncAB) check_range(range);
  if (target == Target::IncDecJZ) {
    auto art = compile_machine_to_incdecjz(program, initial, FlowMode::Primitive);
    art.params.emplace_back("target", to_string(target));
    return art;
  }
  auto art = compile_machine_to_incdecjz(program, initial, FlowMode::Expanded);
  art = substitute(art, sim_incdecjz_via_incjzdec());
  if (target != Target::IncJZDec) art = substitute(art, sim_incjzdec_via_incdecnzpz());
  if (target == Target::IncAB) {
    art = substitute(art, sim_incdecnzpz_via_incab(range));
    art.params.emplace_back("range", range_text(range));
  }
  art.lowering = "pipeline";
  art.params.emplace_back("target", to_string(target));
  return art;
}

}  // namespace gadgetforge::lower
