#include "gadgetforge/lower.hpp"
#include "gadgetforge/verify.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace gadgetforge;
using namespace gadgetforge::verify;
using gadgets::Endpoint;

namespace {

// Non-reflexive moves of an LTS state as (in name, out name, dst vector).
std::set<std::tuple<std::string, std::string, std::vector<State>>> moves_of(const BoundaryLTS& lts, std::uint32_t s) {
  std::set<std::tuple<std::string, std::string, std::vector<State>>> out;
  for (const auto& t : lts.transitions)
    if (t.src == s && !(t.in == t.out && t.dst == s)) out.insert({lts.ports[t.in], lts.ports[t.out], lts.states[t.dst]});
  return out;
}

PortMap identity_map(const LoweringArtifact& art) { return art.port_map; }

LoweringArtifact bare_gadget(const gadgets::GadgetSpec& spec) {
  LoweringArtifact a;
  a.system.add_spec(spec);
  a.system.instances.push_back({"g", spec.name(), 0});
  std::vector<Endpoint> boundary;
  for (const auto& l : spec.locations()) {
    std::string node = l;
    std::replace(node.begin(), node.end(), '.', '_');
    a.system.nodes.push_back(node);
    a.system.add_edge(Endpoint::external(node), Endpoint::at("g", l));
    boundary.push_back(Endpoint::external(node));
    a.port_map.emplace_back("node:" + node, l);
  }
  a.system.boundary = boundary;
  a.system.start = boundary.front();
  a.system.goal = boundary.back();
  a.spec = spec;
  a.encoding = Encoding::linear_map({{1, 0}});
  return a;
}

// Trace sets of an artifact and its spec from the oracle, compared on spec states 0..max_q.
void check_traces(const LoweringArtifact& art, State max_q, std::size_t depth, State path_cap) {
  const oracle::World impl(art.system);
  std::vector<std::size_t> ib;
  for (const auto& [ep, loc] : art.port_map) ib.push_back(impl.group_of(ep));
  auto spec_art = bare_gadget(*art.spec);
  if (!art.spec->is_counter()) spec_art.encoding = Encoding::table_map({{0}, {1}});
  const oracle::World spec(spec_art.system);
  std::vector<std::size_t> sb;
  for (const auto& [ep, loc] : art.port_map) {
    std::string node = loc;
    std::replace(node.begin(), node.end(), '.', '_');
    sb.push_back(spec.group_of("node:" + node));
  }
  for (State q = 0; q <= max_q; ++q) {
    INFO("spec state " << q);
    const auto a = oracle::traces(impl, ib, art.encoding.apply(q), depth, path_cap);
    const auto b = oracle::traces(spec, sb, {q}, depth, path_cap);
    CHECK(a == b);
  }
}

}  // namespace

TEST_CASE("identity subsystem matches the spec closure") {
  const auto art = bare_gadget(gadgets::inc_dec_jz());
  const auto lts = derive_boundary_lts(subsystem_of(art), 6);
  const auto spec = spec_closure_lts(gadgets::inc_dec_jz(), 6);
  for (State n = 0; n <= 6; ++n) {
    auto a = moves_of(lts, lts.seeds[n]);
    std::set<std::tuple<std::string, std::string, std::vector<State>>> renamed;
    for (auto [i, o, d] : a) {
      std::replace(i.begin(), i.end(), '_', '.');
      std::replace(o.begin(), o.end(), '_', '.');
      renamed.insert({i.substr(5), o.substr(5), d});
    }
    CHECK(renamed == moves_of(spec, spec.seeds[n]));
  }
  CHECK(check_bisimulation(lts, spec, identity_map(art), {Relation::Bisimulation, 6}).verdict == Verdict::Equivalent);
}

TEST_CASE("flow gadget built from three counters") {
  const auto art = lower::build_inc_decnz_decnz();
  const auto sub = subsystem_of(art);
  const auto lts = derive_boundary_lts(sub, 8);
  SUBCASE("DecNZ at zero gets stuck") {
    for (const auto& [i, o, d] : moves_of(lts, lts.seeds[0])) CHECK(i != "node:dec0_in");
  }
  SUBCASE("Inc moves to the next encoded state, matching internal path enumeration") {
    const oracle::World w(art.system);
    std::vector<std::size_t> b;
    for (const auto& e : *art.system.boundary) b.push_back(w.group_of(e.str()));
    for (State n = 0; n <= 5; ++n) {
      std::set<std::vector<State>> lib;
      for (const auto& [i, o, d] : moves_of(lts, lts.seeds[n]))
        if (i == "node:inc_in" && o == "node:inc_out") lib.insert(d);
      CHECK(lib == std::set<std::vector<State>>{art.encoding.apply(n + 1)});
      std::set<std::vector<State>> ref;
      for (const auto& [p, v] : oracle::big_steps(w, b, 0, art.encoding.apply(n), 30))
        if (p == 1) ref.insert(v);
      CHECK(ref == lib);
    }
  }
  SUBCASE("DecNZ1 at two exits at one") {
    std::set<std::vector<State>> lib;
    for (const auto& [i, o, d] : moves_of(lts, lts.seeds[2]))
      if (i == "node:dec1_in") {
        CHECK(o == "node:dec1_out");
        lib.insert(d);
      }
    CHECK(lib == std::set<std::vector<State>>{art.encoding.apply(1)});
  }
}

TEST_CASE("spec closure examples") {
  SUBCASE("Inc-DecNZ-PZ at zero") {
    const auto lts = spec_closure_lts(gadgets::inc_decnz_pz(), 4);
    std::set<std::string> entries;
    for (const auto& [i, o, d] : moves_of(lts, lts.seeds[0])) entries.insert(i);
    CHECK(entries == std::set<std::string>{"inc.in", "pz.in"});
  }
  SUBCASE("door alternates") {
    const auto lts = spec_closure_lts(gadgets::sscd(), 0);
    CHECK(moves_of(lts, lts.seeds[0]) ==
          std::set<std::tuple<std::string, std::string, std::vector<State>>>{{"L1", "R1", {1}}});
    CHECK(moves_of(lts, lts.seeds[1]) ==
          std::set<std::tuple<std::string, std::string, std::vector<State>>>{{"L2", "R2", {0}}});
  }
  SUBCASE("cap zero flags the incremented state") {
    const auto lts = spec_closure_lts(gadgets::inc_dec_jz(), 0);
    const auto one = lts.state_index({1});
    REQUIRE(one);
    CHECK(lts.frontier[*one]);
    CHECK_FALSE(lts.frontier[lts.seeds[0]]);
  }
}

TEST_CASE("checker: reflexivity and symmetry") {
  for (const auto& spec : {gadgets::inc_dec_jz(), gadgets::sscd(), gadgets::incab_decnzcd_pz(1, 2, 1, 2)}) {
    const auto lts = spec_closure_lts(spec, 5);
    PortMap id;
    for (const auto& l : spec.locations()) id.emplace_back(l, l);
    CHECK(check_bisimulation(lts, lts, id, {Relation::Bisimulation, 5}).verdict == Verdict::Equivalent);
  }
  const auto art = lower::sim_incdecjz_via_incjzdec();
  auto mutant = art;
  mutant.system.edges.erase(mutant.system.edges.begin() + 3);
  for (const LoweringArtifact* a : std::vector<const LoweringArtifact*>{&art, &mutant}) {
    const auto impl = derive_boundary_lts(subsystem_of(*a), 6);
    const auto spec = spec_closure_lts(*a->spec, 6);
    PortMap inverse;
    for (const auto& [i, s] : a->port_map) inverse.emplace_back(s, i);
    const auto fwd = check_bisimulation(impl, spec, a->port_map, {Relation::Bisimulation, 6});
    const auto bwd = check_bisimulation(spec, impl, inverse, {Relation::Bisimulation, 6});
    CHECK(fwd.verdict == bwd.verdict);
  }
}

TEST_CASE("port map must be a bijection") {
  const auto art = lower::sim_incjzdec_via_incdecnzpz();
  const auto impl = derive_boundary_lts(subsystem_of(art), 3);
  const auto spec = spec_closure_lts(*art.spec, 3);
  auto broken = art.port_map;
  broken[1].second = broken[0].second;
  CHECK_THROWS_WITH_AS(check_bisimulation(impl, spec, broken), doctest::Contains("bijective"), std::invalid_argument);
  broken.pop_back();
  CHECK_THROWS_AS(check_bisimulation(impl, spec, broken), std::invalid_argument);
}

TEST_CASE("Inc-JZDec simulation is equivalent; without the diode it leaks") {
  const auto art = lower::sim_incdecjz_via_incjzdec();
  CHECK(verify_artifact(art, 8).verdict == Verdict::Equivalent);

  auto leaky = art;
  auto& edges = leaky.system.edges;
  std::erase_if(edges, [](const gadgets::Edge& e) { return e.a.instance == "H0" || e.b.instance == "H0"; });
  leaky.system.add_edge(Endpoint::external("jz_in"), Endpoint::at("G1", "jzdec.in"));
  const auto r = verify_artifact(leaky, 8);
  REQUIRE(r.verdict == Verdict::NotEquivalent);
  REQUIRE(r.counterexample);
  CHECK(r.counterexample->kind == "trace");
  CHECK(r.counterexample->feasible_in == "impl");
  REQUIRE_FALSE(r.counterexample->impl_steps.empty());
  const gadgets::Model m(leaky.system);
  const auto& boundary = *leaky.system.boundary;
  for (const auto& s : r.counterexample->impl_steps) {
    const auto end = reach::replay(m, {m.class_of(boundary[s.in]), s.from}, s.witness);
    CHECK(end.final.position == m.class_of(boundary[s.out]));
    CHECK(end.final.states == s.to);
  }
  const auto json = report_to_json(r);
  CHECK(json.find("NotEquivalent") != std::string::npos);
}

TEST_CASE("property: equivalent constructions have equal bounded trace sets") {
  check_traces(lower::sim_incdecjz_via_incjzdec(), 3, 3, 20);
  check_traces(lower::build_inc_decnz_decnz(), 3, 3, 20);
  check_traces(lower::sim_incjzdec_via_incdecnzpz(), 3, 3, 20);
  check_traces(lower::build_sscd_from_incdecnz(), 1, 4, 20);
}

TEST_CASE("strong bisimulation rejects angelic constructions, simulation equivalence accepts them") {
  const auto art = lower::sim_incdecnzpz_via_incab({1, 2, 1, 2});
  CHECK(art.relation == Relation::SimulationEquivalence);
  CHECK(verify_artifact(art, 4, Relation::Bisimulation).verdict == Verdict::NotEquivalent);
  CHECK(verify_artifact(art, 4).verdict == Verdict::Equivalent);
  const auto exact = lower::sim_incdecnzpz_via_incab({2, 2, 1, 1});
  CHECK(exact.relation == Relation::Bisimulation);
  CHECK(verify_artifact(exact, 8).verdict == Verdict::Equivalent);
}

TEST_CASE("a seed outside the region is inconclusive") {
  auto art = lower::sim_incdecjz_via_incjzdec();
  art.internal_cap = 3;
  const auto r = verify_artifact(art, 8);
  CHECK(r.verdict == Verdict::InconclusiveAtCap);
  DeriveOptions tiny;
  tiny.visit_budget = 10;
  CHECK(verify_artifact(lower::sim_incdecjz_via_incjzdec(), 8, std::nullopt, tiny).verdict ==
        Verdict::InconclusiveAtCap);
}

TEST_CASE("interval invariant examples") {
  using enum SimOp;
  SUBCASE("degenerate ranges collapse to exact values") {
    const auto rep = check_interval_invariant(lower::sim_incdecnzpz_via_incab({1, 1, 1, 1}), {Inc, Inc, DecNZ});
    CHECK(rep.ok);
    CHECK(rep.abcd == 1);
    for (const auto& s : rep.steps) {
      CHECK(s.g0.lo == s.g0.hi);
      CHECK(s.g1.lo == s.g1.hi);
    }
    CHECK(rep.steps.back().g0 == Interval{1, 1});
  }
  SUBCASE("one Inc raises max(G0) by b*acd") {
    const auto rep = check_interval_invariant(lower::sim_incdecnzpz_via_incab({1, 2, 1, 2}), {Inc});
    CHECK(rep.ok);
    CHECK(rep.steps[0].g0.hi == 2 * 2);
    CHECK(rep.steps[0].g1.lo == 4);
  }
  SUBCASE("PZ admitted only at zero, matching every choice resolution") {
    const auto art = lower::sim_incdecnzpz_via_incab({1, 2, 1, 2});
    for (const auto& ops : std::vector<std::vector<SimOp>>{{Inc, DecNZ, PZ}, {Inc, PZ}, {Inc, Inc, DecNZ, PZ}, {PZ}}) {
      const auto rep = check_interval_invariant(art, ops);
      CHECK(rep.ok);
      oracle::AngelicSet set{1, 2, 1, 2};
      for (std::size_t k = 0; k < ops.size(); ++k) CHECK(set.apply(static_cast<int>(ops[k])) == rep.steps[k].impl_admits);
    }
    CHECK_FALSE(check_interval_invariant(art, {Inc, PZ}).steps[1].impl_admits);
  }
}
