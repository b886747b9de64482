#include "gadgetforge/lower.hpp"
#include "gadgetforge/verify.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace gadgetforge;
using gadgets::ComponentKind;
using gadgets::ComponentType;
using machine::Natural;

namespace {

struct Result {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2fs", s);
  return buf;
}

std::set<oracle::CompMove> library_moves(const ComponentKind& k, State s) {
  std::set<oracle::CompMove> out;
  for (const auto& t : gadgets::component_transitions(k, s))
    out.insert({t.state, gadgets::to_string(t.entry), gadgets::to_string(t.exit)});
  return out;
}

Result component_semantics() {
  const auto t0 = Clock::now();
  std::vector<ComponentKind> kinds{ComponentKind::pz(), ComponentKind::pnz(), ComponentKind::jz(),
                                   ComponentKind::jzdec()};
  for (std::uint64_t a = 1; a <= 4; ++a)
    for (std::uint64_t b = a; b <= 4; ++b) {
      kinds.push_back(ComponentKind::inc(a, b));
      kinds.push_back(ComponentKind::decnz(a, b));
      kinds.push_back(ComponentKind::dec(a, b));
    }
  std::size_t checks = 0, mismatches = 0;
  for (const auto& k : kinds)
    for (State s = 0; s <= 100; ++s) {
      ++checks;
      const auto lib = library_moves(k, s);
      if (lib != oracle::component_moves(k, s)) ++mismatches;
      if (k.type == ComponentType::DecNZRange && s < k.a && !lib.empty()) ++mismatches;
      if (k.type == ComponentType::DecRange && s == 0 && lib != std::set<oracle::CompMove>{{0, "in", "out"}})
        ++mismatches;
    }
  for (State s = 0; s <= 100; ++s) {
    const auto pz = library_moves(ComponentKind::pz(), s), pnz = library_moves(ComponentKind::pnz(), s);
    if (pz.empty() == pnz.empty()) ++mismatches;
    std::set<oracle::CompMove> jz, jzdec;
    for (const auto& [n, e, x] : pz) jz.insert({n, e, "z"}), jzdec.insert({n, e, "z"});
    for (const auto& [n, e, x] : pnz) jz.insert({n, e, "nz"});
    for (const auto& [n, e, x] : library_moves(ComponentKind::decnz(), s)) jzdec.insert({n, e, "nz"});
    if (jz != library_moves(ComponentKind::jz(), s)) ++mismatches;
    if (jzdec != library_moves(ComponentKind::jzdec(), s)) ++mismatches;
    checks += 3;
  }
  const double el = seconds_since(t0);
  return {mismatches == 0 && el < 1.0,
          std::to_string(checks) + " checks, " + std::to_string(mismatches) + " mismatches, " + fmt(el)};
}

Result halting_correspondence(const std::vector<oracle::CorpusCase>& corpus) {
  const auto t0 = Clock::now();
  std::size_t mismatches = 0, halting = 0, bad_replay = 0;
  for (const auto& c : corpus) {
    const bool halts = machine::run(c.program, c.initial, 200).status == machine::Status::Halted;
    const auto art = lower::compile_machine_to_incdecjz(c.program, c.initial);
    const gadgets::Model model(art.system);
    const auto o = reach::bfs_reach(model, 8, 1'000'000);
    const bool reachable = o.verdict == reach::Verdict::Reachable;
    halting += halts;
    if (halts != reachable) ++mismatches;
    if (reachable && !reach::replay(model, o.witness).at_goal) ++bad_replay;
  }
  const double el = seconds_since(t0);
  return {corpus.size() >= 500 && mismatches == 0 && bad_replay == 0 && el < 60.0,
          std::to_string(corpus.size()) + " machines (" + std::to_string(halting) + " halting), " +
              std::to_string(mismatches) + " mismatches, " + std::to_string(bad_replay) + " bad witnesses, " + fmt(el)};
}

Result lowering_equivalences() {
  struct Item {
    std::string name;
    std::function<bool(std::string&)> check;
  };
  std::vector<Item> items;
  auto equivalent = [](const LoweringArtifact& art, State cap) {
    return [art, cap](std::string& why) {
      auto r = verify::verify_artifact(art, cap);
      why = verify::to_string(r.verdict);
      return r.verdict == verify::Verdict::Equivalent;
    };
  };
  items.push_back({"inc-decnz-decnz", equivalent(lower::build_inc_decnz_decnz(), 8)});
  items.push_back({"inc-jzdec sim", equivalent(lower::sim_incdecjz_via_incjzdec(), 8)});
  items.push_back({"inc-decnz-pz sim", equivalent(lower::sim_incjzdec_via_incdecnzpz(), 8)});
  items.push_back({"sscd", equivalent(lower::build_sscd_from_incdecnz(), 8)});
  items.push_back({"edge duplicator 1,2,1,2", [](std::string& why) {
                     const auto h = lower::edge_duplicator_harness({1, 2, 1, 2});
                     const auto sub = verify::subsystem_of(h);
                     const auto lts = verify::derive_boundary_lts(sub, 8);
                     const auto i0 = *lts.port_index("node:In0"), o0 = *lts.port_index("node:Out0");
                     const auto i1 = *lts.port_index("node:In1"), o1 = *lts.port_index("node:Out1");
                     std::size_t leaks = 0;
                     for (const auto& t : lts.transitions)
                       if ((t.in == i0 && t.out == o1) || (t.in == i1 && t.out == o0)) ++leaks;
                     const auto r = verify::verify_artifact(h, 8);
                     why = std::to_string(leaks) + " leaks, " + verify::to_string(r.verdict);
                     return leaks == 0 && r.verdict == verify::Verdict::Equivalent;
                   }});
  for (std::uint64_t a = 1; a <= 2; ++a)
    for (std::uint64_t b = a; b <= 2; ++b)
      for (std::uint64_t c = 1; c <= 2; ++c)
        for (std::uint64_t d = c; d <= 2; ++d) {
          std::ostringstream n;
          n << "inc[a,b] sim " << a << ',' << b << ',' << c << ',' << d;
          items.push_back({n.str(), equivalent(lower::sim_incdecnzpz_via_incab({a, b, c, d}), 8)});
        }
  bool all = true;
  double worst = 0;
  std::string failures;
  for (const auto& it : items) {
    const auto t0 = Clock::now();
    std::string why;
    const bool ok = it.check(why);
    const double el = seconds_since(t0);
    worst = std::max(worst, el);
    if (!ok || el >= 120.0) {
      all = false;
      failures += " [" + it.name + ": " + why + ", " + fmt(el) + "]";
    }
  }
  return {all, std::to_string(items.size()) + " constructions Equivalent at cap 8, slowest " + fmt(worst) + failures};
}

Result interval_invariant() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(4242);
  std::size_t sequences = 0, steps = 0, violations = 0;
  for (std::uint64_t a = 1; a <= 2; ++a)
    for (std::uint64_t b = a; b <= 2; ++b)
      for (std::uint64_t c = 1; c <= 2; ++c)
        for (std::uint64_t d = c; d <= 2; ++d) {
          const auto art = lower::sim_incdecnzpz_via_incab({a, b, c, d});
          const std::uint64_t abcd = a * b * c * d;
          for (int trial = 0; trial < 100; ++trial) {
            const bool bounded = trial < 60;  // keep n <= 3 so every resolution is enumerated
            std::vector<verify::SimOp> ops;
            std::uint64_t n = 0;
            while (ops.size() < 20) {
              const int op = static_cast<int>(rng() % 3);
              if ((op == 1 && n == 0) || (op == 2 && n != 0) || (op == 0 && bounded && n == 3)) continue;
              ops.push_back(static_cast<verify::SimOp>(op));
              n = op == 0 ? n + 1 : op == 1 ? n - 1 : 0;
            }
            ++sequences;
            const auto rep = verify::check_interval_invariant(art, ops);
            if (!rep.ok || rep.steps.size() != ops.size()) {
              ++violations;
              continue;
            }
            if (!bounded) {
              steps += ops.size();
              continue;
            }
            oracle::AngelicSet set{a, b, c, d};
            for (std::size_t k = 0; k < ops.size(); ++k) {
              ++steps;
              if (!set.apply(static_cast<int>(ops[k]))) {
                ++violations;
                break;
              }
              std::uint64_t max0 = 0, min1 = UINT64_MAX;
              for (const auto& [g0, g1] : set.vectors) max0 = std::max(max0, g0), min1 = std::min(min1, g1);
              const auto& st = rep.steps[k];
              if (max0 != abcd * st.n || min1 != abcd * st.n || st.g0.hi != max0 || st.g1.lo != min1) {
                ++violations;
                break;
              }
            }
          }
        }
  const double el = seconds_since(t0);
  return {violations == 0, std::to_string(sequences) + " sequences, " + std::to_string(steps) + " steps, " +
                               std::to_string(violations) + " violations, " + fmt(el)};
}

Result mutation_sensitivity() {
  const auto t0 = Clock::now();
  const auto base = lower::sim_incdecjz_via_incjzdec();
  std::size_t caught = 0, bad_replay = 0;
  const std::size_t total = base.system.edges.size();
  for (std::size_t e = 0; e < total; ++e) {
    auto mutant = base;
    mutant.system.edges.erase(mutant.system.edges.begin() + static_cast<std::ptrdiff_t>(e));
    const auto r = verify::verify_artifact(mutant, 8);
    if (r.verdict != verify::Verdict::NotEquivalent) continue;
    ++caught;
    if (!r.counterexample) {
      ++bad_replay;
      continue;
    }
    const gadgets::Model model(mutant.system);
    const auto& boundary = *mutant.system.boundary;
    for (const auto& s : r.counterexample->impl_steps) {
      try {
        const auto end = reach::replay(model, {model.class_of(boundary[s.in]), s.from}, s.witness);
        if (end.final.position != model.class_of(boundary[s.out]) || end.final.states != s.to) ++bad_replay;
      } catch (const reach::ReplayError&) {
        ++bad_replay;
      }
    }
  }
  const double el = seconds_since(t0);
  const bool ok = caught * 10 >= total * 9 && bad_replay == 0;
  return {ok, std::to_string(caught) + "/" + std::to_string(total) + " single-edge deletions caught, " +
                  std::to_string(bad_replay) + " unreplayable counterexamples, " + fmt(el)};
}

Result initializer() {
  const auto t0 = Clock::now();
  std::size_t failures = 0;
  for (unsigned v = 0; v <= 1000; ++v) {
    const auto frag = lower::emit_initializer({Natural(v)});
    std::size_t bits = 0;
    while ((v + 1) >> (bits + 1)) ++bits;
    const std::size_t bound = 8 * (bits + 1);
    const auto prog = lower::with_halt(frag);
    const auto r = machine::run(prog, std::vector<Natural>(prog.counters.size(), 0), 1'000'000);
    if (r.status != machine::Status::Halted || r.final.counters[0] != v || frag.instructions.size() > bound)
      ++failures;
  }
  const double el = seconds_since(t0);
  return {failures == 0, "values 0..1000, " + std::to_string(failures) + " failures, " + fmt(el)};
}

Result pipeline_preservation(const std::vector<oracle::CorpusCase>& corpus) {
  const auto t0 = Clock::now();
  std::size_t mismatches = 0, runs = 0;
  for (const auto& c : corpus) {
    const bool halts = machine::run(c.program, c.initial, 200).status == machine::Status::Halted;
    for (auto target : {lower::Target::IncJZDec, lower::Target::IncDecNZPZ}) {
      const auto art = lower::pipeline(c.program, c.initial, target);
      const auto o = reach::bfs_reach(art.system, 12, 1'000'000);
      ++runs;
      if ((o.verdict == reach::Verdict::Reachable) != halts) ++mismatches;
    }
  }
  const double el = seconds_since(t0);
  return {mismatches == 0 && el < 600.0,
          std::to_string(runs) + " lowered searches, " + std::to_string(mismatches) + " mismatches, " + fmt(el)};
}

Result determinism(const std::vector<oracle::CorpusCase>& corpus) {
  const auto t0 = Clock::now();
  std::size_t differences = 0;
  for (const auto& c : corpus) {
    for (auto target : {lower::Target::IncDecJZ, lower::Target::IncJZDec}) {
      const auto x = lower::pipeline(c.program, c.initial, target);
      const auto y = lower::pipeline(c.program, c.initial, target);
      if (gadgets::serialize_system(x.system) != gadgets::serialize_system(y.system) ||
          serialize_sidecar(x) != serialize_sidecar(y))
        ++differences;
    }
    const auto art = lower::compile_machine_to_incdecjz(c.program, c.initial);
    const gadgets::Model m1(art.system), m2(gadgets::parse_system(gadgets::serialize_system(art.system)));
    const auto o1 = reach::bfs_reach(m1, 8, 1'000'000), o2 = reach::bfs_reach(m2, 8, 1'000'000);
    if (reach::outcome_to_json(m1, o1) != reach::outcome_to_json(m2, o2)) ++differences;
  }
  const double el = seconds_since(t0);
  return {differences == 0, std::to_string(corpus.size()) + " programs, " + std::to_string(differences) +
                                " differences across repeated compiles and searches, " + fmt(el)};
}

}  // namespace

int main() {
  const auto corpus = oracle::machine_corpus();
  const std::vector<std::pair<std::string, std::function<Result()>>> criteria = {
      {"component semantics table", component_semantics},
      {"halting iff reachability", [&] { return halting_correspondence(corpus); }},
      {"lowering equivalences at cap 8", lowering_equivalences},
      {"interval invariant", interval_invariant},
      {"mutation sensitivity", mutation_sensitivity},
      {"initializer", initializer},
      {"pipeline preservation", [&] { return pipeline_preservation(corpus); }},
      {"determinism", [&] { return determinism(corpus); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Result r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (r.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].first
              << "): " << r.detail << std::endl;
    failed += !r.pass;
  }
  return failed == 0 ? 0 : 1;
}
