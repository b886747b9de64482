#include "gadgetforge/gadgets.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace gadgetforge::gadgets;

namespace {

std::set<oracle::CompMove> moves(const ComponentKind& k, State s) {
  std::set<oracle::CompMove> out;
  for (const auto& t : component_transitions(k, s)) out.insert({t.state, to_string(t.entry), to_string(t.exit)});
  return out;
}

}  // namespace

TEST_CASE("component transition examples") {
  CHECK(moves(ComponentKind::inc(1, 2), 0) == std::set<oracle::CompMove>{{1, "in", "out"}, {2, "in", "out"}});
  CHECK(moves(ComponentKind::pz(), 3).empty());
  CHECK(moves(ComponentKind::pz(), 0) == std::set<oracle::CompMove>{{0, "in", "out"}});
  CHECK(moves(ComponentKind::dec(), 0) == std::set<oracle::CompMove>{{0, "in", "out"}});
  CHECK(moves(ComponentKind::decnz(2, 3), 1).empty());
  CHECK(moves(ComponentKind::decnz(2, 3), 4) == std::set<oracle::CompMove>{{1, "in", "out"}, {2, "in", "out"}});
  CHECK(moves(ComponentKind::jzdec(), 3) == std::set<oracle::CompMove>{{2, "in", "nz"}});
}

TEST_CASE("choices enumerate in ascending amount") {
  const auto t = component_transitions(ComponentKind::inc(2, 4), 10);
  REQUIRE(t.size() == 3);
  CHECK(t[0].state == 12);
  CHECK(t[2].state == 14);
}

TEST_CASE("property: component semantics match the definitions for states 0..100") {
  std::vector<ComponentKind> kinds{ComponentKind::pz(), ComponentKind::pnz(), ComponentKind::jz(), ComponentKind::jzdec()};
  for (std::uint64_t a = 1; a <= 4; ++a)
    for (std::uint64_t b = a; b <= 4; ++b)
      for (auto k : {ComponentKind::inc(a, b), ComponentKind::decnz(a, b), ComponentKind::dec(a, b)}) kinds.push_back(k);
  for (const auto& k : kinds)
    for (State s = 0; s <= 100; ++s) {
      INFO(to_string(k) << " at " << s);
      const auto m = moves(k, s);
      CHECK(m == oracle::component_moves(k, s));
    }
  for (State s = 0; s <= 100; ++s) CHECK(moves(ComponentKind::pz(), s).empty() != moves(ComponentKind::pnz(), s).empty());
}

TEST_CASE("range validation") {
  CHECK_THROWS_WITH_AS(validate(ComponentKind::inc(0, 1)), doctest::Contains("a > 0"), std::invalid_argument);
  CHECK_THROWS_AS(validate(ComponentKind::decnz(3, 2)), std::invalid_argument);
  CHECK_NOTHROW(validate(ComponentKind::dec(2, 2)));
  CHECK_NOTHROW(validate(ComponentKind::pz()));
}

TEST_CASE("kind names round trip") {
  for (auto t : {ComponentType::IncRange, ComponentType::DecNZRange, ComponentType::DecRange, ComponentType::PZ,
                 ComponentType::PNZ, ComponentType::JZSwitch, ComponentType::JZDecSwitch})
    CHECK(parse_type_name(type_name(t)) == t);
  CHECK_FALSE(parse_type_name("Bogus").has_value());
  CHECK(to_string(ComponentKind::inc(1, 2)) == "Inc[1,2]");
}

TEST_CASE("shipped counter specs expose their ports") {
  const auto g = inc_dec_jz();
  CHECK(g.is_counter());
  CHECK(g.locations().size() == 7);
  CHECK(g.location_index("jz.nz").has_value());
  CHECK_FALSE(g.location_index("jz.out").has_value());
  const auto moves_at_jz = g.moves(0, *g.location_index("jz.in"));
  REQUIRE(moves_at_jz.size() == 1);
  CHECK(g.locations()[moves_at_jz[0].exit] == "jz.z");
  CHECK(inc_decnz_decnz().locations().size() == 6);
  CHECK(inc_jzdec().locations().size() == 5);
}

TEST_CASE("merged ports act as one location") {
  const auto spec = GadgetSpec::counter("merged", {{"d", ComponentKind::decnz()}, {"p", ComponentKind::pz()}},
                                        {{"jz.in", {"d.in", "p.in"}}});
  const auto loc = spec.location_index("jz.in");
  REQUIRE(loc);
  CHECK(spec.location_index("d.in") == loc);
  CHECK(spec.location_index("p.in") == loc);
  CHECK(spec.moves(0, *loc).size() == 1);
  CHECK(spec.locations()[spec.moves(0, *loc)[0].exit] == "p.out");
  CHECK(spec.locations()[spec.moves(2, *loc)[0].exit] == "d.out");
}

TEST_CASE("finite gadget: symmetric self-closing door") {
  const auto s = sscd();
  CHECK_FALSE(s.is_counter());
  CHECK(s.states() == std::vector<std::string>{"1", "2"});
  const auto one = *s.state_from_name("1"), two = *s.state_from_name("2");
  const auto l1 = *s.location_index("L1"), l2 = *s.location_index("L2");
  REQUIRE(s.moves(one, l1).size() == 1);
  CHECK(s.moves(one, l1)[0].state == two);
  CHECK(s.locations()[s.moves(one, l1)[0].exit] == "R1");
  CHECK(s.moves(two, l1).empty());
  CHECK(s.moves(one, l2).empty());
  CHECK(s.valid_state(1));
  CHECK_FALSE(s.valid_state(2));
}

TEST_CASE("multi-tunnel Inc[a,b]-DecNZ[c,d]-PZ specs") {
  const auto g = incab_decnzcd_pz(1, 2, 1, 2, 2, 4);
  std::size_t inc = 0, dec = 0, pz = 0;
  for (const auto& c : g.components()) {
    inc += c.kind == ComponentKind::inc(1, 2);
    dec += c.kind == ComponentKind::decnz(1, 2);
    pz += c.kind == ComponentKind::pz();
  }
  CHECK(inc == 2);
  CHECK(dec == 4);
  CHECK(pz == 1);
  CHECK(g.max_increase() == 2);
  CHECK(standard_spec(g.name()) == g);
  CHECK(incab_decnzcd_pz(1, 1, 1, 1).location_index("decnz.in").has_value());
}

TEST_CASE("standard spec lookup") {
  for (const char* n : {"inc-dec-jz", "inc-jzdec", "inc-decnz-pz", "inc-decnz-decnz", "sscd"})
    CHECK(standard_spec(n).name() == n);
  CHECK_THROWS_AS(standard_spec("nope"), std::invalid_argument);
}
