#include "gadgetforge/lower.hpp"
#include "gadgetforge/system.hpp"
#include "oracles.hpp"

#include <doctest.h>
#include <json.hpp>

#include <random>

using namespace gadgetforge;
using namespace gadgetforge::gadgets;

namespace {

SystemOfGadgets single(const GadgetSpec& spec, State initial) {
  SystemOfGadgets s;
  s.add_spec(spec);
  s.instances.push_back({"g", spec.name(), initial});
  s.nodes = {"s", "t"};
  s.start = Endpoint::external("s");
  s.goal = Endpoint::external("t");
  return s;
}

// Random systems over small specs with random edges.
SystemOfGadgets random_system(std::mt19937_64& rng) {
  const std::vector<GadgetSpec> pool{inc_dec_jz(), inc_decnz_pz(), sscd(), incab_decnzcd_pz(1, 2, 1, 2)};
  SystemOfGadgets s;
  const std::size_t n = 1 + rng() % 3;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& spec = pool[rng() % pool.size()];
    s.add_spec(spec);
    s.instances.push_back({"g" + std::to_string(i), spec.name(), spec.is_counter() ? rng() % 3 : rng() % 2});
  }
  s.nodes = {"s", "t"};
  std::vector<Endpoint> eps{Endpoint::external("s"), Endpoint::external("t")};
  for (const auto& inst : s.instances)
    for (const auto& l : s.find_spec(inst.spec)->locations()) eps.push_back(Endpoint::at(inst.id, l));
  const std::size_t m = rng() % (eps.size() + 2);
  for (std::size_t k = 0; k < m; ++k) s.add_edge(eps[rng() % eps.size()], eps[rng() % eps.size()]);
  s.start = eps[0];
  s.goal = eps[1];
  return s;
}

}  // namespace

TEST_CASE("canonicalize") {
  auto s = single(inc_dec_jz(), 0);
  SUBCASE("no edges: every endpoint its own class") {
    const auto p = canonicalize(s);
    CHECK(p.class_count == 2 + 7);
  }
  SUBCASE("one edge joins two ports") {
    s.add_edge(Endpoint::at("g", "inc.out"), Endpoint::at("g", "dec.in"));
    const auto p = canonicalize(s);
    CHECK(p.class_count == 8);
    CHECK(p.location_class(0, *inc_dec_jz().location_index("inc.out")) ==
          p.location_class(0, *inc_dec_jz().location_index("dec.in")));
  }
  SUBCASE("chain of three edges over four endpoints") {
    s.add_edge(Endpoint::external("s"), Endpoint::at("g", "inc.in"));
    s.add_edge(Endpoint::at("g", "inc.in"), Endpoint::at("g", "jz.z"));
    s.add_edge(Endpoint::at("g", "jz.z"), Endpoint::external("t"));
    const auto p = canonicalize(s);
    CHECK(p.class_count == 6);
    CHECK(p.start_class == p.goal_class);
  }
}

TEST_CASE("successor examples") {
  SUBCASE("JZ at zero forces the zero branch") {
    auto s = single(inc_dec_jz(), 0);
    s.add_edge(Endpoint::external("s"), Endpoint::at("g", "jz.in"));
    const Model m(s);
    const auto succ = m.successors(m.initial());
    REQUIRE(succ.size() == 1);
    CHECK(m.location_name(0, succ[0].label.exit) == "g.jz.z");
  }
  SUBCASE("Inc-DecNZ-PZ at zero next to all entrances") {
    auto s = single(inc_decnz_pz(), 0);
    for (const char* p : {"inc.in", "decnz.in", "pz.in"}) s.add_edge(Endpoint::external("s"), Endpoint::at("g", p));
    const Model m(s);
    const auto succ = m.successors(m.initial());
    REQUIRE(succ.size() == 2);
    CHECK(m.location_name(0, succ[0].label.entry) == "g.inc.in");
    CHECK(m.location_name(0, succ[1].label.entry) == "g.pz.in");
  }
  SUBCASE("Inc[1,2] offers two successors") {
    auto s = single(GadgetSpec::counter("r", {{"i", ComponentKind::inc(1, 2)}}), 5);
    s.add_edge(Endpoint::external("s"), Endpoint::at("g", "i.in"));
    const auto succ = successors(s, Model(s).initial());
    REQUIRE(succ.size() == 2);
    CHECK(succ[0].config.states[0] == 6);
    CHECK(succ[1].config.states[0] == 7);
  }
}

TEST_CASE("property: successor soundness and oracle agreement") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto sys = random_system(rng);
    const Model m(sys);
    const oracle::World w(sys);
    for (std::uint32_t pos = 0; pos < m.partition().class_count; ++pos) {
      Configuration c{pos, m.initial().states};
      const auto succ = m.successors(c);
      for (const auto& s : succ) {
        CHECK(m.partition().location_class(s.label.instance, s.label.entry) == pos);
        CHECK(m.partition().location_class(s.label.instance, s.label.exit) == s.config.position);
        CHECK(s.label.before == c.states[s.label.instance]);
        CHECK(s.config.states[s.label.instance] == s.label.after);
      }
      // Compare the multiset of resulting (exit endpoint group, states) with the oracle.
      std::string rep;
      for (const auto& n : sys.nodes)
        if (m.class_of(Endpoint::external(n)) == pos) rep = "node:" + n;
      for (std::size_t i = 0; i < sys.instances.size() && rep.empty(); ++i)
        for (std::uint32_t l = 0; l < m.spec(i).locations().size() && rep.empty(); ++l)
          if (m.partition().location_class(i, l) == pos) rep = sys.instances[i].id + "." + m.spec(i).locations()[l];
      std::multiset<std::pair<std::size_t, std::vector<State>>> lib, ref;
      for (const auto& s : succ) {
        const auto exit = Endpoint::at(sys.instances[s.label.instance].id, m.spec(s.label.instance).locations()[s.label.exit]);
        lib.insert({w.group_of(exit.str()), s.config.states});
      }
      for (const auto& x : w.steps(w.group_of(rep), c.states)) ref.insert(x);
      CHECK(lib == ref);
    }
  }
}

TEST_CASE("serialize and parse round trip") {
  const auto p = machine::parse_program("0: INC c0\n1: JZ c0 3\n2: DEC c1\n3: HALT\n");
  for (const auto& art : {lower::compile_machine_to_incdecjz(p, {1, 2}), lower::build_sscd_from_incdecnz(),
                          lower::pipeline(p, {0, 0}, lower::Target::IncDecNZPZ),
                          lower::sim_incdecnzpz_via_incab({1, 2, 1, 2})}) {
    const auto text = serialize_system(art.system);
    const auto back = parse_system(text);
    CHECK(back == art.system);
    CHECK(serialize_system(back) == text);
  }
}

TEST_CASE("schema errors name the offending field") {
  auto s = single(inc_dec_jz(), 0);
  s.add_edge(Endpoint::external("s"), Endpoint::at("g", "inc.in"));
  const auto text = serialize_system(s);
  auto erase_key = [](const std::string& t, const std::string& key) {
    auto j = nlohmann::json::parse(t);
    j.erase(key);
    return j.dump();
  };
  CHECK_THROWS_WITH_AS(parse_system(erase_key(text, "goal")), doctest::Contains("goal required"), SchemaError);
  CHECK_THROWS_WITH_AS(parse_system(erase_key(text, "start")), doctest::Contains("start required"), SchemaError);
  auto bad_edge = text;
  bad_edge.replace(bad_edge.find("\"g.inc.in\""), 10, "\"g.nope.in\"");
  CHECK_THROWS_WITH_AS(parse_system(bad_edge), doctest::Contains("g.nope.in"), SchemaError);
  CHECK_THROWS_AS(parse_system("{"), SchemaError);
  auto bad = s;
  bad.instances[0].id = "a.b";
  CHECK_THROWS_AS(validate(bad), SchemaError);
  auto door = single(sscd(), 0);
  door.instances[0].initial = 5;
  CHECK_THROWS_AS(validate(door), SchemaError);
}

TEST_CASE("spec documents round trip") {
  for (const auto& spec : {inc_dec_jz(), sscd(), incab_decnzcd_pz(1, 2, 2, 2, 3, 1), inc_jzdec()})
    CHECK(parse_spec(serialize_spec(spec)) == spec);
}

TEST_CASE("endpoint syntax") {
  CHECK(Endpoint::parse("node:x") == Endpoint::external("x"));
  CHECK(Endpoint::parse("G0.inc.in") == Endpoint::at("G0", "inc.in"));
  CHECK(Endpoint::at("G0", "inc.in").str() == "G0.inc.in");
  CHECK_THROWS(Endpoint::parse("nodot"));
}
