#include "gadgetforge/system.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

namespace gadgetforge::gadgets {

using json = nlohmann::ordered_json;

Endpoint Endpoint::parse(const std::string& text) {
  if (text.rfind("node:", 0) == 0) {
    auto name = text.substr(5);
    if (name.empty()) throw SchemaError("endpoint '" + text + "': empty node name");
    return external(name);
  }
  auto dot = text.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == text.size())
    throw SchemaError("endpoint '" + text + "': expected node:NAME or INSTANCE.PORT");
  return at(text.substr(0, dot), text.substr(dot + 1));
}

std::string Endpoint::str() const { return is_node() ? "node:" + node : instance + "." + port; }

const GadgetSpec* SystemOfGadgets::find_spec(const std::string& name) const {
  for (const auto& [n, s] : specs)
    if (n == name) return &s;
  return nullptr;
}

std::optional<std::size_t> SystemOfGadgets::instance_index(const std::string& id) const {
  for (std::size_t i = 0; i < instances.size(); ++i)
    if (instances[i].id == id) return i;
  return std::nullopt;
}

const std::string& SystemOfGadgets::add_spec(const GadgetSpec& spec) {
  for (const auto& [n, s] : specs) {
    if (n != spec.name()) continue;
    if (!(s == spec)) throw std::invalid_argument("conflicting definitions of spec '" + n + "'");
    return n;
  }
  specs.emplace_back(spec.name(), spec);
  return specs.back().first;
}

namespace {

struct EndpointIndex {
  std::map<std::string, std::size_t> node;
  std::map<std::string, std::size_t> instance;
};

std::optional<std::uint32_t> endpoint_id(const SystemOfGadgets& sys, const EndpointIndex& idx,
                                         const std::vector<std::uint32_t>& offset, const Endpoint& e) {
  if (e.is_node()) {
    auto it = idx.node.find(e.node);
    if (it == idx.node.end()) return std::nullopt;
    return static_cast<std::uint32_t>(it->second);
  }
  auto it = idx.instance.find(e.instance);
  if (it == idx.instance.end()) return std::nullopt;
  const auto* spec = sys.find_spec(sys.instances[it->second].spec);
  if (!spec) return std::nullopt;
  auto loc = spec->location_index(e.port);
  if (!loc) return std::nullopt;
  return offset[it->second] + *loc;
}

EndpointIndex index_of(const SystemOfGadgets& sys) {
  EndpointIndex idx;
  for (std::size_t i = 0; i < sys.nodes.size(); ++i) idx.node.emplace(sys.nodes[i], i);
  for (std::size_t i = 0; i < sys.instances.size(); ++i) idx.instance.emplace(sys.instances[i].id, i);
  return idx;
}

std::vector<std::uint32_t> offsets_of(const SystemOfGadgets& sys, std::uint32_t& total) {
  std::vector<std::uint32_t> offset;
  total = static_cast<std::uint32_t>(sys.nodes.size());
  for (const auto& inst : sys.instances) {
    offset.push_back(total);
    total += static_cast<std::uint32_t>(sys.find_spec(inst.spec)->locations().size());
  }
  return offset;
}

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0u); }
  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::uint32_t> parent_;
};

}  // namespace

void validate(const SystemOfGadgets& sys) {
  std::set<std::string> names;
  for (std::size_t i = 0; i < sys.specs.size(); ++i)
    if (!names.insert(sys.specs[i].first).second)
      throw SchemaError("specs." + sys.specs[i].first + ": duplicate spec name");
  std::set<std::string> nodes;
  for (std::size_t i = 0; i < sys.nodes.size(); ++i) {
    if (sys.nodes[i].empty()) throw SchemaError("nodes[" + std::to_string(i) + "]: empty node name");
    if (!nodes.insert(sys.nodes[i]).second)
      throw SchemaError("nodes[" + std::to_string(i) + "]: duplicate node '" + sys.nodes[i] + "'");
  }
  std::set<std::string> ids;
  for (std::size_t i = 0; i < sys.instances.size(); ++i) {
    const auto& inst = sys.instances[i];
    const std::string path = "instances[" + std::to_string(i) + "]";
    if (inst.id.empty() || inst.id.find('.') != std::string::npos || inst.id.find(':') != std::string::npos)
      throw SchemaError(path + ".id: invalid instance id '" + inst.id + "'");
    if (!ids.insert(inst.id).second) throw SchemaError(path + ".id: duplicate instance '" + inst.id + "'");
    const auto* spec = sys.find_spec(inst.spec);
    if (!spec) throw SchemaError(path + ".spec: unknown spec '" + inst.spec + "'");
    if (!spec->valid_state(inst.initial)) throw SchemaError(path + ".initial_state: not a state of " + inst.spec);
  }
  std::uint32_t total = 0;
  auto offset = offsets_of(sys, total);
  auto idx = index_of(sys);
  auto check = [&](const Endpoint& e, const std::string& path) {
    if (!endpoint_id(sys, idx, offset, e)) throw SchemaError(path + ": unknown endpoint '" + e.str() + "'");
  };
  for (std::size_t i = 0; i < sys.edges.size(); ++i) {
    check(sys.edges[i].a, "edges[" + std::to_string(i) + "][0]");
    check(sys.edges[i].b, "edges[" + std::to_string(i) + "][1]");
  }
  check(sys.start, "start");
  check(sys.goal, "goal");
  if (sys.boundary)
    for (std::size_t i = 0; i < sys.boundary->size(); ++i) check((*sys.boundary)[i], "boundary[" + std::to_string(i) + "]");
}

Partition canonicalize(const SystemOfGadgets& sys) {
  validate(sys);
  Partition p;
  std::uint32_t total = 0;
  p.instance_offset = offsets_of(sys, total);
  auto idx = index_of(sys);
  UnionFind uf(total);
  for (const auto& e : sys.edges)
    uf.unite(*endpoint_id(sys, idx, p.instance_offset, e.a), *endpoint_id(sys, idx, p.instance_offset, e.b));
  p.class_of.resize(total);
  std::vector<std::uint32_t> class_of_root(total, UINT32_MAX);
  for (std::uint32_t i = 0; i < total; ++i) {
    auto r = uf.find(i);
    if (class_of_root[r] == UINT32_MAX) class_of_root[r] = p.class_count++;
    p.class_of[i] = class_of_root[r];
  }
  p.start_class = p.class_of[*endpoint_id(sys, idx, p.instance_offset, sys.start)];
  p.goal_class = p.class_of[*endpoint_id(sys, idx, p.instance_offset, sys.goal)];
  return p;
}

Model::Model(const SystemOfGadgets& system) : system_(system), partition_(canonicalize(system_)) {
  for (const auto& inst : system_.instances) {
    for (std::size_t s = 0; s < system_.specs.size(); ++s)
      if (system_.specs[s].first == inst.spec) spec_index_.push_back(s);
  }
  entries_at_class_.resize(partition_.class_count);
  for (std::size_t i = 0; i < spec_index_.size(); ++i) {
    const auto& sp = spec(i);
    for (std::size_t e = 0; e < sp.entry_count(); ++e)
      entries_at_class_[partition_.location_class(i, sp.entry_location(e))].emplace_back(
          static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(e));
  }
}

std::uint32_t Model::class_of(const Endpoint& endpoint) const {
  auto idx = index_of(system_);
  auto id = endpoint_id(system_, idx, partition_.instance_offset, endpoint);
  if (!id) throw SchemaError("unknown endpoint '" + endpoint.str() + "'");
  return partition_.class_of[*id];
}

Configuration Model::initial() const {
  Configuration c;
  c.position = partition_.start_class;
  for (const auto& inst : system_.instances) c.states.push_back(inst.initial);
  return c;
}

void Model::successors(const Configuration& config, std::vector<Successor>& out) const {
  std::vector<Move> moves;
  for (const auto& [inst, entry] : entries_at_class_[config.position]) {
    const auto& sp = spec(inst);
    moves.clear();
    const State before = config.states[inst];
    sp.fire(entry, before, moves);
    for (const auto& m : moves) {
      Successor s;
      s.config.states = config.states;
      s.config.states[inst] = m.state;
      s.config.position = partition_.location_class(inst, m.exit);
      s.label = {inst, sp.entry_location(entry), m.exit, before, m.state};
      out.push_back(std::move(s));
    }
  }
}

std::vector<Successor> Model::successors(const Configuration& config) const {
  std::vector<Successor> out;
  successors(config, out);
  return out;
}

std::string Model::location_name(std::size_t instance, std::uint32_t location) const {
  return system_.instances[instance].id + "." + spec(instance).locations()[location];
}

std::string Model::describe(const TraversalLabel& l) const {
  const auto& sp = spec(l.instance);
  return system_.instances[l.instance].id + ":" + sp.locations()[l.entry] + "->" + sp.locations()[l.exit] + ":" +
         sp.state_name(l.before) + "->" + sp.state_name(l.after);
}

std::vector<Successor> successors(const SystemOfGadgets& system, const Configuration& config) {
  return Model(system).successors(config);
}

namespace {

json spec_to_json(const GadgetSpec& spec) {
  json j;
  if (spec.is_counter()) {
    j["kind"] = "counter";
    json comps = json::array();
    for (const auto& c : spec.components()) {
      json cj;
      cj["name"] = c.name;
      cj["type"] = type_name(c.kind.type);
      if (c.kind.ranged()) cj["range"] = json::array({c.kind.a, c.kind.b});
      comps.push_back(cj);
    }
    j["components"] = comps;
    json merged = json::array();
    for (const auto& m : spec.merged()) merged.push_back(json{{"name", m.name}, {"ports", m.ports}});
    j["merged"] = merged;
  } else {
    j["kind"] = "finite";
    j["states"] = spec.states();
    j["locations"] = spec.locations();
    json ts = json::array();
    for (const auto& t : spec.transitions())
      ts.push_back(json::array({spec.states()[t.from_state], spec.locations()[t.from_location],
                                spec.states()[t.to_state], spec.locations()[t.to_location]}));
    j["transitions"] = ts;
  }
  return j;
}

const json& field(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(path + "." + key + ": required");
  return *it;
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw SchemaError(path + ": expected a string");
  return j.get<std::string>();
}

std::uint64_t as_natural(const json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    throw SchemaError(path + ": expected a natural number");
  return j.get<std::uint64_t>();
}

std::vector<std::string> string_list(const json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaError(path + ": expected an array");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_string(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

GadgetSpec spec_from_json(const std::string& name, const json& j, const std::string& path) {
  auto kind = as_string(field(j, "kind", path), path + ".kind");
  try {
    if (kind == "counter") {
      const auto& cs = field(j, "components", path);
      if (!cs.is_array()) throw SchemaError(path + ".components: expected an array");
      std::vector<Component> comps;
      for (std::size_t i = 0; i < cs.size(); ++i) {
        const std::string cp = path + ".components[" + std::to_string(i) + "]";
        Component c;
        c.name = as_string(field(cs[i], "name", cp), cp + ".name");
        auto tname = as_string(field(cs[i], "type", cp), cp + ".type");
        auto type = parse_type_name(tname);
        if (!type) throw SchemaError(cp + ".type: unknown component type '" + tname + "'");
        c.kind.type = *type;
        if (auto r = cs[i].find("range"); r != cs[i].end()) {
          if (!c.kind.ranged()) throw SchemaError(cp + ".range: " + tname + " takes no range");
          if (!r->is_array() || r->size() != 2) throw SchemaError(cp + ".range: expected [a, b]");
          c.kind.a = as_natural((*r)[0], cp + ".range[0]");
          c.kind.b = as_natural((*r)[1], cp + ".range[1]");
        }
        comps.push_back(c);
      }
      std::vector<MergedPort> merged;
      if (auto m = j.find("merged"); m != j.end()) {
        if (!m->is_array()) throw SchemaError(path + ".merged: expected an array");
        for (std::size_t i = 0; i < m->size(); ++i) {
          const std::string mp = path + ".merged[" + std::to_string(i) + "]";
          merged.push_back({as_string(field((*m)[i], "name", mp), mp + ".name"),
                            string_list(field((*m)[i], "ports", mp), mp + ".ports")});
        }
      }
      return GadgetSpec::counter(name, std::move(comps), std::move(merged));
    }
    if (kind == "finite") {
      auto states = string_list(field(j, "states", path), path + ".states");
      auto locs = string_list(field(j, "locations", path), path + ".locations");
      const auto& ts = field(j, "transitions", path);
      if (!ts.is_array()) throw SchemaError(path + ".transitions: expected an array");
      std::vector<FiniteTransition> trans;
      auto find_in = [](const std::vector<std::string>& v, const std::string& x) -> std::optional<std::uint32_t> {
        auto it = std::find(v.begin(), v.end(), x);
        if (it == v.end()) return std::nullopt;
        return static_cast<std::uint32_t>(it - v.begin());
      };
      for (std::size_t i = 0; i < ts.size(); ++i) {
        const std::string tp = path + ".transitions[" + std::to_string(i) + "]";
        auto parts = string_list(ts[i], tp);
        if (parts.size() != 4) throw SchemaError(tp + ": expected [state, location, state, location]");
        auto q = find_in(states, parts[0]), a = find_in(locs, parts[1]);
        auto r = find_in(states, parts[2]), b = find_in(locs, parts[3]);
        if (!q || !r) throw SchemaError(tp + ": unknown state");
        if (!a || !b) throw SchemaError(tp + ": unknown location");
        trans.push_back({*q, *a, *r, *b});
      }
      return GadgetSpec::finite(name, std::move(states), std::move(locs), std::move(trans));
    }
  } catch (const std::invalid_argument& e) {
    throw SchemaError(path + ": " + e.what());
  }
  throw SchemaError(path + ".kind: expected 'counter' or 'finite'");
}

}  // namespace

std::string serialize_system(const SystemOfGadgets& sys) {
  json j;
  json specs = json::object();
  for (const auto& [name, spec] : sys.specs) specs[name] = spec_to_json(spec);
  j["specs"] = specs;
  json insts = json::array();
  for (const auto& inst : sys.instances) {
    const auto* spec = sys.find_spec(inst.spec);
    json ij{{"id", inst.id}, {"spec", inst.spec}};
    if (spec && !spec->is_counter()) ij["initial_state"] = spec->state_name(inst.initial);
    else ij["initial_state"] = inst.initial;
    insts.push_back(ij);
  }
  j["instances"] = insts;
  j["nodes"] = sys.nodes;
  json edges = json::array();
  for (const auto& e : sys.edges) edges.push_back(json::array({e.a.str(), e.b.str()}));
  j["edges"] = edges;
  j["start"] = sys.start.str();
  j["goal"] = sys.goal.str();
  if (sys.boundary) {
    json b = json::array();
    for (const auto& e : *sys.boundary) b.push_back(e.str());
    j["boundary"] = b;
  }
  return j.dump(2) + "\n";
}

SystemOfGadgets parse_system(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("$: expected an object");
  SystemOfGadgets sys;
  if (!j.contains("goal")) throw SchemaError("goal required");
  if (!j.contains("start")) throw SchemaError("start required");
  const auto& specs = field(j, "specs", "$");
  if (!specs.is_object()) throw SchemaError("specs: expected an object");
  for (const auto& [name, sj] : specs.items()) sys.specs.emplace_back(name, spec_from_json(name, sj, "specs." + name));
  const auto& insts = field(j, "instances", "$");
  if (!insts.is_array()) throw SchemaError("instances: expected an array");
  for (std::size_t i = 0; i < insts.size(); ++i) {
    const std::string ip = "instances[" + std::to_string(i) + "]";
    Instance inst;
    inst.id = as_string(field(insts[i], "id", ip), ip + ".id");
    inst.spec = as_string(field(insts[i], "spec", ip), ip + ".spec");
    const auto* spec = sys.find_spec(inst.spec);
    if (!spec) throw SchemaError(ip + ".spec: unknown spec '" + inst.spec + "'");
    const json init = insts[i].contains("initial_state") ? insts[i]["initial_state"] : json(0);
    if (spec->is_counter()) {
      inst.initial = as_natural(init, ip + ".initial_state");
    } else {
      auto st = spec->state_from_name(init.is_string() ? init.get<std::string>() : init.dump());
      if (!st) throw SchemaError(ip + ".initial_state: not a state of " + inst.spec);
      inst.initial = *st;
    }
    sys.instances.push_back(inst);
  }
  if (j.contains("nodes")) sys.nodes = string_list(j["nodes"], "nodes");
  const auto& edges = field(j, "edges", "$");
  if (!edges.is_array()) throw SchemaError("edges: expected an array");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string ep = "edges[" + std::to_string(i) + "]";
    auto pair = string_list(edges[i], ep);
    if (pair.size() != 2) throw SchemaError(ep + ": expected a pair of endpoints");
    sys.edges.push_back({Endpoint::parse(pair[0]), Endpoint::parse(pair[1])});
  }
  sys.start = Endpoint::parse(as_string(j["start"], "start"));
  sys.goal = Endpoint::parse(as_string(j["goal"], "goal"));
  if (j.contains("boundary")) {
    std::vector<Endpoint> b;
    for (const auto& s : string_list(j["boundary"], "boundary")) b.push_back(Endpoint::parse(s));
    sys.boundary = std::move(b);
  }
  validate(sys);
  return sys;
}

std::string serialize_spec(const GadgetSpec& spec) {
  json j;
  j["name"] = spec.name();
  const auto body = spec_to_json(spec);
  for (const auto& [k, v] : body.items()) j[k] = v;
  return j.dump(2) + "\n";
}

GadgetSpec parse_spec(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("invalid JSON: ") + e.what());
  }
  auto name = as_string(field(j, "name", "$"), "$.name");
  return spec_from_json(name, j, "$");
}

}  // namespace gadgetforge::gadgets
