#include "gadgetforge/artifact.hpp"

#include <json.hpp>

#include <algorithm>
#include <stdexcept>

namespace gadgetforge {

using json = nlohmann::ordered_json;

Encoding Encoding::linear_map(std::vector<std::pair<std::uint64_t, std::uint64_t>> coefficients) {
  Encoding e;
  e.kind = Kind::Linear;
  e.linear = std::move(coefficients);
  return e;
}

Encoding Encoding::table_map(std::vector<std::vector<State>> rows) {
  Encoding e;
  e.kind = Kind::Table;
  e.table = std::move(rows);
  return e;
}

std::vector<State> Encoding::apply(State q) const {
  switch (kind) {
    case Kind::Linear: {
      std::vector<State> v;
      for (const auto& [k, o] : linear) v.push_back(k * q + o);
      return v;
    }
    case Kind::Table:
      if (q >= table.size()) throw std::out_of_range("encoding has no row for state " + std::to_string(q));
      return table[q];
    case Kind::None: break;
  }
  throw std::logic_error("artifact has no encoding");
}

std::vector<State> Encoding::domain(State cap) const {
  std::vector<State> d;
  const State n = kind == Kind::Table ? table.size() : cap + 1;
  for (State q = 0; q < n; ++q) d.push_back(q);
  return d;
}

State Encoding::max_value(State cap) const {
  State m = 0;
  if (kind == Kind::Table) {
    for (const auto& row : table)
      for (auto v : row) m = std::max(m, v);
  } else {
    for (auto v : apply(cap)) m = std::max(m, v);
  }
  return m;
}

const char* to_string(Relation relation) {
  return relation == Relation::Bisimulation ? "bisimulation" : "simulation-equivalence";
}

std::string LoweringArtifact::role_of(const std::string& instance) const {
  for (const auto& [id, role] : roles)
    if (id == instance) return role;
  return {};
}

std::optional<std::string> LoweringArtifact::param(const std::string& key) const {
  for (const auto& [k, v] : params)
    if (k == key) return v;
  return std::nullopt;
}

namespace {

json spec_json(const gadgets::GadgetSpec& spec) {
  // Reuse the system serializer so spec documents share one schema.
  gadgets::SystemOfGadgets holder;
  holder.specs.emplace_back(spec.name(), spec);
  holder.nodes = {"s"};
  holder.start = holder.goal = gadgets::Endpoint::external("s");
  return json::parse(gadgets::serialize_system(holder))["specs"][spec.name()];
}

gadgets::GadgetSpec spec_from(const std::string& name, const json& j) {
  gadgets::SystemOfGadgets holder;
  json doc;
  doc["specs"][name] = j;
  doc["instances"] = json::array();
  doc["nodes"] = json::array({"s"});
  doc["edges"] = json::array();
  doc["start"] = "node:s";
  doc["goal"] = "node:s";
  return gadgets::parse_system(doc.dump()).specs.front().second;
}

}  // namespace

std::string serialize_sidecar(const LoweringArtifact& a) {
  json j;
  json prov;
  prov["lowering"] = a.lowering;
  json params = json::object();
  for (const auto& [k, v] : a.params) params[k] = v;
  prov["params"] = params;
  j["provenance"] = prov;
  json roles = json::object();
  for (const auto& [id, role] : a.roles) roles[id] = role;
  j["roles"] = roles;
  if (a.spec) {
    j["spec_name"] = a.spec->name();
    j["spec"] = spec_json(*a.spec);
  }
  if (!a.port_map.empty()) {
    json pm = json::object();
    for (const auto& [from, to] : a.port_map) pm[from] = to;
    j["port_map"] = pm;
  }
  if (a.encoding.kind != Encoding::Kind::None) {
    json enc;
    if (a.encoding.kind == Encoding::Kind::Linear) {
      enc["kind"] = "linear";
      json inst = json::object();
      for (std::size_t i = 0; i < a.encoding.linear.size(); ++i)
        inst[a.system.instances.at(i).id] = json::array({a.encoding.linear[i].first, a.encoding.linear[i].second});
      enc["instances"] = inst;
    } else {
      enc["kind"] = "table";
      json rows = json::object();
      for (std::size_t q = 0; q < a.encoding.table.size(); ++q) {
        json row = json::object();
        for (std::size_t i = 0; i < a.encoding.table[q].size(); ++i) {
          const auto& inst = a.system.instances.at(i);
          const auto* sp = a.system.find_spec(inst.spec);
          if (sp && !sp->is_counter()) row[inst.id] = sp->state_name(a.encoding.table[q][i]);
          else row[inst.id] = a.encoding.table[q][i];
        }
        rows[a.spec ? a.spec->state_name(q) : std::to_string(q)] = row;
      }
      enc["states"] = rows;
    }
    j["encoding"] = enc;
  }
  j["relation"] = to_string(a.relation);
  if (a.internal_cap) j["internal_cap"] = *a.internal_cap;
  return j.dump(2) + "\n";
}

LoweringArtifact parse_sidecar(const std::string& text, const gadgets::SystemOfGadgets& system) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw gadgets::SchemaError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw gadgets::SchemaError("$: expected an object");
  LoweringArtifact a;
  a.system = system;
  try {
    if (j.contains("provenance")) {
      a.lowering = j["provenance"].value("lowering", "");
      if (j["provenance"].contains("params"))
        for (const auto& [k, v] : j["provenance"]["params"].items()) a.params.emplace_back(k, v.get<std::string>());
    }
    if (j.contains("roles"))
      for (const auto& [k, v] : j["roles"].items()) a.roles.emplace_back(k, v.get<std::string>());
    if (j.contains("spec")) a.spec = spec_from(j.value("spec_name", std::string("spec")), j["spec"]);
    if (j.contains("port_map"))
      for (const auto& [k, v] : j["port_map"].items()) a.port_map.emplace_back(k, v.get<std::string>());
    if (j.contains("relation")) {
      auto r = j["relation"].get<std::string>();
      if (r == "bisimulation") a.relation = Relation::Bisimulation;
      else if (r == "simulation-equivalence") a.relation = Relation::SimulationEquivalence;
      else throw gadgets::SchemaError("relation: expected 'bisimulation' or 'simulation-equivalence'");
    }
    if (j.contains("internal_cap")) a.internal_cap = j["internal_cap"].get<State>();
    if (j.contains("encoding")) {
      const auto& enc = j["encoding"];
      auto kind = enc.at("kind").get<std::string>();
      auto instance_pos = [&](const std::string& id) {
        auto idx = system.instance_index(id);
        if (!idx) throw gadgets::SchemaError("encoding: unknown instance '" + id + "'");
        return *idx;
      };
      if (kind == "linear") {
        std::vector<std::pair<std::uint64_t, std::uint64_t>> lin(system.instances.size(), {0, 0});
        for (const auto& [id, v] : enc.at("instances").items())
          lin[instance_pos(id)] = {v.at(0).get<std::uint64_t>(), v.at(1).get<std::uint64_t>()};
        a.encoding = Encoding::linear_map(std::move(lin));
      } else if (kind == "table") {
        if (!a.spec || a.spec->is_counter()) throw gadgets::SchemaError("encoding: table encodings need a finite spec");
        std::vector<std::vector<State>> rows(a.spec->states().size(), std::vector<State>(system.instances.size(), 0));
        std::vector<bool> seen(rows.size(), false);
        for (auto& row : rows)
          for (std::size_t i = 0; i < system.instances.size(); ++i) row[i] = system.instances[i].initial;
        for (const auto& [qname, row] : enc.at("states").items()) {
          auto q = a.spec->state_from_name(qname);
          if (!q) throw gadgets::SchemaError("encoding.states: unknown spec state '" + qname + "'");
          seen[*q] = true;
          for (const auto& [id, v] : row.items()) {
            auto i = instance_pos(id);
            const auto* sp = system.find_spec(system.instances[i].spec);
            if (sp && !sp->is_counter()) {
              auto st = sp->state_from_name(v.get<std::string>());
              if (!st) throw gadgets::SchemaError("encoding.states." + qname + "." + id + ": unknown state");
              rows[*q][i] = *st;
            } else {
              rows[*q][i] = v.get<State>();
            }
          }
        }
        if (std::find(seen.begin(), seen.end(), false) != seen.end())
          throw gadgets::SchemaError("encoding.states: every spec state needs a row");
        a.encoding = Encoding::table_map(std::move(rows));
      } else {
        throw gadgets::SchemaError("encoding.kind: expected 'linear' or 'table'");
      }
    }
  } catch (const json::exception& e) {
    throw gadgets::SchemaError(std::string("sidecar: ") + e.what());
  }
  return a;
}

}  // namespace gadgetforge
