#pragma once

#include "gadgetforge/gadgets.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gadgetforge::gadgets {

struct Endpoint {
  std::string node;      // set for external nodes
  std::string instance;  // set for gadget ports
  std::string port;

  static Endpoint external(std::string name) { return {std::move(name), {}, {}}; }
  static Endpoint at(std::string instance, std::string port) { return {{}, std::move(instance), std::move(port)}; }
  // "node:NAME" or "INSTANCE.PORT".
  static Endpoint parse(const std::string& text);
  bool is_node() const { return instance.empty(); }
  std::string str() const;
  bool operator==(const Endpoint&) const = default;
  auto operator<=>(const Endpoint&) const = default;
};

struct Instance {
  std::string id;
  std::string spec;
  State initial = 0;
  bool operator==(const Instance&) const = default;
};

struct Edge {
  Endpoint a;
  Endpoint b;
  bool operator==(const Edge&) const = default;
};

struct SystemOfGadgets {
  std::vector<std::pair<std::string, GadgetSpec>> specs;
  std::vector<Instance> instances;
  std::vector<std::string> nodes;
  std::vector<Edge> edges;
  Endpoint start;
  Endpoint goal;
  std::optional<std::vector<Endpoint>> boundary;

  const GadgetSpec* find_spec(const std::string& name) const;
  std::optional<std::size_t> instance_index(const std::string& id) const;
  // Adds the spec under its own name unless an equal spec is already present.
  const std::string& add_spec(const GadgetSpec& spec);
  void add_edge(const Endpoint& a, const Endpoint& b) { edges.push_back({a, b}); }
  bool operator==(const SystemOfGadgets&) const = default;
};

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws SchemaError naming the offending field.
void validate(const SystemOfGadgets& system);

struct Configuration {
  std::uint32_t position = 0;
  std::vector<State> states;
  bool operator==(const Configuration&) const = default;
};

struct TraversalLabel {
  std::uint32_t instance = 0;
  std::uint32_t entry = 0;  // location index within the instance's spec
  std::uint32_t exit = 0;
  State before = 0;
  State after = 0;
  bool operator==(const TraversalLabel&) const = default;
};

struct Successor {
  Configuration config;
  TraversalLabel label;
};

// Union-find partition of all endpoints. Endpoint ids: external nodes first,
// then each instance's locations in order. Class ids are assigned in order of
// their smallest endpoint id.
struct Partition {
  std::vector<std::uint32_t> class_of;
  std::uint32_t class_count = 0;
  std::vector<std::uint32_t> instance_offset;
  std::uint32_t start_class = 0;
  std::uint32_t goal_class = 0;

  std::uint32_t node_class(std::size_t node) const { return class_of[node]; }
  std::uint32_t location_class(std::size_t instance, std::uint32_t location) const {
    return class_of[instance_offset[instance] + location];
  }
};

// Validated, indexed view of a system used by every search.
class Model {
 public:
  explicit Model(const SystemOfGadgets& system);

  const SystemOfGadgets& system() const { return system_; }
  const Partition& partition() const { return partition_; }
  const GadgetSpec& spec(std::size_t instance) const { return system_.specs[spec_index_[instance]].second; }
  std::size_t instance_count() const { return spec_index_.size(); }

  std::uint32_t class_of(const Endpoint& endpoint) const;
  Configuration initial() const;
  // Successors in deterministic order: instances, then entries (components),
  // then choice value ascending.
  void successors(const Configuration& config, std::vector<Successor>& out) const;
  std::vector<Successor> successors(const Configuration& config) const;

  std::string describe(const TraversalLabel& label) const;
  std::string location_name(std::size_t instance, std::uint32_t location) const;

 private:
  SystemOfGadgets system_;
  Partition partition_;
  std::vector<std::size_t> spec_index_;
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> entries_at_class_;
};

Partition canonicalize(const SystemOfGadgets& system);
std::vector<Successor> successors(const SystemOfGadgets& system, const Configuration& config);

std::string serialize_system(const SystemOfGadgets& system);
SystemOfGadgets parse_system(const std::string& text);

// A single spec document: {"name": ..., "kind": ..., ...} in the system schema.
std::string serialize_spec(const GadgetSpec& spec);
GadgetSpec parse_spec(const std::string& text);

}  // namespace gadgetforge::gadgets
