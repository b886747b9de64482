#pragma once

#include "gadgetforge/system.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gadgetforge {

using gadgets::State;

// Maps a spec state to an internal state vector (one entry per instance, in
// instance order). Linear: instance i holds coeff_i * q + offset_i. Table:
// explicit vectors for the states of a finite spec.
struct Encoding {
  enum class Kind { None, Linear, Table };
  Kind kind = Kind::None;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> linear;
  std::vector<std::vector<State>> table;

  static Encoding linear_map(std::vector<std::pair<std::uint64_t, std::uint64_t>> coefficients);
  static Encoding table_map(std::vector<std::vector<State>> rows);

  std::vector<State> apply(State q) const;
  // Spec states checked at the given cap: 0..cap for linear, every row for tables.
  std::vector<State> domain(State cap) const;
  State max_value(State cap) const;
  bool operator==(const Encoding&) const = default;
};

enum class Relation { Bisimulation, SimulationEquivalence };
const char* to_string(Relation relation);

struct LoweringArtifact {
  gadgets::SystemOfGadgets system;
  std::vector<std::pair<std::string, std::string>> roles;  // instance id -> role
  std::optional<gadgets::GadgetSpec> spec;                  // the gadget being simulated, if any
  std::vector<std::pair<std::string, std::string>> port_map;  // boundary endpoint -> spec location
  Encoding encoding;
  Relation relation = Relation::Bisimulation;
  std::optional<State> internal_cap;
  std::string lowering;
  std::vector<std::pair<std::string, std::string>> params;

  std::string role_of(const std::string& instance) const;
  std::optional<std::string> param(const std::string& key) const;
};

// Sidecar JSON with roles, provenance, spec, port map, encoding and relation.
std::string serialize_sidecar(const LoweringArtifact& artifact);
// Fills every field except `system` from a sidecar document.
LoweringArtifact parse_sidecar(const std::string& text, const gadgets::SystemOfGadgets& system);

}  // namespace gadgetforge
