#pragma once

#include "gadgetforge/artifact.hpp"
#include "gadgetforge/reach.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gadgetforge::verify {

using gadgets::GadgetSpec;
using gadgets::State;
using gadgets::SystemOfGadgets;

struct Subsystem {
  SystemOfGadgets system;  // boundary required
  Encoding encoding;
  std::optional<State> internal_cap;
};

Subsystem subsystem_of(const LoweringArtifact& artifact);

struct LtsTransition {
  std::uint32_t src;
  std::uint32_t in;
  std::uint32_t out;
  std::uint32_t dst;
  bool operator==(const LtsTransition&) const = default;
  auto operator<=>(const LtsTransition&) const = default;
};

struct BoundaryLTS {
  std::vector<std::string> ports;
  std::vector<std::vector<State>> states;
  std::vector<LtsTransition> transitions;  // sorted
  std::vector<bool> frontier;              // outgoing behaviour untrusted
  std::vector<bool> path_overflow;         // some internal path was cut by the path cap
  std::vector<std::uint32_t> seeds;        // seeds[q]: state encoding spec state q
  bool budget_exhausted = false;
  std::uint64_t explored = 0;

  std::optional<std::uint32_t> port_index(const std::string& name) const;
  std::optional<std::uint32_t> state_index(const std::vector<State>& s) const;
};

struct DeriveOptions {
  std::uint64_t visit_budget = 20'000'000;
};

// Region limits used by derive_boundary_lts for a given cap.
State resting_cap(const Subsystem& sub, State cap);
State path_cap(const Subsystem& sub, State cap);

BoundaryLTS derive_boundary_lts(const Subsystem& sub, State cap, const DeriveOptions& options = {});
BoundaryLTS spec_closure_lts(const GadgetSpec& spec, State cap);

// Internal traversals taking the agent from boundary port `in` with internal
// states `from` to port `out` with states `to`; empty when impossible.
std::optional<reach::Witness> internal_witness(const Subsystem& sub, State cap, const std::vector<State>& from,
                                               std::uint32_t in, std::uint32_t out, const std::vector<State>& to);

enum class Verdict { Equivalent, NotEquivalent, InconclusiveAtCap };
const char* to_string(Verdict verdict);

struct TraceStep {
  std::string in;   // spec location names
  std::string out;
};

struct ImplStep {
  std::vector<State> from;
  std::uint32_t in = 0;  // impl port index
  std::uint32_t out = 0;
  std::vector<State> to;
  reach::Witness witness;
};

struct Counterexample {
  std::string kind;         // "trace" or "branching"
  std::string feasible_in;  // "impl" or "spec" for trace counterexamples
  State spec_state = 0;     // seed spec state the trace starts from
  std::vector<TraceStep> trace;
  std::vector<ImplStep> impl_steps;  // concrete impl realisation when feasible in impl
};

struct BisimReport {
  Verdict verdict = Verdict::InconclusiveAtCap;
  Relation relation = Relation::Bisimulation;
  State cap = 0;
  std::uint64_t relation_size = 0;
  std::uint64_t product_pairs = 0;
  std::uint64_t frontier_assumed = 0;
  std::uint64_t path_overflow_states = 0;
  std::uint64_t impl_states = 0;
  std::uint64_t spec_states = 0;
  std::string note;
  std::optional<Counterexample> counterexample;
};

using PortMap = std::vector<std::pair<std::string, std::string>>;  // impl port -> spec location

struct CheckOptions {
  Relation relation = Relation::Bisimulation;
  State cap = 0;
  std::size_t counterexample_budget = 200'000;
};

// Throws std::invalid_argument when the port map is not a bijection.
BisimReport check_bisimulation(const BoundaryLTS& impl, const BoundaryLTS& spec, const PortMap& port_map,
                               const CheckOptions& options = {});

// derive + closure + check, filling impl_steps witnesses for impl-side traces.
BisimReport verify_artifact(const LoweringArtifact& artifact, State cap,
                            std::optional<Relation> relation = std::nullopt, const DeriveOptions& options = {});

std::string report_to_json(const BisimReport& report, const BoundaryLTS* impl = nullptr,
                           const gadgets::Model* model = nullptr);

// Interval abstraction of the Inc[a,b]-DecNZ[c,d]-PZ simulation.
enum class SimOp { Inc, DecNZ, PZ };
const char* to_string(SimOp op);

struct Interval {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
  bool operator==(const Interval&) const = default;
};

struct IntervalStep {
  SimOp op;
  bool spec_admits = false;
  bool impl_admits = false;
  std::uint64_t n = 0;  // spec state after the step
  Interval g0;
  Interval g1;
};

struct IntervalReport {
  bool ok = true;
  std::optional<std::size_t> violation_index;
  std::string violation;
  std::uint64_t abcd = 0;
  std::vector<IntervalStep> steps;
};

// Takes ranges and tunnel multiplicities from the G0/G1 instances of an
// artifact built by lower::sim_incdecnzpz_via_incab (direct mode).
IntervalReport check_interval_invariant(const LoweringArtifact& construction, const std::vector<SimOp>& ops);

}  // namespace gadgetforge::verify
