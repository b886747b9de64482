#pragma once

#include "gadgetforge/system.hpp"

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace gadgetforge::reach {

using gadgets::Configuration;
using gadgets::Model;
using gadgets::State;
using gadgets::SystemOfGadgets;
using gadgets::TraversalLabel;

enum class Verdict { Reachable, UnreachableWithinCap, Unknown };
enum class UnknownReason { None, CapOverflow, BudgetExhausted };
const char* to_string(Verdict verdict);
const char* to_string(UnknownReason reason);

struct Stats {
  std::uint64_t explored = 0;
  std::uint64_t frontier_peak = 0;
  State max_counter = 0;
  bool operator==(const Stats&) const = default;
};

using Witness = std::vector<TraversalLabel>;

struct SearchOutcome {
  Verdict verdict = Verdict::Unknown;
  UnknownReason reason = UnknownReason::None;
  Witness witness;
  Stats stats;
};

// Breadth-first exploration from one configuration. Configurations with a
// counter-gadget state above counter_cap are recorded but not expanded.
class Exploration {
 public:
  Exploration(const Model& model, State counter_cap, std::uint64_t visit_budget);

  // visit is called once per newly discovered configuration, in BFS order,
  // starting with the start configuration; returning false stops the search.
  void run(const Configuration& start, const std::function<bool(const Configuration&, std::size_t node)>& visit);

  Witness path_to(std::size_t node) const;
  bool cap_overflow() const { return cap_overflow_; }
  bool budget_exhausted() const { return budget_exhausted_; }
  bool over_cap(const Configuration& config) const;
  const Stats& stats() const { return stats_; }

 private:
  struct Node {
    std::size_t parent;
    TraversalLabel label;
  };

  const Model& model_;
  State cap_;
  std::uint64_t budget_;
  std::vector<bool> counter_instance_;
  std::vector<Node> nodes_;
  std::vector<std::string> keys_;
  std::unordered_map<std::string, std::size_t> visited_;
  bool cap_overflow_ = false;
  bool budget_exhausted_ = false;
  Stats stats_;
};

std::string encode_key(const Configuration& config);
Configuration decode_key(const std::string& key);

SearchOutcome bfs_reach(const Model& model, State counter_cap, std::uint64_t visit_budget);
SearchOutcome bfs_reach(const SystemOfGadgets& system, State counter_cap, std::uint64_t visit_budget);

class ReplayError : public std::runtime_error {
 public:
  ReplayError(std::size_t index, const std::string& what) : std::runtime_error(what), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

struct ReplayResult {
  Configuration final;
  bool at_goal = false;
};

// Replays from the model's initial configuration, or from `from` when given.
ReplayResult replay(const Model& model, const Witness& witness);
ReplayResult replay(const Model& model, const Configuration& from, const Witness& witness);

std::string label_json_text(const Model& model, const TraversalLabel& label);
std::string outcome_to_json(const Model& model, const SearchOutcome& outcome);

}  // namespace gadgetforge::reach
