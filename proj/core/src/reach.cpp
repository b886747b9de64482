#include "gadgetforge/reach.hpp"

#include <json.hpp>

#include <algorithm>
#include <deque>

namespace gadgetforge::reach {

using json = nlohmann::ordered_json;

const char* to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::Reachable: return "Reachable";
    case Verdict::UnreachableWithinCap: return "UnreachableWithinCap";
    case Verdict::Unknown: return "Unknown";
  }
  return "?";
}

const char* to_string(UnknownReason reason) {
  switch (reason) {
    case UnknownReason::None: return "none";
    case UnknownReason::CapOverflow: return "cap-overflow";
    case UnknownReason::BudgetExhausted: return "budget-exhausted";
  }
  return "?";
}

namespace {

void put_varint(std::string& out, std::uint64_t v) {
  while (v >= 0x80) {
    out.push_back(static_cast<char>((v & 0x7f) | 0x80));
    v >>= 7;
  }
  out.push_back(static_cast<char>(v));
}

std::uint64_t get_varint(const std::string& in, std::size_t& pos) {
  std::uint64_t v = 0;
  int shift = 0;
  while (true) {
    auto byte = static_cast<unsigned char>(in[pos++]);
    v |= static_cast<std::uint64_t>(byte & 0x7f) << shift;
    if (!(byte & 0x80)) return v;
    shift += 7;
  }
}

}  // namespace

std::string encode_key(const Configuration& config) {
  std::string key;
  key.reserve(config.states.size() + 4);
  put_varint(key, config.position);
  for (auto s : config.states) put_varint(key, s);
  return key;
}

Configuration decode_key(const std::string& key) {
  Configuration c;
  std::size_t pos = 0;
  c.position = static_cast<std::uint32_t>(get_varint(key, pos));
  while (pos < key.size()) c.states.push_back(get_varint(key, pos));
  return c;
}

Exploration::Exploration(const Model& model, State counter_cap, std::uint64_t visit_budget)
    : model_(model), cap_(counter_cap), budget_(visit_budget) {
  for (std::size_t i = 0; i < model.instance_count(); ++i) counter_instance_.push_back(model.spec(i).is_counter());
}

bool Exploration::over_cap(const Configuration& config) const {
  for (std::size_t i = 0; i < config.states.size(); ++i)
    if (counter_instance_[i] && config.states[i] > cap_) return true;
  return false;
}

void Exploration::run(const Configuration& start,
                      const std::function<bool(const Configuration&, std::size_t)>& visit) {
  std::deque<std::size_t> queue;
  auto discover = [&](const Configuration& c, std::size_t parent, const TraversalLabel& label) -> bool {
    auto key = encode_key(c);
    if (visited_.count(key)) return true;
    if (nodes_.size() >= budget_) {
      budget_exhausted_ = true;
      return false;
    }
    const std::size_t id = nodes_.size();
    visited_.emplace(key, id);
    nodes_.push_back({parent, label});
    keys_.push_back(std::move(key));
    ++stats_.explored;
    for (std::size_t i = 0; i < c.states.size(); ++i)
      if (counter_instance_[i]) stats_.max_counter = std::max(stats_.max_counter, c.states[i]);
    if (!visit(c, id)) return false;
    if (over_cap(c)) cap_overflow_ = true;
    else queue.push_back(id);
    stats_.frontier_peak = std::max<std::uint64_t>(stats_.frontier_peak, queue.size());
    return true;
  };
  if (!discover(start, SIZE_MAX, {})) return;
  std::vector<gadgets::Successor> succ;
  while (!queue.empty()) {
    auto id = queue.front();
    queue.pop_front();
    auto config = decode_key(keys_[id]);
    succ.clear();
    model_.successors(config, succ);
    for (const auto& s : succ)
      if (!discover(s.config, id, s.label)) return;
  }
}

Witness Exploration::path_to(std::size_t node) const {
  Witness w;
  while (nodes_[node].parent != SIZE_MAX) {
    w.push_back(nodes_[node].label);
    node = nodes_[node].parent;
  }
  std::reverse(w.begin(), w.end());
  return w;
}

SearchOutcome bfs_reach(const Model& model, State counter_cap, std::uint64_t visit_budget) {
  if (counter_cap < 1 || visit_budget < 1) throw std::invalid_argument("caps must be >= 1");
  Exploration ex(model, counter_cap, visit_budget);
  const auto goal = model.partition().goal_class;
  std::optional<std::size_t> found;
  ex.run(model.initial(), [&](const Configuration& c, std::size_t node) {
    if (c.position != goal) return true;
    found = node;
    return false;
  });
  SearchOutcome out;
  out.stats = ex.stats();
  if (found) {
    out.verdict = Verdict::Reachable;
    out.witness = ex.path_to(*found);
  } else if (ex.budget_exhausted()) {
    out.verdict = Verdict::Unknown;
    out.reason = UnknownReason::BudgetExhausted;
  } else if (ex.cap_overflow()) {
    out.verdict = Verdict::Unknown;
    out.reason = UnknownReason::CapOverflow;
  } else {
    out.verdict = Verdict::UnreachableWithinCap;
  }
  return out;
}

SearchOutcome bfs_reach(const SystemOfGadgets& system, State counter_cap, std::uint64_t visit_budget) {
  return bfs_reach(Model(system), counter_cap, visit_budget);
}

ReplayResult replay(const Model& model, const Configuration& from, const Witness& witness) {
  Configuration c = from;
  std::vector<gadgets::Successor> succ;
  for (std::size_t i = 0; i < witness.size(); ++i) {
    const auto& l = witness[i];
    if (l.instance >= model.instance_count())
      throw ReplayError(i, "step " + std::to_string(i) + ": unknown instance index");
    succ.clear();
    model.successors(c, succ);
    auto it = std::find_if(succ.begin(), succ.end(), [&](const gadgets::Successor& s) { return s.label == l; });
    if (it == succ.end())
      throw ReplayError(i, "step " + std::to_string(i) + ": " + model.describe(l) + " is not enabled");
    c = it->config;
  }
  return {c, c.position == model.partition().goal_class};
}

ReplayResult replay(const Model& model, const Witness& witness) { return replay(model, model.initial(), witness); }

namespace {

json label_json(const Model& model, const TraversalLabel& l) {
  const auto& sp = model.spec(l.instance);
  json j;
  j["instance"] = model.system().instances[l.instance].id;
  j["entry"] = sp.locations()[l.entry];
  j["exit"] = sp.locations()[l.exit];
  if (sp.is_counter()) {
    j["from"] = l.before;
    j["to"] = l.after;
  } else {
    j["from"] = sp.state_name(l.before);
    j["to"] = sp.state_name(l.after);
  }
  return j;
}

}  // namespace

std::string label_json_text(const Model& model, const TraversalLabel& label) { return label_json(model, label).dump(); }

std::string outcome_to_json(const Model& model, const SearchOutcome& outcome) {
  json j;
  j["verdict"] = to_string(outcome.verdict);
  if (outcome.verdict == Verdict::Unknown) j["reason"] = to_string(outcome.reason);
  j["stats"] = {{"explored", outcome.stats.explored},
                {"frontier_peak", outcome.stats.frontier_peak},
                {"max_counter", outcome.stats.max_counter}};
  json w = json::array();
  for (const auto& l : outcome.witness) w.push_back(label_json(model, l));
  j["witness"] = w;
  return j.dump(2) + "\n";
}

}  // namespace gadgetforge::reach
