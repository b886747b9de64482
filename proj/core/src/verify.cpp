#include "gadgetforge/verify.hpp"

#include <json.hpp>

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace gadgetforge::verify {

using gadgets::Configuration;
using gadgets::Model;
using json = nlohmann::ordered_json;

namespace {

std::string vector_key(const std::vector<State>& v) {
  std::string k;
  for (auto x : v) {
    k.append(reinterpret_cast<const char*>(&x), sizeof x);
  }
  return k;
}

struct StateTable {
  std::unordered_map<std::string, std::uint32_t> index;

  std::pair<std::uint32_t, bool> add(BoundaryLTS& lts, const std::vector<State>& v) {
    auto key = vector_key(v);
    auto it = index.find(key);
    if (it != index.end()) return {it->second, false};
    auto id = static_cast<std::uint32_t>(lts.states.size());
    index.emplace(std::move(key), id);
    lts.states.push_back(v);
    lts.frontier.push_back(false);
    lts.path_overflow.push_back(false);
    return {id, true};
  }
};

void finish(BoundaryLTS& lts) {
  std::sort(lts.transitions.begin(), lts.transitions.end());
  lts.transitions.erase(std::unique(lts.transitions.begin(), lts.transitions.end()), lts.transitions.end());
}

std::vector<std::uint32_t> boundary_classes(const Model& model) {
  const auto& sys = model.system();
  if (!sys.boundary || sys.boundary->empty()) throw std::invalid_argument("subsystem has no boundary");
  std::vector<std::uint32_t> cls;
  for (const auto& e : *sys.boundary) {
    auto c = model.class_of(e);
    if (std::find(cls.begin(), cls.end(), c) != cls.end())
      throw std::invalid_argument("boundary endpoint " + e.str() + " shares a connectivity class with another");
    cls.push_back(c);
  }
  return cls;
}

}  // namespace

Subsystem subsystem_of(const LoweringArtifact& artifact) {
  return {artifact.system, artifact.encoding, artifact.internal_cap};
}

std::optional<std::uint32_t> BoundaryLTS::port_index(const std::string& name) const {
  auto it = std::find(ports.begin(), ports.end(), name);
  if (it == ports.end()) return std::nullopt;
  return static_cast<std::uint32_t>(it - ports.begin());
}

std::optional<std::uint32_t> BoundaryLTS::state_index(const std::vector<State>& s) const {
  auto it = std::find(states.begin(), states.end(), s);
  if (it == states.end()) return std::nullopt;
  return static_cast<std::uint32_t>(it - states.begin());
}

State resting_cap(const Subsystem& sub, State cap) {
  if (sub.internal_cap) return *sub.internal_cap;
  return std::max<State>(1, sub.encoding.max_value(cap + 1));
}

State path_cap(const Subsystem& sub, State cap) { return 2 * resting_cap(sub, cap) + 8; }

BoundaryLTS derive_boundary_lts(const Subsystem& sub, State cap, const DeriveOptions& options) {
  Model model(sub.system);
  const auto port_class = boundary_classes(model);
  std::vector<int> port_at_class(model.partition().class_count, -1);
  for (std::size_t p = 0; p < port_class.size(); ++p) port_at_class[port_class[p]] = static_cast<int>(p);

  BoundaryLTS lts;
  for (const auto& e : *sub.system.boundary) lts.ports.push_back(e.str());
  const State k_rest = resting_cap(sub, cap);
  const State k_path = path_cap(sub, cap);
  std::vector<bool> counter(model.instance_count());
  for (std::size_t i = 0; i < counter.size(); ++i) counter[i] = model.spec(i).is_counter();
  auto over = [&](const std::vector<State>& v) {
    for (std::size_t i = 0; i < v.size(); ++i)
      if (counter[i] && v[i] > k_rest) return true;
    return false;
  };

  StateTable table;
  std::deque<std::uint32_t> work;
  auto add = [&](const std::vector<State>& v) {
    auto [id, fresh] = table.add(lts, v);
    if (fresh) {
      if (over(v)) lts.frontier[id] = true;
      else work.push_back(id);
    }
    return id;
  };
  for (auto q : sub.encoding.domain(cap)) {
    auto v = sub.encoding.apply(q);
    if (v.size() != model.instance_count()) throw std::invalid_argument("encoding size does not match instance count");
    lts.seeds.push_back(add(v));
  }

  std::uint64_t remaining = options.visit_budget;
  while (!work.empty()) {
    const auto s = work.front();
    work.pop_front();
    for (std::uint32_t p = 0; p < port_class.size(); ++p) {
      reach::Exploration ex(model, k_path, remaining);
      std::vector<std::pair<std::uint32_t, std::vector<State>>> exits;
      ex.run(Configuration{port_class[p], lts.states[s]}, [&](const Configuration& c, std::size_t) {
        if (auto q = port_at_class[c.position]; q >= 0) exits.emplace_back(static_cast<std::uint32_t>(q), c.states);
        return true;
      });
      remaining -= std::min<std::uint64_t>(remaining, ex.stats().explored);
      lts.explored += ex.stats().explored;
      if (ex.budget_exhausted()) {
        lts.budget_exhausted = true;
        lts.frontier[s] = true;
        for (auto w : work) lts.frontier[w] = true;
        finish(lts);
        return lts;
      }
      if (ex.cap_overflow()) lts.path_overflow[s] = true;
      for (const auto& [q, v] : exits) {
        auto d = add(v);
        lts.transitions.push_back({s, p, q, d});
      }
    }
  }
  finish(lts);
  return lts;
}

BoundaryLTS spec_closure_lts(const GadgetSpec& spec, State cap) {
  BoundaryLTS lts;
  lts.ports = spec.locations();
  StateTable table;
  const auto n_loc = static_cast<std::uint32_t>(spec.locations().size());
  std::deque<std::uint32_t> work;
  const State k_path = 2 * cap + 8 + spec.max_increase();
  auto add = [&](State v) {
    auto [id, fresh] = table.add(lts, {v});
    if (fresh) {
      if (spec.is_counter() && v > cap) lts.frontier[id] = true;
      else work.push_back(id);
    }
    return id;
  };
  const State domain = spec.is_counter() ? cap + 1 : spec.states().size();
  for (State q = 0; q < domain; ++q) lts.seeds.push_back(add(q));
  while (!work.empty()) {
    const auto s = work.front();
    work.pop_front();
    const State value = lts.states[s][0];
    for (std::uint32_t p = 0; p < n_loc; ++p) {
      std::set<std::pair<std::uint32_t, State>> seen{{p, value}};
      std::deque<std::pair<std::uint32_t, State>> queue{{p, value}};
      while (!queue.empty()) {
        auto [loc, v] = queue.front();
        queue.pop_front();
        lts.transitions.push_back({s, p, loc, add(v)});
        if (spec.is_counter() && v > k_path) {
          lts.path_overflow[s] = true;
          continue;
        }
        for (const auto& m : spec.moves(v, loc))
          if (seen.insert({m.exit, m.state}).second) queue.emplace_back(m.exit, m.state);
      }
    }
  }
  finish(lts);
  return lts;
}

std::optional<reach::Witness> internal_witness(const Subsystem& sub, State cap, const std::vector<State>& from,
                                               std::uint32_t in, std::uint32_t out, const std::vector<State>& to) {
  Model model(sub.system);
  const auto port_class = boundary_classes(model);
  reach::Exploration ex(model, path_cap(sub, cap), 50'000'000);
  std::optional<std::size_t> found;
  Configuration target{port_class.at(out), to};
  ex.run(Configuration{port_class.at(in), from}, [&](const Configuration& c, std::size_t node) {
    if (c == target) {
      found = node;
      return false;
    }
    return true;
  });
  if (!found) return std::nullopt;
  return ex.path_to(*found);
}

const char* to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::Equivalent: return "Equivalent";
    case Verdict::NotEquivalent: return "NotEquivalent";
    case Verdict::InconclusiveAtCap: return "InconclusiveAtCap";
  }
  return "?";
}

namespace {

using Adjacency = std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>>;  // (label, dst)

Adjacency adjacency(const BoundaryLTS& lts, const std::vector<std::uint32_t>& port_to_spec, std::uint32_t n_ports) {
  Adjacency adj(lts.states.size());
  for (const auto& t : lts.transitions)
    adj[t.src].emplace_back(port_to_spec[t.in] * n_ports + port_to_spec[t.out], t.dst);
  for (auto& a : adj) std::sort(a.begin(), a.end());
  return adj;
}

struct PairGraph {
  std::unordered_map<std::uint64_t, std::uint32_t> id;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  std::vector<bool> assumed;
};

struct RelationResult {
  std::vector<bool> forward;   // impl simulated by spec (or bisimulation)
  std::vector<bool> backward;  // spec simulated by impl
};

class Checker {
 public:
  Checker(const BoundaryLTS& impl, const BoundaryLTS& spec, const Adjacency& ia, const Adjacency& sa,
          bool distrust_overflow)
      : impl_(impl), spec_(spec), ia_(ia), sa_(sa), distrust_overflow_(distrust_overflow) {}

  bool untrusted_impl(std::uint32_t i) const {
    return impl_.frontier[i] || (distrust_overflow_ && impl_.path_overflow[i]);
  }
  bool untrusted_spec(std::uint32_t j) const {
    return spec_.frontier[j] || (distrust_overflow_ && spec_.path_overflow[j]);
  }

  void build(const std::vector<std::pair<std::uint32_t, std::uint32_t>>& seeds) {
    std::deque<std::uint32_t> queue;
    auto add = [&](std::uint32_t i, std::uint32_t j) {
      const std::uint64_t key = (static_cast<std::uint64_t>(i) << 32) | j;
      auto [it, fresh] = g_.id.emplace(key, static_cast<std::uint32_t>(g_.pairs.size()));
      if (fresh) {
        g_.pairs.emplace_back(i, j);
        bool a = untrusted_impl(i) || untrusted_spec(j);
        g_.assumed.push_back(a);
        if (!a) queue.push_back(it->second);
      }
      return it->second;
    };
    for (const auto& [i, j] : seeds) add(i, j);
    while (!queue.empty()) {
      auto [i, j] = g_.pairs[queue.front()];
      queue.pop_front();
      for (const auto& [l, i2] : ia_[i]) {
        auto [lo, hi] = std::equal_range(sa_[j].begin(), sa_[j].end(), std::make_pair(l, 0u),
                                         [](const auto& x, const auto& y) { return x.first < y.first; });
        for (auto it = lo; it != hi; ++it) add(i2, it->second);
      }
    }
  }

  std::uint32_t pair_id(std::uint32_t i, std::uint32_t j) const {
    return g_.id.at((static_cast<std::uint64_t>(i) << 32) | j);
  }

  // Every move of `from_adj[x]` is matched by some move of `to_adj[y]` into a related pair.
  bool matched(const Adjacency& from_adj, std::uint32_t x, const Adjacency& to_adj, std::uint32_t y, bool x_is_impl,
               const std::vector<bool>& rel) const {
    for (const auto& [l, x2] : from_adj[x]) {
      auto [lo, hi] = std::equal_range(to_adj[y].begin(), to_adj[y].end(), std::make_pair(l, 0u),
                                       [](const auto& a, const auto& b) { return a.first < b.first; });
      bool ok = false;
      for (auto it = lo; it != hi && !ok; ++it) {
        auto pid = x_is_impl ? pair_id(x2, it->second) : pair_id(it->second, x2);
        ok = rel[pid];
      }
      if (!ok) return false;
    }
    return true;
  }

  std::vector<bool> fixpoint(bool forward, bool backward) const {
    std::vector<bool> rel(g_.pairs.size(), true);
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::uint32_t p = 0; p < g_.pairs.size(); ++p) {
        if (!rel[p] || g_.assumed[p]) continue;
        auto [i, j] = g_.pairs[p];
        bool ok = (!forward || matched(ia_, i, sa_, j, true, rel)) && (!backward || matched(sa_, j, ia_, i, false, rel));
        if (!ok) {
          rel[p] = false;
          changed = true;
        }
      }
    }
    return rel;
  }

  const PairGraph& graph() const { return g_; }

 private:
  const BoundaryLTS& impl_;
  const BoundaryLTS& spec_;
  const Adjacency& ia_;
  const Adjacency& sa_;
  bool distrust_overflow_;
  PairGraph g_;
};

struct Outcome {
  bool all_seeds_hold = true;
  std::optional<std::size_t> failing_seed;
  std::uint64_t relation_size = 0;
  std::uint64_t assumed = 0;
  std::uint64_t pairs = 0;
};

Outcome run_check(Checker& checker, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& seeds,
                  Relation relation) {
  checker.build(seeds);
  std::vector<bool> a, b;
  if (relation == Relation::Bisimulation) {
    a = checker.fixpoint(true, true);
    b = a;
  } else {
    a = checker.fixpoint(true, false);
    b = checker.fixpoint(false, true);
  }
  Outcome o;
  const auto& g = checker.graph();
  o.pairs = g.pairs.size();
  for (std::size_t p = 0; p < g.pairs.size(); ++p) {
    if (a[p] && b[p]) ++o.relation_size;
    if (g.assumed[p]) ++o.assumed;
  }
  for (std::size_t q = 0; q < seeds.size(); ++q) {
    auto pid = checker.pair_id(seeds[q].first, seeds[q].second);
    if (!(a[pid] && b[pid])) {
      o.all_seeds_hold = false;
      o.failing_seed = q;
      break;
    }
  }
  return o;
}

std::vector<std::uint32_t> step_set(const Adjacency& adj, const std::vector<std::uint32_t>& from, std::uint32_t label) {
  std::vector<std::uint32_t> out;
  for (auto x : from) {
    auto [lo, hi] = std::equal_range(adj[x].begin(), adj[x].end(), std::make_pair(label, 0u),
                                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto it = lo; it != hi; ++it) out.push_back(it->second);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::uint32_t> labels_of(const Adjacency& adj, const std::vector<std::uint32_t>& set) {
  std::vector<std::uint32_t> ls;
  for (auto x : set)
    for (const auto& [l, d] : adj[x]) ls.push_back(l);
  std::sort(ls.begin(), ls.end());
  ls.erase(std::unique(ls.begin(), ls.end()), ls.end());
  return ls;
}

// Shortest label sequence feasible from exactly one of the two seed states.
std::optional<std::pair<std::vector<std::uint32_t>, bool>> trace_difference(const BoundaryLTS& impl,
                                                                            const BoundaryLTS& spec,
                                                                            const Adjacency& ia, const Adjacency& sa,
                                                                            std::uint32_t i0, std::uint32_t j0,
                                                                            std::size_t budget) {
  struct Node {
    std::vector<std::uint32_t> is, js;
    std::size_t parent;
    std::uint32_t label;
  };
  auto trusted = [](const BoundaryLTS& lts, const std::vector<std::uint32_t>& set) {
    for (auto x : set)
      if (lts.frontier[x] || lts.path_overflow[x]) return false;
    return true;
  };
  std::vector<Node> nodes{{{i0}, {j0}, SIZE_MAX, 0}};
  std::set<std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>>> seen{{{i0}, {j0}}};
  auto path = [&](std::size_t n, std::uint32_t last) {
    std::vector<std::uint32_t> labels{last};
    while (nodes[n].parent != SIZE_MAX) {
      labels.push_back(nodes[n].label);
      n = nodes[n].parent;
    }
    std::reverse(labels.begin(), labels.end());
    return labels;
  };
  for (std::size_t k = 0; k < nodes.size() && nodes.size() < budget; ++k) {
    auto is = nodes[k].is;
    auto js = nodes[k].js;
    if (!trusted(impl, is) || !trusted(spec, js)) continue;
    auto ls = labels_of(ia, is);
    auto ls2 = labels_of(sa, js);
    ls.insert(ls.end(), ls2.begin(), ls2.end());
    std::sort(ls.begin(), ls.end());
    ls.erase(std::unique(ls.begin(), ls.end()), ls.end());
    for (auto l : ls) {
      auto ni = step_set(ia, is, l);
      auto nj = step_set(sa, js, l);
      if (ni.empty() != nj.empty()) return std::make_pair(path(k, l), !ni.empty());
      if (seen.insert({ni, nj}).second) nodes.push_back({ni, nj, k, l});
    }
  }
  return std::nullopt;
}

// Path in the pair graph from a seed to a pair where some label has no match at all.
std::vector<std::uint32_t> branching_path(const Checker& checker, const Adjacency& ia, const Adjacency& sa,
                                          std::uint32_t seed_pair, bool& impl_side) {
  const auto& g = checker.graph();
  std::vector<std::size_t> parent(g.pairs.size(), SIZE_MAX);
  std::vector<std::uint32_t> via(g.pairs.size(), 0);
  std::vector<bool> seen(g.pairs.size(), false);
  std::deque<std::uint32_t> q{seed_pair};
  seen[seed_pair] = true;
  while (!q.empty()) {
    auto p = q.front();
    q.pop_front();
    if (g.assumed[p]) continue;
    auto [i, j] = g.pairs[p];
    auto li = labels_of(ia, {i});
    auto lj = labels_of(sa, {j});
    std::vector<std::uint32_t> only;
    std::set_symmetric_difference(li.begin(), li.end(), lj.begin(), lj.end(), std::back_inserter(only));
    if (!only.empty()) {
      impl_side = std::binary_search(li.begin(), li.end(), only.front());
      std::vector<std::uint32_t> labels{only.front()};
      for (std::size_t n = p; parent[n] != SIZE_MAX; n = parent[n]) labels.push_back(via[n]);
      std::reverse(labels.begin(), labels.end());
      return labels;
    }
    for (const auto& [l, i2] : ia[i])
      for (const auto& [l2, j2] : sa[j])
        if (l == l2) {
          auto pid = checker.pair_id(i2, j2);
          if (!seen[pid]) {
            seen[pid] = true;
            parent[pid] = p;
            via[pid] = l;
            q.push_back(pid);
          }
        }
  }
  impl_side = true;
  return {};
}

}  // namespace

BisimReport check_bisimulation(const BoundaryLTS& impl, const BoundaryLTS& spec, const PortMap& port_map,
                               const CheckOptions& options) {
  const auto n_ports = static_cast<std::uint32_t>(spec.ports.size());
  if (impl.ports.size() != spec.ports.size() || port_map.size() != impl.ports.size())
    throw std::invalid_argument("port-map not bijective: sizes differ");
  std::vector<std::uint32_t> to_spec(impl.ports.size(), UINT32_MAX);
  std::vector<bool> used(spec.ports.size(), false);
  for (const auto& [from, to] : port_map) {
    auto i = impl.port_index(from);
    auto s = spec.port_index(to);
    if (!i) throw std::invalid_argument("port-map not bijective: unknown implementation port '" + from + "'");
    if (!s) throw std::invalid_argument("port-map not bijective: unknown spec location '" + to + "'");
    if (to_spec[*i] != UINT32_MAX || used[*s])
      throw std::invalid_argument("port-map not bijective: '" + from + "' -> '" + to + "' repeats a port");
    to_spec[*i] = *s;
    used[*s] = true;
  }
  std::vector<std::uint32_t> identity(n_ports);
  for (std::uint32_t p = 0; p < n_ports; ++p) identity[p] = p;
  const auto ia = adjacency(impl, to_spec, n_ports);
  const auto sa = adjacency(spec, identity, n_ports);

  std::vector<std::pair<std::uint32_t, std::uint32_t>> seeds;
  for (std::size_t q = 0; q < std::min(impl.seeds.size(), spec.seeds.size()); ++q)
    seeds.emplace_back(impl.seeds[q], spec.seeds[q]);

  BisimReport report;
  report.relation = options.relation;
  report.cap = options.cap;
  report.impl_states = impl.states.size();
  report.spec_states = spec.states.size();
  report.path_overflow_states =
      static_cast<std::uint64_t>(std::count(impl.path_overflow.begin(), impl.path_overflow.end(), true));

  Checker optimistic(impl, spec, ia, sa, false);
  auto o = run_check(optimistic, seeds, options.relation);
  report.relation_size = o.relation_size;
  report.product_pairs = o.pairs;
  report.frontier_assumed = o.assumed;

  bool seed_untrusted = impl.budget_exhausted;
  for (const auto& [i, j] : seeds)
    if (impl.frontier[i] || spec.frontier[j]) seed_untrusted = true;

  if (o.all_seeds_hold) {
    if (seed_untrusted) {
      report.verdict = Verdict::InconclusiveAtCap;
      report.note = impl.budget_exhausted ? "visit budget exhausted" : "a seed state lies outside the checked region";
    } else {
      report.verdict = Verdict::Equivalent;
    }
    return report;
  }

  if (report.path_overflow_states > 0) {
    Checker cautious(impl, spec, ia, sa, true);
    if (run_check(cautious, seeds, options.relation).all_seeds_hold) {
      report.verdict = Verdict::InconclusiveAtCap;
      report.note = "mismatch depends on internal paths cut by the path cap";
      return report;
    }
  }
  if (seed_untrusted) {
    report.verdict = Verdict::InconclusiveAtCap;
    report.note = "a seed state lies outside the checked region";
    return report;
  }

  report.verdict = Verdict::NotEquivalent;
  const std::size_t q = *o.failing_seed;
  Counterexample cx;
  cx.spec_state = q;
  auto render = [&](const std::vector<std::uint32_t>& labels) {
    for (auto l : labels) cx.trace.push_back({spec.ports[l / n_ports], spec.ports[l % n_ports]});
  };
  if (auto diff = trace_difference(impl, spec, ia, sa, seeds[q].first, seeds[q].second, options.counterexample_budget)) {
    cx.kind = "trace";
    cx.feasible_in = diff->second ? "impl" : "spec";
    render(diff->first);
  } else {
    bool impl_side = true;
    auto labels = branching_path(optimistic, ia, sa, optimistic.pair_id(seeds[q].first, seeds[q].second), impl_side);
    cx.kind = "branching";
    cx.feasible_in = impl_side ? "impl" : "spec";
    render(labels);
  }
  report.counterexample = std::move(cx);
  return report;
}

BisimReport verify_artifact(const LoweringArtifact& artifact, State cap, std::optional<Relation> relation,
                            const DeriveOptions& options) {
  if (!artifact.spec) throw std::invalid_argument("artifact has no spec to check against");
  const auto sub = subsystem_of(artifact);
  const auto impl = derive_boundary_lts(sub, cap, options);
  const auto spec = spec_closure_lts(*artifact.spec, cap);
  CheckOptions opts;
  opts.relation = relation.value_or(artifact.relation);
  opts.cap = cap;
  auto report = check_bisimulation(impl, spec, artifact.port_map, opts);
  if (report.counterexample && report.counterexample->kind == "trace" && report.counterexample->feasible_in == "impl") {
    auto& cx = *report.counterexample;
    std::map<std::string, std::uint32_t> impl_port_of;
    for (const auto& [from, to] : artifact.port_map) impl_port_of[to] = *impl.port_index(from);
    // Layered search for a concrete impl run of the trace, then backtrack.
    std::vector<std::vector<LtsTransition>> layers;
    std::vector<std::uint32_t> frontier{impl.seeds[cx.spec_state]};
    for (const auto& step : cx.trace) {
      const auto in = impl_port_of.at(step.in), out = impl_port_of.at(step.out);
      std::vector<LtsTransition> layer;
      std::set<std::uint32_t> next;
      for (const auto& t : impl.transitions)
        if (t.in == in && t.out == out && std::binary_search(frontier.begin(), frontier.end(), t.src)) {
          layer.push_back(t);
          next.insert(t.dst);
        }
      layers.push_back(std::move(layer));
      frontier.assign(next.begin(), next.end());
    }
    if (!frontier.empty()) {
      std::vector<LtsTransition> chosen(layers.size());
      std::uint32_t target = frontier.front();
      for (std::size_t k = layers.size(); k-- > 0;) {
        for (const auto& t : layers[k])
          if (t.dst == target) {
            chosen[k] = t;
            break;
          }
        target = chosen[k].src;
      }
      for (const auto& t : chosen) {
        ImplStep st{impl.states[t.src], t.in, t.out, impl.states[t.dst], {}};
        if (auto w = internal_witness(sub, cap, st.from, t.in, t.out, st.to)) st.witness = *w;
        cx.impl_steps.push_back(std::move(st));
      }
    }
  }
  return report;
}

std::string report_to_json(const BisimReport& r, const BoundaryLTS* impl, const Model* model) {
  json j;
  j["verdict"] = to_string(r.verdict);
  j["relation"] = to_string(r.relation);
  j["cap"] = r.cap;
  j["relation_size"] = r.relation_size;
  j["product_pairs"] = r.product_pairs;
  j["frontier_assumed"] = r.frontier_assumed;
  j["path_overflow_states"] = r.path_overflow_states;
  j["impl_states"] = r.impl_states;
  j["spec_states"] = r.spec_states;
  if (!r.note.empty()) j["note"] = r.note;
  if (r.counterexample) {
    const auto& cx = *r.counterexample;
    json c;
    c["kind"] = cx.kind;
    c["feasible_in"] = cx.feasible_in;
    c["spec_state"] = cx.spec_state;
    json trace = json::array();
    for (const auto& s : cx.trace) trace.push_back({{"in", s.in}, {"out", s.out}});
    c["trace"] = trace;
    if (!cx.impl_steps.empty()) {
      json steps = json::array();
      for (const auto& s : cx.impl_steps) {
        json sj;
        sj["from"] = s.from;
        sj["in"] = impl ? json(impl->ports[s.in]) : json(s.in);
        sj["out"] = impl ? json(impl->ports[s.out]) : json(s.out);
        sj["to"] = s.to;
        json w = json::array();
        for (const auto& l : s.witness) {
          if (model) w.push_back(json::parse(reach::label_json_text(*model, l)));
          else w.push_back(json::array({l.instance, l.entry, l.exit, l.before, l.after}));
        }
        sj["witness"] = w;
        steps.push_back(sj);
      }
      c["impl_steps"] = steps;
    }
    j["counterexample"] = c;
  }
  return j.dump(2) + "\n";
}

const char* to_string(SimOp op) {
  switch (op) {
    case SimOp::Inc: return "Inc";
    case SimOp::DecNZ: return "DecNZ";
    case SimOp::PZ: return "PZ";
  }
  return "?";
}

namespace {

struct TunnelCounts {
  std::uint64_t inc = 0, decnz = 0;
  std::uint64_t a = 0, b = 0, c = 0, d = 0;
};

TunnelCounts counts_of(const LoweringArtifact& art, const std::string& role) {
  for (const auto& inst : art.system.instances) {
    if (art.role_of(inst.id) != role) continue;
    const auto* sp = art.system.find_spec(inst.spec);
    TunnelCounts t;
    for (const auto& comp : sp->components()) {
      if (comp.kind.type == gadgets::ComponentType::IncRange) {
        ++t.inc;
        t.a = comp.kind.a;
        t.b = comp.kind.b;
      } else if (comp.kind.type == gadgets::ComponentType::DecNZRange) {
        ++t.decnz;
        t.c = comp.kind.a;
        t.d = comp.kind.b;
      }
    }
    return t;
  }
  throw std::invalid_argument("construction has no instance with role " + role);
}

bool pass_decnz(Interval& g, std::uint64_t tunnels, std::uint64_t c, std::uint64_t d) {
  Interval x = g;
  for (std::uint64_t k = 0; k < tunnels; ++k) {
    if (x.hi < c) return false;
    x.lo = x.lo > d ? x.lo - d : 0;
    x.hi -= c;
  }
  g = x;
  return true;
}

}  // namespace

IntervalReport check_interval_invariant(const LoweringArtifact& construction, const std::vector<SimOp>& ops) {
  const auto t0 = counts_of(construction, "G0");
  const auto t1 = counts_of(construction, "G1");
  IntervalReport rep;
  rep.abcd = t0.a * t0.b * t0.c * t0.d;
  Interval g0, g1;
  std::uint64_t n = 0;
  for (std::size_t k = 0; k < ops.size(); ++k) {
    IntervalStep st;
    st.op = ops[k];
    Interval n0 = g0, n1 = g1;
    switch (ops[k]) {
      case SimOp::Inc:
        st.spec_admits = true;
        st.impl_admits = true;
        n0 = {g0.lo + t0.a * t0.inc, g0.hi + t0.b * t0.inc};
        n1 = {g1.lo + t1.a * t1.inc, g1.hi + t1.b * t1.inc};
        break;
      case SimOp::DecNZ:
        st.spec_admits = n > 0;
        st.impl_admits = pass_decnz(n0, t0.decnz, t0.c, t0.d) && pass_decnz(n1, t1.decnz, t1.c, t1.d);
        break;
      case SimOp::PZ:
        st.spec_admits = n == 0;
        st.impl_admits = g1.lo == 0 && g0.lo == 0;
        n0 = n1 = {0, 0};
        break;
    }
    if (st.impl_admits) {
      g0 = n0;
      g1 = n1;
    }
    if (st.spec_admits) {
      if (ops[k] == SimOp::Inc) ++n;
      else if (ops[k] == SimOp::DecNZ) --n;
    }
    st.n = n;
    st.g0 = g0;
    st.g1 = g1;
    rep.steps.push_back(st);
    if (rep.ok && st.spec_admits != st.impl_admits) {
      rep.ok = false;
      rep.violation_index = k;
      rep.violation = std::string(to_string(ops[k])) + (st.spec_admits ? " admitted by spec but blocked in the simulation"
                                                                        : " blocked by spec but admitted in the simulation");
    } else if (rep.ok && (g0.hi != rep.abcd * n || g1.lo != rep.abcd * n)) {
      rep.ok = false;
      rep.violation_index = k;
      rep.violation = "max(G0)=" + std::to_string(g0.hi) + ", min(G1)=" + std::to_string(g1.lo) +
                      ", abcd*n=" + std::to_string(rep.abcd * n);
    }
  }
  return rep;
}

}  // namespace gadgetforge::verify
