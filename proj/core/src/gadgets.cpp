#include "gadgetforge/gadgets.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace gadgetforge::gadgets {

const char* to_string(PortRole role) {
  switch (role) {
    case PortRole::In: return "in";
    case PortRole::Out: return "out";
    case PortRole::Zero: return "z";
    case PortRole::NonZero: return "nz";
  }
  return "?";
}

bool ComponentKind::ranged() const {
  return type == ComponentType::IncRange || type == ComponentType::DecNZRange || type == ComponentType::DecRange;
}

bool ComponentKind::is_switch() const {
  return type == ComponentType::JZSwitch || type == ComponentType::JZDecSwitch;
}

std::vector<PortRole> ComponentKind::roles() const {
  if (is_switch()) return {PortRole::In, PortRole::Zero, PortRole::NonZero};
  return {PortRole::In, PortRole::Out};
}

const char* type_name(ComponentType type) {
  switch (type) {
    case ComponentType::IncRange: return "Inc";
    case ComponentType::DecNZRange: return "DecNZ";
    case ComponentType::DecRange: return "Dec";
    case ComponentType::PZ: return "PZ";
    case ComponentType::PNZ: return "PNZ";
    case ComponentType::JZSwitch: return "JZ";
    case ComponentType::JZDecSwitch: return "JZDec";
  }
  return "?";
}

std::optional<ComponentType> parse_type_name(const std::string& name) {
  static const std::map<std::string, ComponentType> table = {
      {"Inc", ComponentType::IncRange}, {"DecNZ", ComponentType::DecNZRange}, {"Dec", ComponentType::DecRange},
      {"PZ", ComponentType::PZ},        {"PNZ", ComponentType::PNZ},          {"JZ", ComponentType::JZSwitch},
      {"JZDec", ComponentType::JZDecSwitch}};
  auto it = table.find(name);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

std::string to_string(const ComponentKind& kind) {
  std::string s = type_name(kind.type);
  if (kind.ranged() && !(kind.a == 1 && kind.b == 1))
    s += "[" + std::to_string(kind.a) + "," + std::to_string(kind.b) + "]";
  return s;
}

void validate(const ComponentKind& kind) {
  if (!kind.ranged()) return;
  if (kind.a < 1) throw std::invalid_argument(to_string(kind) + ": range requires a > 0");
  if (kind.a > kind.b) throw std::invalid_argument(to_string(kind) + ": range requires a <= b");
}

std::vector<ComponentTransition> component_transitions(const ComponentKind& kind, State s) {
  std::vector<ComponentTransition> out;
  using R = PortRole;
  switch (kind.type) {
    case ComponentType::IncRange:
      for (auto i = kind.a; i <= kind.b; ++i) out.push_back({s + i, R::In, R::Out});
      break;
    case ComponentType::DecNZRange:
      for (auto i = kind.a; i <= std::min(s, kind.b); ++i) out.push_back({s - i, R::In, R::Out});
      break;
    case ComponentType::DecRange:
      for (auto i = kind.a; i <= kind.b; ++i) {
        State next = s > i ? s - i : 0;
        if (out.empty() || out.back().state != next) out.push_back({next, R::In, R::Out});
      }
      break;
    case ComponentType::PZ:
      if (s == 0) out.push_back({0, R::In, R::Out});
      break;
    case ComponentType::PNZ:
      if (s > 0) out.push_back({s, R::In, R::Out});
      break;
    case ComponentType::JZSwitch:
      out.push_back({s, R::In, s == 0 ? R::Zero : R::NonZero});
      break;
    case ComponentType::JZDecSwitch:
      if (s == 0) out.push_back({0, R::In, R::Zero});
      else out.push_back({s - 1, R::In, R::NonZero});
      break;
  }
  return out;
}

std::string port_name(const std::string& component, PortRole role) { return component + "." + to_string(role); }

GadgetSpec GadgetSpec::counter(std::string name, std::vector<Component> components, std::vector<MergedPort> merged) {
  GadgetSpec g;
  g.counter_ = true;
  g.name_ = std::move(name);
  g.components_ = std::move(components);
  g.merged_ = std::move(merged);
  g.index_counter();
  return g;
}

void GadgetSpec::index_counter() {
  std::set<std::string> component_names;
  std::vector<std::string> raw;
  for (const auto& c : components_) {
    validate(c.kind);
    if (c.name.empty() || c.name.find('.') != std::string::npos || c.name.find(' ') != std::string::npos)
      throw std::invalid_argument("gadget " + name_ + ": invalid component name '" + c.name + "'");
    if (!component_names.insert(c.name).second)
      throw std::invalid_argument("gadget " + name_ + ": duplicate component '" + c.name + "'");
    for (auto role : c.kind.roles()) raw.push_back(port_name(c.name, role));
  }
  std::map<std::string, std::size_t> merged_of;
  std::set<std::string> location_names(raw.begin(), raw.end());
  for (std::size_t m = 0; m < merged_.size(); ++m) {
    const auto& mp = merged_[m];
    if (mp.ports.size() < 2) throw std::invalid_argument("gadget " + name_ + ": merged port '" + mp.name + "' needs two ports");
    for (const auto& p : mp.ports) {
      if (std::find(raw.begin(), raw.end(), p) == raw.end())
        throw std::invalid_argument("gadget " + name_ + ": merged port '" + mp.name + "' references unknown port '" + p + "'");
      if (!merged_of.emplace(p, m).second)
        throw std::invalid_argument("gadget " + name_ + ": port '" + p + "' merged twice");
    }
  }
  for (const auto& mp : merged_) {
    bool own_member = std::find(mp.ports.begin(), mp.ports.end(), mp.name) != mp.ports.end();
    if (!own_member && location_names.count(mp.name))
      throw std::invalid_argument("gadget " + name_ + ": merged port name '" + mp.name + "' clashes with a port");
    location_names.insert(mp.name);
  }

  locations_.clear();
  aliases_.clear();
  std::map<std::size_t, std::uint32_t> merged_location;
  std::map<std::string, std::uint32_t> location_of_port;
  for (const auto& p : raw) {
    auto it = merged_of.find(p);
    std::uint32_t loc;
    if (it == merged_of.end()) {
      loc = static_cast<std::uint32_t>(locations_.size());
      locations_.push_back(p);
    } else if (auto ml = merged_location.find(it->second); ml != merged_location.end()) {
      loc = ml->second;
    } else {
      loc = static_cast<std::uint32_t>(locations_.size());
      locations_.push_back(merged_[it->second].name);
      merged_location[it->second] = loc;
    }
    location_of_port[p] = loc;
    aliases_.emplace_back(p, loc);
  }
  for (std::size_t i = 0; i < locations_.size(); ++i) aliases_.emplace_back(locations_[i], static_cast<std::uint32_t>(i));

  entry_location_.clear();
  exit_location_.clear();
  for (const auto& c : components_) {
    entry_location_.push_back(location_of_port.at(port_name(c.name, PortRole::In)));
    std::vector<std::pair<PortRole, std::uint32_t>> exits;
    for (auto role : c.kind.roles())
      if (role != PortRole::In) exits.emplace_back(role, location_of_port.at(port_name(c.name, role)));
    exit_location_.push_back(std::move(exits));
  }
}

GadgetSpec GadgetSpec::finite(std::string name, std::vector<std::string> states, std::vector<std::string> locations,
                              std::vector<FiniteTransition> transitions) {
  GadgetSpec g;
  g.counter_ = false;
  g.name_ = std::move(name);
  if (states.empty()) throw std::invalid_argument("gadget " + g.name_ + ": finite gadget needs at least one state");
  std::set<std::string> uniq_states(states.begin(), states.end());
  std::set<std::string> uniq_locs(locations.begin(), locations.end());
  if (uniq_states.size() != states.size()) throw std::invalid_argument("gadget " + g.name_ + ": duplicate state name");
  if (uniq_locs.size() != locations.size()) throw std::invalid_argument("gadget " + g.name_ + ": duplicate location name");
  for (const auto& t : transitions)
    if (t.from_state >= states.size() || t.to_state >= states.size() || t.from_location >= locations.size() ||
        t.to_location >= locations.size())
      throw std::invalid_argument("gadget " + g.name_ + ": transition endpoint out of range");
  g.states_ = std::move(states);
  g.locations_ = std::move(locations);
  g.transitions_ = std::move(transitions);
  for (std::size_t i = 0; i < g.locations_.size(); ++i)
    g.aliases_.emplace_back(g.locations_[i], static_cast<std::uint32_t>(i));
  for (const auto& t : g.transitions_) {
    g.entry_location_.push_back(t.from_location);
    g.exit_location_.push_back({{PortRole::Out, t.to_location}});
  }
  return g;
}

std::optional<std::uint32_t> GadgetSpec::location_index(const std::string& port) const {
  for (const auto& [name, loc] : aliases_)
    if (name == port) return loc;
  return std::nullopt;
}

void GadgetSpec::fire(std::size_t entry, State state, std::vector<Move>& out) const {
  if (!counter_) {
    const auto& t = transitions_[entry];
    if (t.from_state == state) out.push_back({t.to_state, t.to_location});
    return;
  }
  const auto& exits = exit_location_[entry];
  for (const auto& tr : component_transitions(components_[entry].kind, state)) {
    for (const auto& [role, loc] : exits)
      if (role == tr.exit) out.push_back({tr.state, loc});
  }
}

std::vector<Move> GadgetSpec::moves(State state, std::uint32_t location) const {
  std::vector<Move> out;
  for (std::size_t e = 0; e < entry_location_.size(); ++e)
    if (entry_location_[e] == location) fire(e, state, out);
  return out;
}

bool GadgetSpec::valid_state(State state) const { return counter_ || state < states_.size(); }

std::string GadgetSpec::state_name(State state) const {
  if (counter_) return std::to_string(state);
  return state < states_.size() ? states_[state] : "?";
}

std::optional<State> GadgetSpec::state_from_name(const std::string& name) const {
  if (counter_) return std::nullopt;
  auto it = std::find(states_.begin(), states_.end(), name);
  if (it == states_.end()) return std::nullopt;
  return static_cast<State>(it - states_.begin());
}

std::uint64_t GadgetSpec::max_increase() const {
  std::uint64_t m = 0;
  for (const auto& c : components_)
    if (c.kind.type == ComponentType::IncRange) m = std::max(m, c.kind.b);
  return m;
}

std::uint32_t GadgetSpec::port_location(std::size_t component, PortRole role) const {
  if (role == PortRole::In) return entry_location_.at(component);
  for (const auto& [r, loc] : exit_location_.at(component))
    if (r == role) return loc;
  throw std::invalid_argument("component has no port " + std::string(to_string(role)));
}

bool GadgetSpec::operator==(const GadgetSpec& other) const {
  return counter_ == other.counter_ && name_ == other.name_ && components_ == other.components_ &&
         merged_ == other.merged_ && states_ == other.states_ && locations_ == other.locations_ &&
         transitions_ == other.transitions_;
}

GadgetSpec inc_dec_jz() {
  return GadgetSpec::counter("inc-dec-jz", {{"inc", ComponentKind::inc()},
                                            {"dec", ComponentKind::dec()},
                                            {"jz", ComponentKind::jz()}});
}

GadgetSpec inc_jzdec() {
  return GadgetSpec::counter("inc-jzdec", {{"inc", ComponentKind::inc()}, {"jzdec", ComponentKind::jzdec()}});
}

GadgetSpec inc_decnz_pz() {
  return GadgetSpec::counter("inc-decnz-pz", {{"inc", ComponentKind::inc()},
                                              {"decnz", ComponentKind::decnz()},
                                              {"pz", ComponentKind::pz()}});
}

GadgetSpec inc_decnz_decnz() {
  return GadgetSpec::counter("inc-decnz-decnz", {{"inc", ComponentKind::inc()},
                                                 {"dec0", ComponentKind::decnz()},
                                                 {"dec1", ComponentKind::decnz()}});
}

GadgetSpec sscd() {
  return GadgetSpec::finite("sscd", {"1", "2"}, {"L1", "R1", "L2", "R2"},
                            {{0, 0, 1, 1}, {1, 2, 0, 3}});
}

GadgetSpec incab_decnzcd_pz(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d,
                            std::size_t inc_tunnels, std::size_t decnz_tunnels) {
  if (inc_tunnels < 1 || decnz_tunnels < 1) throw std::invalid_argument("tunnel multiplicities must be >= 1");
  std::vector<Component> comps;
  auto push = [&](const std::string& base, std::size_t count, ComponentKind kind) {
    if (count == 1) comps.push_back({base, kind});
    else
      for (std::size_t i = 0; i < count; ++i) comps.push_back({base + std::to_string(i), kind});
  };
  push("inc", inc_tunnels, ComponentKind::inc(a, b));
  push("decnz", decnz_tunnels, ComponentKind::decnz(c, d));
  comps.push_back({"pz", ComponentKind::pz()});
  std::ostringstream name;
  name << "inc-ab-decnz-cd-pz:" << a << ',' << b << ',' << c << ',' << d;
  if (inc_tunnels != 1 || decnz_tunnels != 1) name << ":x" << inc_tunnels << ',' << decnz_tunnels;
  return GadgetSpec::counter(name.str(), std::move(comps));
}

GadgetSpec standard_spec(const std::string& name) {
  if (name == "inc-dec-jz") return inc_dec_jz();
  if (name == "inc-jzdec") return inc_jzdec();
  if (name == "inc-decnz-pz") return inc_decnz_pz();
  if (name == "inc-decnz-decnz") return inc_decnz_decnz();
  if (name == "sscd") return sscd();
  const std::string prefix = "inc-ab-decnz-cd-pz:";
  if (name.rfind(prefix, 0) == 0) {
    auto numbers = [&](const std::string& text) {
      std::vector<std::uint64_t> v;
      std::istringstream in(text);
      std::string part;
      while (std::getline(in, part, ',')) {
        try {
          std::size_t used = 0;
          v.push_back(std::stoull(part, &used));
          if (used != part.size()) throw std::invalid_argument(part);
        } catch (const std::exception&) {
          throw std::invalid_argument("malformed range list in spec name '" + name + "'");
        }
      }
      return v;
    };
    std::string rest = name.substr(prefix.size());
    std::vector<std::uint64_t> mult{1, 1};
    if (auto x = rest.find(":x"); x != std::string::npos) {
      mult = numbers(rest.substr(x + 2));
      rest.erase(x);
      if (mult.size() != 2) throw std::invalid_argument("spec '" + name + "' needs two tunnel multiplicities");
    }
    const auto v = numbers(rest);
    if (v.size() != 4) throw std::invalid_argument("spec '" + name + "' needs four range parameters");
    return incab_decnzcd_pz(v[0], v[1], v[2], v[3], mult[0], mult[1]);
  }
  throw std::invalid_argument("unknown spec '" + name + "'");
}

}  // namespace gadgetforge::gadgets
