#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gadgetforge::gadgets {

using State = std::uint64_t;

enum class ComponentType { IncRange, DecNZRange, DecRange, PZ, PNZ, JZSwitch, JZDecSwitch };

enum class PortRole : std::uint8_t { In, Out, Zero, NonZero };
const char* to_string(PortRole role);

struct ComponentKind {
  ComponentType type = ComponentType::IncRange;
  std::uint64_t a = 1;
  std::uint64_t b = 1;

  static ComponentKind inc(std::uint64_t a = 1, std::uint64_t b = 1) { return {ComponentType::IncRange, a, b}; }
  static ComponentKind decnz(std::uint64_t a = 1, std::uint64_t b = 1) { return {ComponentType::DecNZRange, a, b}; }
  static ComponentKind dec(std::uint64_t a = 1, std::uint64_t b = 1) { return {ComponentType::DecRange, a, b}; }
  static ComponentKind pz() { return {ComponentType::PZ, 1, 1}; }
  static ComponentKind pnz() { return {ComponentType::PNZ, 1, 1}; }
  static ComponentKind jz() { return {ComponentType::JZSwitch, 1, 1}; }
  static ComponentKind jzdec() { return {ComponentType::JZDecSwitch, 1, 1}; }

  bool ranged() const;
  bool is_switch() const;
  std::vector<PortRole> roles() const;
  bool operator==(const ComponentKind&) const = default;
};

std::string to_string(const ComponentKind& kind);
const char* type_name(ComponentType type);
std::optional<ComponentType> parse_type_name(const std::string& name);
// Throws std::invalid_argument unless 1 <= a <= b for ranged kinds.
void validate(const ComponentKind& kind);

struct ComponentTransition {
  State state;
  PortRole entry;
  PortRole exit;
  bool operator==(const ComponentTransition&) const = default;
};

// Enumerated in ascending order of the chosen amount i.
std::vector<ComponentTransition> component_transitions(const ComponentKind& kind, State state);

struct Component {
  std::string name;
  ComponentKind kind;
  bool operator==(const Component&) const = default;
};

struct MergedPort {
  std::string name;
  std::vector<std::string> ports;
  bool operator==(const MergedPort&) const = default;
};

struct FiniteTransition {
  std::uint32_t from_state;
  std::uint32_t from_location;
  std::uint32_t to_state;
  std::uint32_t to_location;
  bool operator==(const FiniteTransition&) const = default;
};

struct Move {
  State state;
  std::uint32_t exit;
};

// A counter gadget (one natural state shared by a list of components) or a
// finite gadget (Q, L, T). Both expose locations and entries; an entry is a
// component for counter gadgets and a listed transition for finite ones.
class GadgetSpec {
 public:
  static GadgetSpec counter(std::string name, std::vector<Component> components, std::vector<MergedPort> merged = {});
  static GadgetSpec finite(std::string name, std::vector<std::string> states, std::vector<std::string> locations,
                           std::vector<FiniteTransition> transitions);

  bool is_counter() const { return counter_; }
  const std::string& name() const { return name_; }
  const std::vector<std::string>& locations() const { return locations_; }
  std::optional<std::uint32_t> location_index(const std::string& port) const;

  std::size_t entry_count() const { return entry_location_.size(); }
  std::uint32_t entry_location(std::size_t entry) const { return entry_location_[entry]; }
  void fire(std::size_t entry, State state, std::vector<Move>& out) const;

  // All moves from a location, in entry order then choice order.
  std::vector<Move> moves(State state, std::uint32_t location) const;

  bool valid_state(State state) const;
  std::string state_name(State state) const;
  std::optional<State> state_from_name(const std::string& name) const;
  // Largest amount a single traversal can add to the state (0 for finite gadgets).
  std::uint64_t max_increase() const;

  const std::vector<Component>& components() const { return components_; }
  const std::vector<MergedPort>& merged() const { return merged_; }
  const std::vector<std::string>& states() const { return states_; }
  const std::vector<FiniteTransition>& transitions() const { return transitions_; }
  // Location of a component port (counter gadgets only).
  std::uint32_t port_location(std::size_t component, PortRole role) const;

  bool operator==(const GadgetSpec& other) const;

 private:
  void index_counter();

  bool counter_ = true;
  std::string name_;
  std::vector<Component> components_;
  std::vector<MergedPort> merged_;
  std::vector<std::string> states_;
  std::vector<FiniteTransition> transitions_;

  std::vector<std::string> locations_;
  std::vector<std::pair<std::string, std::uint32_t>> aliases_;
  std::vector<std::uint32_t> entry_location_;
  std::vector<std::vector<std::pair<PortRole, std::uint32_t>>> exit_location_;
};

std::string port_name(const std::string& component, PortRole role);

// Shipped specs. Port names: "<component>.in", "<component>.out", and
// "<component>.z" / "<component>.nz" for switches.
GadgetSpec inc_dec_jz();
GadgetSpec inc_jzdec();
GadgetSpec inc_decnz_pz();
GadgetSpec inc_decnz_decnz();
GadgetSpec sscd();
// Inc[a,b]-DecNZ[c,d]-PZ with the given tunnel multiplicities. With single
// tunnels the components are named inc/decnz/pz, otherwise inc0.., decnz0...
GadgetSpec incab_decnzcd_pz(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d,
                            std::size_t inc_tunnels = 1, std::size_t decnz_tunnels = 1);
// Names: inc-dec-jz, inc-jzdec, inc-decnz-pz, inc-decnz-decnz, sscd,
// inc-ab-decnz-cd-pz:A,B,C,D. Throws std::invalid_argument for unknown names.
GadgetSpec standard_spec(const std::string& name);

}  // namespace gadgetforge::gadgets
