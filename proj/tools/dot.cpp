#include "dot.hpp"

#include <sstream>

namespace gadgetforge::cli {

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string node_id(const gadgets::Endpoint& e) { return quote(e.str()); }

}  // namespace

std::string to_dot(const gadgets::SystemOfGadgets& system, const reach::Witness& highlight) {
  std::ostringstream o;
  o << "graph system {\n";
  o << "  compound=true;\n  node [shape=point];\n";
  const auto start = system.start.str();
  const auto goal = system.goal.str();
  for (const auto& n : system.nodes) {
    const auto id = gadgets::Endpoint::external(n).str();
    o << "  " << quote(id) << " [shape=circle, label=" << quote(n);
    if (id == start) o << ", style=filled, fillcolor=palegreen";
    else if (id == goal) o << ", style=filled, fillcolor=gold";
    o << "];\n";
  }
  for (std::size_t i = 0; i < system.instances.size(); ++i) {
    const auto& inst = system.instances[i];
    const auto* spec = system.find_spec(inst.spec);
    o << "  subgraph " << quote("cluster_" + inst.id) << " {\n";
    o << "    label=" << quote(inst.id + " : " + inst.spec + " @ " + spec->state_name(inst.initial)) << ";\n";
    for (const auto& loc : spec->locations())
      o << "    " << node_id(gadgets::Endpoint::at(inst.id, loc)) << " [shape=box, label=" << quote(loc) << "];\n";
    o << "  }\n";
  }
  for (const auto& e : system.edges) {
    auto canon = [&](const gadgets::Endpoint& x) {
      if (x.is_node()) return x;
      const auto* spec = system.find_spec(system.instances[*system.instance_index(x.instance)].spec);
      return gadgets::Endpoint::at(x.instance, spec->locations()[*spec->location_index(x.port)]);
    };
    o << "  " << node_id(canon(e.a)) << " -- " << node_id(canon(e.b)) << ";\n";
  }
  for (std::size_t k = 0; k < highlight.size(); ++k) {
    const auto& l = highlight[k];
    const auto& inst = system.instances.at(l.instance);
    const auto* spec = system.find_spec(inst.spec);
    o << "  " << node_id(gadgets::Endpoint::at(inst.id, spec->locations()[l.entry])) << " -- "
      << node_id(gadgets::Endpoint::at(inst.id, spec->locations()[l.exit])) << " [color=red, penwidth=2, label="
      << quote(std::to_string(k + 1)) << "];\n";
  }
  o << "}\n";
  return o.str();
}

}  // namespace gadgetforge::cli
