#pragma once

#include "gadgetforge/reach.hpp"

#include <string>

namespace gadgetforge::cli {

// Graphviz text: one cluster per instance with its locations as nodes,
// external nodes at top level, connection edges undirected. Witness steps are
// drawn as numbered red edges from entry to exit location.
std::string to_dot(const gadgets::SystemOfGadgets& system, const reach::Witness& highlight = {});

}  // namespace gadgetforge::cli
