#pragma once

#include "gadgetforge/artifact.hpp"
#include "gadgetforge/machine.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gadgetforge::lower {

enum class FlowMode { Primitive, Expanded };
enum class DuplicatorMode { Direct, ViaDuplicators };

struct Range {
  std::uint64_t a = 1, b = 1, c = 1, d = 1;
};
// Throws std::invalid_argument citing the violated requirement.
void check_range(const Range& r);
Range parse_range(const std::string& text);

std::string counter_instance(const std::string& counter);
std::string instruction_instance(std::size_t index);

LoweringArtifact compile_machine_to_incdecjz(const machine::Program& program,
                                             const std::vector<machine::Natural>& initial = {},
                                             FlowMode flow = FlowMode::Primitive);

LoweringArtifact build_inc_decnz_decnz();
LoweringArtifact sim_incdecjz_via_incjzdec();
LoweringArtifact sim_incjzdec_via_incdecnzpz();
LoweringArtifact build_sscd_from_incdecnz();
// Boundary In0, Out0, In1, Out1 plus e0/e1, where the duplicated tunnel attaches.
LoweringArtifact build_edge_duplicator(const Range& r);
// The duplicator around the DecNZ (or Inc) tunnel of one Inc[a,b]-DecNZ[c,d]-PZ
// gadget, checked against the same gadget with that tunnel doubled.
LoweringArtifact edge_duplicator_harness(const Range& r, bool duplicate_inc = false);
LoweringArtifact sim_incdecnzpz_via_incab(const Range& r, DuplicatorMode mode = DuplicatorMode::Direct);

// Replaces every instance whose spec equals inner.spec by a copy of inner,
// renaming its instances and nodes to "<id>/<name>".
LoweringArtifact substitute(const LoweringArtifact& outer, const LoweringArtifact& inner);

struct Fragment {
  std::vector<std::string> counters;  // value counters c0.. then helper counters
  std::vector<machine::Instruction> instructions;  // jump targets may equal size(): fall through
};
Fragment emit_initializer(const std::vector<machine::Natural>& values);
machine::Program with_halt(const Fragment& fragment);
// Prepends an initializer for the program's counters (in declaration order).
machine::Program prepend_initializer(const machine::Program& program, const std::vector<machine::Natural>& values);

enum class Target { IncDecJZ, IncJZDec, IncDecNZPZ, IncAB };
Target parse_target(const std::string& name);
const char* to_string(Target target);

LoweringArtifact pipeline(const machine::Program& program, const std::vector<machine::Natural>& initial,
                          Target target, const Range& range = {});

}  // namespace gadgetforge::lower
