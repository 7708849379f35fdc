#pragma once

#include "cslow/ast.hpp"

#include <set>
#include <string>
#include <vector>

namespace cslow {

// Returns an empty list iff every module of the unit is inside the supported subset:
// declared identifiers, one driver per net, single clock per module, synchronous
// reset only, non-blocking assignments in clocked processes, blocking ones in
// combinational processes, no latches, no combinational cycles, widths <= 64 and
// memories accessed through one synchronous read and one write port.
std::vector<Diagnostic> subset_check(const SourceUnit& unit);
std::vector<Diagnostic> subset_check(const ModuleDecl& module);

// `clk_sp<n>`: clock of the n-th SP stage, a phase of the main clock domain.
bool is_stage_clock(const std::string& name);

// Names used as clocks in `posedge` sensitivities.
std::set<std::string> clock_names(const ModuleDecl& module);

// Replaces every instance in `top` (recursively) by its prefixed body. The result
// has no instances; instance-internal names become `<inst>__<name>`.
ModuleDecl flatten(const SourceUnit& unit, const std::string& top);

}  // namespace cslow
