#pragma once

#include "cslow/ast.hpp"

#include <cstdint>
#include <optional>

namespace cslow {

// Two-valued operator semantics shared by constant folding and the simulator.
// Operands are zero-extended; the result is masked to `wres` bits.
uint64_t eval_unary(UnaryOp op, uint64_t a, uint32_t wa, uint32_t wres);
uint64_t eval_binary(BinaryOp op, uint64_t a, uint32_t wa, uint64_t b, uint32_t wb, uint32_t wres);

// Value of a constant expression (literals and localparams only); nullopt otherwise.
std::optional<uint64_t> eval_constant(const Expr& e, const ModuleDecl& m);

}  // namespace cslow
