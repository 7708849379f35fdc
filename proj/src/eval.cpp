#include "cslow/eval.hpp"

#include <bit>

namespace cslow {

uint64_t eval_unary(UnaryOp op, uint64_t a, uint32_t wa, uint32_t wres) {
    a &= width_mask(wa);
    const uint64_t full = width_mask(wa);
    uint64_t r = 0;
    switch (op) {
    case UnaryOp::BitNot: r = ~a; break;
    case UnaryOp::LogicNot: r = a == 0; break;
    case UnaryOp::Negate: r = uint64_t{0} - a; break;
    case UnaryOp::RedAnd: r = a == full; break;
    case UnaryOp::RedOr: r = a != 0; break;
    case UnaryOp::RedXor: r = std::popcount(a) & 1; break;
    case UnaryOp::RedNand: r = a != full; break;
    case UnaryOp::RedNor: r = a == 0; break;
    case UnaryOp::RedXnor: r = !(std::popcount(a) & 1); break;
    }
    return r & width_mask(wres);
}

uint64_t eval_binary(BinaryOp op, uint64_t a, uint32_t wa, uint64_t b, uint32_t wb, uint32_t wres) {
    a &= width_mask(wa);
    b &= width_mask(wb);
    uint64_t r = 0;
    switch (op) {
    case BinaryOp::Add: r = a + b; break;
    case BinaryOp::Sub: r = a - b; break;
    case BinaryOp::Mul: r = a * b; break;
    case BinaryOp::And: r = a & b; break;
    case BinaryOp::Or: r = a | b; break;
    case BinaryOp::Xor: r = a ^ b; break;
    case BinaryOp::Xnor: r = ~(a ^ b); break;
    case BinaryOp::LogicAnd: r = (a != 0) && (b != 0); break;
    case BinaryOp::LogicOr: r = (a != 0) || (b != 0); break;
    case BinaryOp::Eq: r = a == b; break;
    case BinaryOp::Ne: r = a != b; break;
    case BinaryOp::Lt: r = a < b; break;
    case BinaryOp::Le: r = a <= b; break;
    case BinaryOp::Gt: r = a > b; break;
    case BinaryOp::Ge: r = a >= b; break;
    case BinaryOp::Shl: r = b >= 64 ? 0 : a << b; break;
    case BinaryOp::Shr: r = b >= 64 ? 0 : a >> b; break;
    }
    return r & width_mask(wres);
}

std::optional<uint64_t> eval_constant(const Expr& e, const ModuleDecl& m) {
    switch (e.kind) {
    case ExprKind::Literal:
        return e.value;
    case ExprKind::Identifier:
        if (const auto* lp = m.find_param(e.name); lp && lp->value)
            return lp->value->value & width_mask(lp->value->width);
        return std::nullopt;
    case ExprKind::Unary: {
        auto a = eval_constant(*e.operands[0], m);
        if (!a)
            return std::nullopt;
        return eval_unary(e.unary_op, *a, e.operands[0]->width, e.width);
    }
    case ExprKind::Binary: {
        auto a = eval_constant(*e.operands[0], m);
        auto b = eval_constant(*e.operands[1], m);
        if (!a || !b)
            return std::nullopt;
        return eval_binary(e.binary_op, *a, e.operands[0]->width, *b, e.operands[1]->width, e.width);
    }
    case ExprKind::Ternary: {
        auto c = eval_constant(*e.operands[0], m);
        if (!c)
            return std::nullopt;
        auto v = eval_constant(*e.operands[*c ? 1 : 2], m);
        if (!v)
            return std::nullopt;
        return *v & width_mask(e.width);
    }
    case ExprKind::Concat: {
        uint64_t r = 0;
        for (const auto& op : e.operands) {
            auto v = eval_constant(*op, m);
            if (!v)
                return std::nullopt;
            r = (op->width >= 64 ? 0 : r << op->width) | (*v & width_mask(op->width));
        }
        return r & width_mask(e.width);
    }
    case ExprKind::Replicate: {
        auto v = eval_constant(*e.operands[0], m);
        if (!v)
            return std::nullopt;
        uint64_t r = 0;
        const uint32_t w = e.operands[0]->width;
        for (uint32_t i = 0; i < e.repeat; ++i)
            r = (w >= 64 ? 0 : r << w) | (*v & width_mask(w));
        return r & width_mask(e.width);
    }
    default:
        return std::nullopt;
    }
}

}  // namespace cslow
