#include "cslow/ast.hpp"

#include <algorithm>
#include <bit>

namespace cslow {

ExprPtr make_literal(uint64_t value, uint32_t width) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Literal;
    e->literal_width = width;
    e->value = width ? (value & width_mask(width)) : value;
    e->width = width ? width : literal_min_width(value);
    return e;
}

ExprPtr make_identifier(std::string name) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Identifier;
    e->name = std::move(name);
    return e;
}

ExprPtr make_unary(UnaryOp op, ExprPtr a) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Unary;
    e->unary_op = op;
    e->operands = {std::move(a)};
    return e;
}

ExprPtr make_binary(BinaryOp op, ExprPtr a, ExprPtr b) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Binary;
    e->binary_op = op;
    e->operands = {std::move(a), std::move(b)};
    return e;
}

ExprPtr make_ternary(ExprPtr c, ExprPtr t, ExprPtr f) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Ternary;
    e->operands = {std::move(c), std::move(t), std::move(f)};
    return e;
}

ExprPtr make_concat(std::vector<ExprPtr> parts) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Concat;
    e->operands = std::move(parts);
    return e;
}

ExprPtr make_bit_select(std::string base, ExprPtr index) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::BitSelect;
    e->name = std::move(base);
    e->operands = {std::move(index)};
    return e;
}

ExprPtr make_part_select(std::string base, uint32_t msb, uint32_t lsb) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::PartSelect;
    e->name = std::move(base);
    e->msb = msb;
    e->lsb = lsb;
    return e;
}

const char* to_string(UnaryOp op) {
    switch (op) {
    case UnaryOp::BitNot: return "~";
    case UnaryOp::LogicNot: return "!";
    case UnaryOp::Negate: return "-";
    case UnaryOp::RedAnd: return "&";
    case UnaryOp::RedOr: return "|";
    case UnaryOp::RedXor: return "^";
    case UnaryOp::RedNand: return "~&";
    case UnaryOp::RedNor: return "~|";
    case UnaryOp::RedXnor: return "~^";
    }
    return "?";
}

const char* to_string(BinaryOp op) {
    switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::And: return "&";
    case BinaryOp::Or: return "|";
    case BinaryOp::Xor: return "^";
    case BinaryOp::Xnor: return "~^";
    case BinaryOp::LogicAnd: return "&&";
    case BinaryOp::LogicOr: return "||";
    case BinaryOp::Eq: return "==";
    case BinaryOp::Ne: return "!=";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::Shl: return "<<";
    case BinaryOp::Shr: return ">>";
    }
    return "?";
}

StmtPtr make_block(std::vector<StmtPtr> body) {
    auto s = std::make_shared<Stmt>();
    s->kind = StmtKind::Block;
    s->body = std::move(body);
    return s;
}

StmtPtr make_if(ExprPtr cond, StmtPtr then_stmt, StmtPtr else_stmt) {
    auto s = std::make_shared<Stmt>();
    s->kind = StmtKind::If;
    s->cond = std::move(cond);
    s->then_stmt = std::move(then_stmt);
    s->else_stmt = std::move(else_stmt);
    return s;
}

StmtPtr make_assign(LValue lhs, ExprPtr rhs, bool nonblocking, bool unit_delay) {
    auto s = std::make_shared<Stmt>();
    s->kind = StmtKind::Assign;
    s->lhs = std::move(lhs);
    s->rhs = std::move(rhs);
    s->nonblocking = nonblocking;
    s->unit_delay = unit_delay;
    return s;
}

// ---------------------------------------------------------------------------

const Port* ModuleDecl::find_port(const std::string& n) const {
    for (const auto& p : ports)
        if (p.name == n)
            return &p;
    return nullptr;
}

const NetDecl* ModuleDecl::find_net(const std::string& n) const {
    for (const auto& item : items)
        if (const auto* d = std::get_if<NetDecl>(&item); d && d->name == n)
            return d;
    return nullptr;
}

const LocalParam* ModuleDecl::find_param(const std::string& n) const {
    for (const auto& item : items)
        if (const auto* d = std::get_if<LocalParam>(&item); d && d->name == n)
            return d;
    return nullptr;
}

uint32_t ModuleDecl::width_of(const std::string& n) const {
    if (const auto* p = find_port(n))
        return p->width;
    if (const auto* d = find_net(n))
        return d->width;
    if (const auto* lp = find_param(n))
        return lp->value ? lp->value->width : 0;
    return 0;
}

bool ModuleDecl::is_declared(const std::string& n) const {
    return find_port(n) || find_net(n) || find_param(n);
}

const ModuleDecl* SourceUnit::find_module(const std::string& name) const {
    for (const auto& m : modules)
        if (m.name == name)
            return &m;
    return nullptr;
}

// ---------------------------------------------------------------------------

uint32_t literal_min_width(uint64_t value) {
    return value == 0 ? 1u : static_cast<uint32_t>(std::bit_width(value));
}

uint64_t width_mask(uint32_t width) {
    if (width >= 64)
        return ~uint64_t{0};
    return (uint64_t{1} << width) - 1;
}

uint32_t ceil_log2(uint64_t n) {
    if (n <= 1)
        return 0;
    return static_cast<uint32_t>(std::bit_width(n - 1));
}

namespace {

uint32_t annotate(Expr& e, const ModuleDecl& m) {
    for (auto& op : e.operands)
        if (op)
            annotate(*op, m);
    auto w = [&](size_t i) { return e.operands[i]->width; };
    switch (e.kind) {
    case ExprKind::Literal:
        e.width = e.literal_width ? e.literal_width : literal_min_width(e.value);
        break;
    case ExprKind::Identifier:
        e.width = m.width_of(e.name);
        break;
    case ExprKind::Unary:
        switch (e.unary_op) {
        case UnaryOp::BitNot:
        case UnaryOp::Negate: e.width = w(0); break;
        default: e.width = 1; break;
        }
        break;
    case ExprKind::Binary:
        switch (e.binary_op) {
        case BinaryOp::Add:
        case BinaryOp::Sub:
        case BinaryOp::And:
        case BinaryOp::Or:
        case BinaryOp::Xor:
        case BinaryOp::Xnor: e.width = std::max(w(0), w(1)); break;
        case BinaryOp::Mul: e.width = w(0) + w(1); break;
        case BinaryOp::Shl:
        case BinaryOp::Shr: e.width = w(0); break;
        default: e.width = 1; break;
        }
        break;
    case ExprKind::Ternary:
        e.width = std::max(w(1), w(2));
        break;
    case ExprKind::Concat: {
        uint32_t total = 0;
        for (const auto& op : e.operands)
            total += op->width;
        e.width = total;
        break;
    }
    case ExprKind::Replicate:
        e.width = e.repeat * w(0);
        break;
    case ExprKind::BitSelect: {
        // memory word read: the word width
        const auto* net = m.find_net(e.name);
        e.width = (net && net->kind == NetKind::Memory) ? net->width : 1;
        break;
    }
    case ExprKind::PartSelect:
        e.width = e.msb >= e.lsb ? e.msb - e.lsb + 1 : 0;
        break;
    }
    return e.width;
}

void annotate_stmt(const StmtPtr& s, const ModuleDecl& m) {
    for_each_stmt(s, [&](Stmt& st) {
        if (st.cond)
            annotate(*st.cond, m);
        if (st.selector)
            annotate(*st.selector, m);
        for (auto& item : st.items)
            for (auto& l : item.labels)
                annotate(*l, m);
        if (st.rhs)
            annotate(*st.rhs, m);
        if (st.lhs.index)
            annotate(*st.lhs.index, m);
    });
}

}  // namespace

void annotate_widths(ModuleDecl& module) {
    for (auto& item : module.items) {
        if (auto* lp = std::get_if<LocalParam>(&item)) {
            if (lp->value)
                annotate(*lp->value, module);
        }
    }
    for (auto& item : module.items) {
        if (auto* a = std::get_if<ContinuousAssign>(&item)) {
            annotate(*a->rhs, module);
        } else if (auto* p = std::get_if<ProcessBlock>(&item)) {
            annotate_stmt(p->body, module);
        } else if (auto* inst = std::get_if<Instance>(&item)) {
            for (auto& c : inst->connections)
                if (c.expr)
                    annotate(*c.expr, module);
        }
    }
}

// ---------------------------------------------------------------------------

namespace {

bool equal_ptr(const ExprPtr& a, const ExprPtr& b) {
    if (!a || !b)
        return !a && !b;
    return equal(*a, *b);
}

bool equal_ptr(const StmtPtr& a, const StmtPtr& b) {
    if (!a || !b)
        return !a && !b;
    return equal(*a, *b);
}

}  // namespace

bool equal(const Expr& a, const Expr& b) {
    if (a.kind != b.kind || a.width != b.width || a.operands.size() != b.operands.size())
        return false;
    switch (a.kind) {
    case ExprKind::Literal:
        if (a.value != b.value || a.literal_width != b.literal_width)
            return false;
        break;
    case ExprKind::Identifier:
        if (a.name != b.name)
            return false;
        break;
    case ExprKind::Unary:
        if (a.unary_op != b.unary_op)
            return false;
        break;
    case ExprKind::Binary:
        if (a.binary_op != b.binary_op)
            return false;
        break;
    case ExprKind::Replicate:
        if (a.repeat != b.repeat)
            return false;
        break;
    case ExprKind::BitSelect:
        if (a.name != b.name)
            return false;
        break;
    case ExprKind::PartSelect:
        if (a.name != b.name || a.msb != b.msb || a.lsb != b.lsb)
            return false;
        break;
    default:
        break;
    }
    for (size_t i = 0; i < a.operands.size(); ++i)
        if (!equal_ptr(a.operands[i], b.operands[i]))
            return false;
    return true;
}

bool equal(const Stmt& a, const Stmt& b) {
    if (a.kind != b.kind)
        return false;
    switch (a.kind) {
    case StmtKind::Block:
        if (a.body.size() != b.body.size())
            return false;
        for (size_t i = 0; i < a.body.size(); ++i)
            if (!equal_ptr(a.body[i], b.body[i]))
                return false;
        return true;
    case StmtKind::If:
        return equal_ptr(a.cond, b.cond) && equal_ptr(a.then_stmt, b.then_stmt) &&
               equal_ptr(a.else_stmt, b.else_stmt);
    case StmtKind::Case:
        if (!equal_ptr(a.selector, b.selector) || a.items.size() != b.items.size())
            return false;
        for (size_t i = 0; i < a.items.size(); ++i) {
            const auto& x = a.items[i];
            const auto& y = b.items[i];
            if (x.labels.size() != y.labels.size() || !equal_ptr(x.body, y.body))
                return false;
            for (size_t j = 0; j < x.labels.size(); ++j)
                if (!equal_ptr(x.labels[j], y.labels[j]))
                    return false;
        }
        return true;
    case StmtKind::Assign:
        return a.lhs.name == b.lhs.name && equal_ptr(a.lhs.index, b.lhs.index) &&
               a.lhs.part == b.lhs.part && equal_ptr(a.rhs, b.rhs) &&
               a.nonblocking == b.nonblocking && a.unit_delay == b.unit_delay;
    }
    return false;
}

namespace {

struct ItemEqual {
    bool operator()(const NetDecl& a, const NetDecl& b) const {
        return a.name == b.name && a.kind == b.kind && a.width == b.width && a.depth == b.depth;
    }
    bool operator()(const LocalParam& a, const LocalParam& b) const {
        return a.name == b.name && equal_ptr(a.value, b.value);
    }
    bool operator()(const ContinuousAssign& a, const ContinuousAssign& b) const {
        return a.target == b.target && equal_ptr(a.rhs, b.rhs);
    }
    bool operator()(const ProcessBlock& a, const ProcessBlock& b) const {
        const auto& x = a.sensitivity;
        const auto& y = b.sensitivity;
        return x.clocked == y.clocked && x.clock == y.clock && x.async_reset == y.async_reset &&
               x.async_reset_active_high == y.async_reset_active_high && equal_ptr(a.body, b.body);
    }
    bool operator()(const Instance& a, const Instance& b) const {
        if (a.module_name != b.module_name || a.instance_name != b.instance_name ||
            a.connections.size() != b.connections.size())
            return false;
        for (size_t i = 0; i < a.connections.size(); ++i)
            if (a.connections[i].port != b.connections[i].port ||
                !equal_ptr(a.connections[i].expr, b.connections[i].expr))
                return false;
        return true;
    }
    template <typename A, typename B>
    bool operator()(const A&, const B&) const {
        return false;
    }
};

}  // namespace

bool equal(const ModuleDecl& a, const ModuleDecl& b) {
    if (a.name != b.name || a.ports.size() != b.ports.size() || a.items.size() != b.items.size())
        return false;
    for (size_t i = 0; i < a.ports.size(); ++i) {
        const auto& x = a.ports[i];
        const auto& y = b.ports[i];
        if (x.name != y.name || x.direction != y.direction || x.width != y.width || x.is_reg != y.is_reg)
            return false;
    }
    for (size_t i = 0; i < a.items.size(); ++i)
        if (!std::visit(ItemEqual{}, a.items[i], b.items[i]))
            return false;
    return true;
}

bool equal(const SourceUnit& a, const SourceUnit& b) {
    if (a.modules.size() != b.modules.size())
        return false;
    for (size_t i = 0; i < a.modules.size(); ++i)
        if (!equal(a.modules[i], b.modules[i]))
            return false;
    return true;
}

ExprPtr clone(const ExprPtr& e) {
    if (!e)
        return nullptr;
    auto c = std::make_shared<Expr>(*e);
    for (auto& op : c->operands)
        op = clone(op);
    return c;
}

StmtPtr clone(const StmtPtr& s) {
    if (!s)
        return nullptr;
    auto c = std::make_shared<Stmt>(*s);
    for (auto& b : c->body)
        b = clone(b);
    c->cond = clone(s->cond);
    c->then_stmt = clone(s->then_stmt);
    c->else_stmt = clone(s->else_stmt);
    c->selector = clone(s->selector);
    for (auto& item : c->items) {
        for (auto& l : item.labels)
            l = clone(l);
        item.body = clone(item.body);
    }
    c->lhs.index = clone(s->lhs.index);
    c->rhs = clone(s->rhs);
    return c;
}

}  // namespace cslow

namespace cslow {

ModuleItem clone(const ModuleItem& item) {
    return std::visit(
        [](const auto& x) -> ModuleItem {
            using T = std::decay_t<decltype(x)>;
            T c = x;
            if constexpr (std::is_same_v<T, LocalParam>) {
                c.value = clone(x.value);
            } else if constexpr (std::is_same_v<T, ContinuousAssign>) {
                c.rhs = clone(x.rhs);
            } else if constexpr (std::is_same_v<T, ProcessBlock>) {
                c.body = clone(x.body);
            } else if constexpr (std::is_same_v<T, Instance>) {
                for (auto& conn : c.connections)
                    conn.expr = clone(conn.expr);
            }
            return c;
        },
        item);
}

void rename_identifiers(const ExprPtr& e, const RenameFn& fn) {
    if (!e)
        return;
    if (e->kind == ExprKind::Identifier || e->kind == ExprKind::BitSelect || e->kind == ExprKind::PartSelect)
        e->name = fn(e->name);
    for (const auto& op : e->operands)
        rename_identifiers(op, fn);
}

void rename_identifiers(const StmtPtr& s, const RenameFn& fn) {
    for_each_stmt(s, [&](Stmt& st) {
        rename_identifiers(st.cond, fn);
        rename_identifiers(st.selector, fn);
        for (auto& item : st.items)
            for (auto& l : item.labels)
                rename_identifiers(l, fn);
        if (st.kind == StmtKind::Assign) {
            st.lhs.name = fn(st.lhs.name);
            rename_identifiers(st.lhs.index, fn);
            rename_identifiers(st.rhs, fn);
        }
    });
}

void rename_identifiers(ModuleItem& item, const RenameFn& fn) {
    std::visit(
        [&](auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, NetDecl>) {
                x.name = fn(x.name);
            } else if constexpr (std::is_same_v<T, LocalParam>) {
                x.name = fn(x.name);
            } else if constexpr (std::is_same_v<T, ContinuousAssign>) {
                x.target = fn(x.target);
                rename_identifiers(x.rhs, fn);
            } else if constexpr (std::is_same_v<T, ProcessBlock>) {
                x.sensitivity.clock = x.sensitivity.clocked ? fn(x.sensitivity.clock) : x.sensitivity.clock;
                if (x.sensitivity.async_reset)
                    x.sensitivity.async_reset = fn(*x.sensitivity.async_reset);
                rename_identifiers(x.body, fn);
            } else if constexpr (std::is_same_v<T, Instance>) {
                for (auto& c : x.connections)
                    rename_identifiers(c.expr, fn);
            }
        },
        item);
}

}  // namespace cslow
