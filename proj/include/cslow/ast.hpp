#pragma once

#include "cslow/diagnostics.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace cslow {

// -----------------------------------------------------------------------------
// Expressions
//
// Width rules of the subset (self-determined, unsigned, zero-extension):
//   literal          sized: declared size; unsized: minimal bits (>= 1)
//   identifier       declared width (localparam: width of its literal)
//   ~ / unary -      operand width
//   ! && || compare  1
//   reductions       1
//   + - & | ^ ~^     max(operand widths)
//   *                sum of operand widths
//   << >>            left operand width
//   c ? a : b        max(width a, width b)
//   {a, b}           sum;  {n{a}} n * width a
//   a[i]             1;    a[m:l] m - l + 1
// All widths are capped at 64 bits by subset_check.
// -----------------------------------------------------------------------------

enum class ExprKind { Literal, Identifier, Unary, Binary, Ternary, Concat, Replicate, BitSelect, PartSelect };

enum class UnaryOp { BitNot, LogicNot, Negate, RedAnd, RedOr, RedXor, RedNand, RedNor, RedXnor };

enum class BinaryOp {
    Add, Sub, Mul,
    And, Or, Xor, Xnor,
    LogicAnd, LogicOr,
    Eq, Ne, Lt, Le, Gt, Ge,
    Shl, Shr
};

struct Expr;
using ExprPtr = std::shared_ptr<Expr>;

struct Expr {
    ExprKind kind = ExprKind::Literal;
    Span span;
    uint32_t width = 0;  // computed by annotate_widths

    // Literal
    uint64_t value = 0;
    uint32_t literal_width = 0;  // 0 for unsized
    char literal_base = 'd';

    // Identifier, BitSelect/PartSelect base
    std::string name;

    UnaryOp unary_op = UnaryOp::BitNot;
    BinaryOp binary_op = BinaryOp::Add;

    // Unary: [a]; Binary: [a, b]; Ternary: [c, t, e]; Concat: parts;
    // Replicate: [a]; BitSelect: [index]
    std::vector<ExprPtr> operands;

    uint32_t repeat = 1;  // Replicate
    uint32_t msb = 0;     // PartSelect
    uint32_t lsb = 0;
};

ExprPtr make_literal(uint64_t value, uint32_t width);
ExprPtr make_identifier(std::string name);
ExprPtr make_unary(UnaryOp op, ExprPtr a);
ExprPtr make_binary(BinaryOp op, ExprPtr a, ExprPtr b);
ExprPtr make_ternary(ExprPtr c, ExprPtr t, ExprPtr e);
ExprPtr make_concat(std::vector<ExprPtr> parts);
ExprPtr make_bit_select(std::string base, ExprPtr index);
ExprPtr make_part_select(std::string base, uint32_t msb, uint32_t lsb);

const char* to_string(UnaryOp op);
const char* to_string(BinaryOp op);

// -----------------------------------------------------------------------------
// Statements
// -----------------------------------------------------------------------------

struct Stmt;
using StmtPtr = std::shared_ptr<Stmt>;

enum class StmtKind { Block, If, Case, Assign };

// Assignment target: `name`, `name[index]` (bit or memory word) or `name[m:l]`.
struct LValue {
    std::string name;
    ExprPtr index;
    std::optional<std::pair<uint32_t, uint32_t>> part;
    Span span;
};

struct CaseItem {
    std::vector<ExprPtr> labels;  // empty for default
    StmtPtr body;
    bool is_default() const { return labels.empty(); }
};

struct Stmt {
    StmtKind kind = StmtKind::Block;
    Span span;

    std::vector<StmtPtr> body;  // Block

    ExprPtr cond;  // If
    StmtPtr then_stmt;
    StmtPtr else_stmt;

    ExprPtr selector;  // Case
    std::vector<CaseItem> items;

    LValue lhs;  // Assign
    ExprPtr rhs;
    bool nonblocking = false;
    bool unit_delay = false;  // `<= #1`
};

StmtPtr make_block(std::vector<StmtPtr> body);
StmtPtr make_if(ExprPtr cond, StmtPtr then_stmt, StmtPtr else_stmt);
StmtPtr make_assign(LValue lhs, ExprPtr rhs, bool nonblocking, bool unit_delay = false);

// -----------------------------------------------------------------------------
// Module items
// -----------------------------------------------------------------------------

enum class PortDirection { Input, Output };
enum class NetKind { Wire, Reg, Memory };

struct Port {
    std::string name;
    PortDirection direction = PortDirection::Input;
    uint32_t width = 1;
    bool is_reg = false;
    Span span;
};

struct NetDecl {
    std::string name;
    NetKind kind = NetKind::Wire;
    uint32_t width = 1;
    uint32_t depth = 1;  // memories only
    Span span;
};

struct LocalParam {
    std::string name;
    ExprPtr value;  // literal
    Span span;
};

struct ContinuousAssign {
    std::string target;
    ExprPtr rhs;
    Span span;
};

struct Sensitivity {
    bool clocked = false;
    std::string clock;
    std::optional<std::string> async_reset;
    bool async_reset_active_high = true;
};

struct ProcessBlock {
    Sensitivity sensitivity;
    StmtPtr body;
    Span span;
};

struct Connection {
    std::string port;
    ExprPtr expr;  // may be null for `.p()`
};

struct Instance {
    std::string module_name;
    std::string instance_name;
    std::vector<Connection> connections;
    Span span;
};

using ModuleItem = std::variant<NetDecl, LocalParam, ContinuousAssign, ProcessBlock, Instance>;

struct ModuleDecl {
    std::string name;
    std::vector<Port> ports;
    std::vector<ModuleItem> items;  // declaration order preserved
    Span span;

    const Port* find_port(const std::string& n) const;
    const NetDecl* find_net(const std::string& n) const;
    const LocalParam* find_param(const std::string& n) const;
    // Declared width of a port or net, 0 when undeclared.
    uint32_t width_of(const std::string& n) const;
    bool is_declared(const std::string& n) const;
};

struct SourceUnit {
    std::vector<ModuleDecl> modules;
    std::string source_text;
    std::string file_name;

    const ModuleDecl* find_module(const std::string& name) const;
};

// Recomputes every Expr::width of a module in place (undeclared identifiers get 0).
void annotate_widths(ModuleDecl& module);
uint32_t literal_min_width(uint64_t value);
uint64_t width_mask(uint32_t width);
uint32_t ceil_log2(uint64_t n);

// Structural equality, ignoring spans.
bool equal(const Expr& a, const Expr& b);
bool equal(const Stmt& a, const Stmt& b);
bool equal(const ModuleDecl& a, const ModuleDecl& b);
bool equal(const SourceUnit& a, const SourceUnit& b);

ExprPtr clone(const ExprPtr& e);
StmtPtr clone(const StmtPtr& s);
ModuleItem clone(const ModuleItem& item);

using RenameFn = std::function<std::string(const std::string&)>;

// Renames every identifier occurrence (references, select bases, assignment
// targets, declarations, clocks) of an item in place. The item must not share
// expression nodes with other items (clone first).
void rename_identifiers(ModuleItem& item, const RenameFn& fn);
void rename_identifiers(const ExprPtr& e, const RenameFn& fn);
void rename_identifiers(const StmtPtr& s, const RenameFn& fn);

// Visits every expression (pre-order) of a statement tree, including lvalue indices.
template <typename F>
void for_each_expr(const ExprPtr& e, F&& f) {
    if (!e)
        return;
    f(*e);
    for (const auto& op : e->operands)
        for_each_expr(op, f);
}

template <typename F>
void for_each_stmt(const StmtPtr& s, F&& f) {
    if (!s)
        return;
    f(*s);
    switch (s->kind) {
    case StmtKind::Block:
        for (const auto& b : s->body)
            for_each_stmt(b, f);
        break;
    case StmtKind::If:
        for_each_stmt(s->then_stmt, f);
        for_each_stmt(s->else_stmt, f);
        break;
    case StmtKind::Case:
        for (const auto& item : s->items)
            for_each_stmt(item.body, f);
        break;
    case StmtKind::Assign:
        break;
    }
}

}  // namespace cslow
