#include "cslow/printer.hpp"

#include <sstream>

namespace cslow {

namespace {

std::string literal_text(const Expr& e) {
    std::ostringstream os;
    if (e.literal_width == 0) {
        if (e.literal_base == 'h')
            os << "'h" << std::hex << e.value;
        else if (e.literal_base == 'b') {
            std::string bits;
            uint64_t v = e.value;
            do {
                bits.insert(bits.begin(), static_cast<char>('0' + (v & 1)));
                v >>= 1;
            } while (v);
            os << "'b" << bits;
        } else
            os << e.value;
        return os.str();
    }
    os << e.literal_width << '\'';
    switch (e.literal_base) {
    case 'h':
        os << 'h' << std::hex << e.value;
        break;
    case 'b': {
        std::string bits;
        for (uint32_t i = e.literal_width; i-- > 0;)
            bits.push_back(static_cast<char>('0' + ((e.value >> i) & 1)));
        os << 'b' << bits;
        break;
    }
    case 'o':
        os << 'o' << std::oct << e.value;
        break;
    default:
        os << 'd' << e.value;
        break;
    }
    return os.str();
}

bool needs_parens(const Expr& e) {
    return e.kind == ExprKind::Binary || e.kind == ExprKind::Ternary || e.kind == ExprKind::Unary;
}

void print(std::ostream& os, const Expr& e, bool top);

void print_child(std::ostream& os, const Expr& e) {
    if (needs_parens(e)) {
        os << '(';
        print(os, e, true);
        os << ')';
    } else {
        print(os, e, true);
    }
}

void print(std::ostream& os, const Expr& e, bool /*top*/) {
    switch (e.kind) {
    case ExprKind::Literal:
        os << literal_text(e);
        break;
    case ExprKind::Identifier:
        os << e.name;
        break;
    case ExprKind::Unary:
        os << to_string(e.unary_op);
        print_child(os, *e.operands[0]);
        break;
    case ExprKind::Binary:
        print_child(os, *e.operands[0]);
        os << ' ' << to_string(e.binary_op) << ' ';
        print_child(os, *e.operands[1]);
        break;
    case ExprKind::Ternary:
        print_child(os, *e.operands[0]);
        os << " ? ";
        print_child(os, *e.operands[1]);
        os << " : ";
        print_child(os, *e.operands[2]);
        break;
    case ExprKind::Concat:
        os << '{';
        for (size_t i = 0; i < e.operands.size(); ++i) {
            if (i)
                os << ", ";
            print(os, *e.operands[i], true);
        }
        os << '}';
        break;
    case ExprKind::Replicate:
        os << '{' << e.repeat << '{';
        print(os, *e.operands[0], true);
        os << "}}";
        break;
    case ExprKind::BitSelect:
        os << e.name << '[';
        print(os, *e.operands[0], true);
        os << ']';
        break;
    case ExprKind::PartSelect:
        os << e.name << '[' << e.msb << ':' << e.lsb << ']';
        break;
    }
}

std::string range(uint32_t width) {
    return width > 1 ? "[" + std::to_string(width - 1) + ":0] " : "";
}

bool dangles(const StmtPtr& s) {
    if (!s || s->kind != StmtKind::If)
        return false;
    return !s->else_stmt || dangles(s->else_stmt);
}

class StmtPrinter {
public:
    explicit StmtPrinter(std::ostream& os) : os_(os) {}

    void stmt(const StmtPtr& s, int indent) {
        switch (s->kind) {
        case StmtKind::Block:
            pad(indent);
            os_ << "begin\n";
            for (const auto& b : s->body)
                stmt(b, indent + 1);
            pad(indent);
            os_ << "end\n";
            break;
        case StmtKind::If: {
            pad(indent);
            if_chain(s, indent);
            break;
        }
        case StmtKind::Case:
            pad(indent);
            os_ << "case (" << print_expr(*s->selector) << ")\n";
            for (const auto& item : s->items) {
                pad(indent + 1);
                if (item.is_default()) {
                    os_ << "default:";
                } else {
                    for (size_t i = 0; i < item.labels.size(); ++i) {
                        if (i)
                            os_ << ", ";
                        os_ << print_expr(*item.labels[i]);
                    }
                    os_ << ':';
                }
                body_after_header(item.body, indent + 1);
            }
            pad(indent);
            os_ << "endcase\n";
            break;
        case StmtKind::Assign:
            pad(indent);
            assign(*s);
            break;
        }
    }

    // Prints a statement that follows a header on the same line (`label:` or `else`).
    void body_after_header(const StmtPtr& s, int indent) {
        if (s->kind == StmtKind::Block) {
            os_ << " begin\n";
            for (const auto& b : s->body)
                stmt(b, indent + 1);
            pad(indent);
            os_ << "end\n";
        } else if (s->kind == StmtKind::Assign) {
            os_ << ' ';
            assign(*s);
        } else {
            os_ << '\n';
            stmt(s, indent + 1);
        }
    }

private:
    void if_chain(const StmtPtr& s, int indent) {
        os_ << "if (" << print_expr(*s->cond) << ")";
        bool wrap = s->else_stmt && dangles(s->then_stmt);
        if (wrap) {
            os_ << " begin\n";
            stmt(s->then_stmt, indent + 1);
            pad(indent);
            os_ << "end\n";
        } else {
            branch(s->then_stmt, indent);
        }
        if (s->else_stmt) {
            pad(indent);
            os_ << "else";
            if (s->else_stmt->kind == StmtKind::If) {
                os_ << ' ';
                if_chain(s->else_stmt, indent);
            } else {
                branch(s->else_stmt, indent);
            }
        }
    }

    void branch(const StmtPtr& s, int indent) {
        if (s->kind == StmtKind::Block) {
            os_ << " begin\n";
            for (const auto& b : s->body)
                stmt(b, indent + 1);
            pad(indent);
            os_ << "end\n";
        } else {
            os_ << '\n';
            stmt(s, indent + 1);
        }
    }

    void assign(const Stmt& s) {
        os_ << s.lhs.name;
        if (s.lhs.index)
            os_ << '[' << print_expr(*s.lhs.index) << ']';
        else if (s.lhs.part)
            os_ << '[' << s.lhs.part->first << ':' << s.lhs.part->second << ']';
        os_ << (s.nonblocking ? " <= " : " = ");
        if (s.unit_delay)
            os_ << "#1 ";
        os_ << print_expr(*s.rhs) << ";\n";
    }

    void pad(int indent) {
        for (int i = 0; i < indent; ++i)
            os_ << "    ";
    }

    std::ostream& os_;
};

struct ItemPrinter {
    std::ostream& os;

    void operator()(const NetDecl& d) const {
        if (d.kind == NetKind::Memory)
            os << "    reg " << range(d.width) << d.name << " [0:" << d.depth - 1 << "];\n";
        else
            os << "    " << (d.kind == NetKind::Reg ? "reg " : "wire ") << range(d.width) << d.name << ";\n";
    }
    void operator()(const LocalParam& lp) const {
        os << "    localparam " << lp.name << " = " << print_expr(*lp.value) << ";\n";
    }
    void operator()(const ContinuousAssign& a) const {
        os << "    assign " << a.target << " = " << print_expr(*a.rhs) << ";\n";
    }
    void operator()(const ProcessBlock& p) const {
        os << "    always ";
        const auto& s = p.sensitivity;
        if (!s.clocked) {
            os << "@*";
        } else {
            os << "@(posedge " << s.clock;
            if (s.async_reset)
                os << " or " << (s.async_reset_active_high ? "posedge " : "negedge ") << *s.async_reset;
            os << ")";
        }
        StmtPrinter sp(os);
        if (p.body->kind == StmtKind::Block) {
            os << " begin\n";
            for (const auto& b : p.body->body)
                sp.stmt(b, 2);
            os << "    end\n";
        } else {
            os << '\n';
            sp.stmt(p.body, 2);
        }
    }
    void operator()(const Instance& inst) const {
        os << "    " << inst.module_name << ' ' << inst.instance_name << " (";
        for (size_t i = 0; i < inst.connections.size(); ++i) {
            os << (i ? ",\n        ." : "\n        .") << inst.connections[i].port << '(';
            if (inst.connections[i].expr)
                os << print_expr(*inst.connections[i].expr);
            os << ')';
        }
        os << (inst.connections.empty() ? ");\n" : "\n    );\n");
    }
};

void dump_expr(std::ostream& os, const Expr& e) {
    os << '(';
    switch (e.kind) {
    case ExprKind::Literal: os << "lit " << e.value << ' ' << e.literal_width; break;
    case ExprKind::Identifier: os << "id " << e.name; break;
    case ExprKind::Unary: os << "unary " << to_string(e.unary_op); break;
    case ExprKind::Binary: os << "binary " << to_string(e.binary_op); break;
    case ExprKind::Ternary: os << "ternary"; break;
    case ExprKind::Concat: os << "concat"; break;
    case ExprKind::Replicate: os << "repl " << e.repeat; break;
    case ExprKind::BitSelect: os << "select " << e.name; break;
    case ExprKind::PartSelect: os << "slice " << e.name << ' ' << e.msb << ' ' << e.lsb; break;
    }
    os << " :w " << e.width;
    for (const auto& op : e.operands) {
        os << ' ';
        dump_expr(os, *op);
    }
    os << ')';
}

void dump_stmt(std::ostream& os, const StmtPtr& s) {
    if (!s) {
        os << "()";
        return;
    }
    switch (s->kind) {
    case StmtKind::Block:
        os << "(block";
        for (const auto& b : s->body) {
            os << ' ';
            dump_stmt(os, b);
        }
        os << ')';
        break;
    case StmtKind::If:
        os << "(if ";
        dump_expr(os, *s->cond);
        os << ' ';
        dump_stmt(os, s->then_stmt);
        os << ' ';
        dump_stmt(os, s->else_stmt);
        os << ')';
        break;
    case StmtKind::Case:
        os << "(case ";
        dump_expr(os, *s->selector);
        for (const auto& item : s->items) {
            os << " (item";
            for (const auto& l : item.labels) {
                os << ' ';
                dump_expr(os, *l);
            }
            os << ' ';
            dump_stmt(os, item.body);
            os << ')';
        }
        os << ')';
        break;
    case StmtKind::Assign:
        os << (s->nonblocking ? "(nba " : "(ba ") << s->lhs.name;
        if (s->lhs.index) {
            os << " [";
            dump_expr(os, *s->lhs.index);
            os << ']';
        }
        if (s->lhs.part)
            os << " [" << s->lhs.part->first << ':' << s->lhs.part->second << ']';
        if (s->unit_delay)
            os << " #1";
        os << ' ';
        dump_expr(os, *s->rhs);
        os << ')';
        break;
    }
}

}  // namespace

std::string print_expr(const Expr& e) {
    std::ostringstream os;
    print(os, e, true);
    return os.str();
}

std::string print_module(const ModuleDecl& m) {
    std::ostringstream os;
    os << "module " << m.name;
    if (m.ports.empty()) {
        os << ";\n";
    } else {
        os << " (\n";
        for (size_t i = 0; i < m.ports.size(); ++i) {
            const auto& p = m.ports[i];
            os << "    " << (p.direction == PortDirection::Input ? "input " : "output ")
               << (p.is_reg ? "reg " : "") << range(p.width) << p.name << (i + 1 < m.ports.size() ? ",\n" : "\n");
        }
        os << ");\n";
    }
    ItemPrinter ip{os};
    for (const auto& item : m.items)
        std::visit(ip, item);
    os << "endmodule\n";
    return os.str();
}

std::string pretty_print(const SourceUnit& unit) {
    std::string out;
    for (size_t i = 0; i < unit.modules.size(); ++i) {
        if (i)
            out += '\n';
        out += print_module(unit.modules[i]);
    }
    return out;
}

std::string dump_ast(const SourceUnit& unit) {
    std::ostringstream os;
    for (const auto& m : unit.modules) {
        os << "(module " << m.name << '\n';
        for (const auto& p : m.ports)
            os << "  (port " << (p.direction == PortDirection::Input ? "in " : "out ") << p.name << ' ' << p.width
               << (p.is_reg ? " reg" : "") << ")\n";
        for (const auto& item : m.items) {
            os << "  ";
            if (const auto* d = std::get_if<NetDecl>(&item)) {
                os << "(net " << d->name << ' '
                   << (d->kind == NetKind::Wire ? "wire" : d->kind == NetKind::Reg ? "reg" : "memory") << ' '
                   << d->width << ' ' << d->depth << ')';
            } else if (const auto* lp = std::get_if<LocalParam>(&item)) {
                os << "(localparam " << lp->name << ' ';
                dump_expr(os, *lp->value);
                os << ')';
            } else if (const auto* a = std::get_if<ContinuousAssign>(&item)) {
                os << "(assign " << a->target << ' ';
                dump_expr(os, *a->rhs);
                os << ')';
            } else if (const auto* p = std::get_if<ProcessBlock>(&item)) {
                os << "(always " << (p->sensitivity.clocked ? "posedge " + p->sensitivity.clock : "*");
                if (p->sensitivity.async_reset)
                    os << " async " << *p->sensitivity.async_reset;
                os << ' ';
                dump_stmt(os, p->body);
                os << ')';
            } else if (const auto* inst = std::get_if<Instance>(&item)) {
                os << "(instance " << inst->module_name << ' ' << inst->instance_name;
                for (const auto& c : inst->connections) {
                    os << " (" << c.port << ' ';
                    if (c.expr)
                        dump_expr(os, *c.expr);
                    os << ')';
                }
                os << ')';
            }
            os << '\n';
        }
        os << ")\n";
    }
    return os.str();
}

}  // namespace cslow
