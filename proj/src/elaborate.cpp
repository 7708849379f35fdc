#include "cslow/eval.hpp"
#include "cslow/graph.hpp"
#include "cslow/subset.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace cslow {

namespace {

struct PathTerm {
    enum Kind { Cond, CaseMatch, CaseDefault } kind = Cond;
    Value v;
    bool polarity = true;
    std::vector<uint64_t> labels;
};

struct MemWrite {
    Value enable, addr, data;
    Span span;
};

struct Ctx {
    bool comb = false;
    std::set<std::string> targets;
    std::map<std::string, Value> env;
    std::vector<PathTerm> path;
    std::map<std::string, MemWrite> mem_writes;
    std::map<std::string, Value> mem_reads;  // read-data register -> address
};

Value constant(uint64_t v, uint32_t w) {
    Value r;
    r.is_const = true;
    r.width = w;
    r.value = v & width_mask(w);
    return r;
}

bool same_value(const Value& a, const Value& b) {
    if (a.is_const != b.is_const || a.width != b.width)
        return false;
    return a.is_const ? a.value == b.value : a.src == b.src;
}

Opcode unary_opcode(UnaryOp op) {
    switch (op) {
    case UnaryOp::BitNot: return Opcode::Not;
    case UnaryOp::LogicNot: return Opcode::LogicNot;
    case UnaryOp::Negate: return Opcode::Neg;
    case UnaryOp::RedAnd: return Opcode::RedAnd;
    case UnaryOp::RedOr: return Opcode::RedOr;
    case UnaryOp::RedXor: return Opcode::RedXor;
    case UnaryOp::RedNand: return Opcode::RedNand;
    case UnaryOp::RedNor: return Opcode::RedNor;
    case UnaryOp::RedXnor: return Opcode::RedXnor;
    }
    return Opcode::Not;
}

Opcode binary_opcode(BinaryOp op) {
    switch (op) {
    case BinaryOp::Add: return Opcode::Add;
    case BinaryOp::Sub: return Opcode::Sub;
    case BinaryOp::Mul: return Opcode::Mul;
    case BinaryOp::And: return Opcode::And;
    case BinaryOp::Or: return Opcode::Or;
    case BinaryOp::Xor: return Opcode::Xor;
    case BinaryOp::Xnor: return Opcode::Xnor;
    case BinaryOp::LogicAnd: return Opcode::LogicAnd;
    case BinaryOp::LogicOr: return Opcode::LogicOr;
    case BinaryOp::Eq: return Opcode::Eq;
    case BinaryOp::Ne: return Opcode::Ne;
    case BinaryOp::Lt: return Opcode::Lt;
    case BinaryOp::Le: return Opcode::Le;
    case BinaryOp::Gt: return Opcode::Gt;
    case BinaryOp::Ge: return Opcode::Ge;
    case BinaryOp::Shl: return Opcode::Shl;
    case BinaryOp::Shr: return Opcode::Shr;
    }
    return Opcode::Add;
}

class Elaborator {
public:
    Elaborator(const ModuleDecl& m, DesignGraph& g) : m_(m), g_(g) {}

    void run() {
        auto clocks = clock_names(m_);
        clocks_ = clocks;
        for (const auto& c : clocks)
            if (g_.clock.empty() || (is_stage_clock(g_.clock) && !is_stage_clock(c)))
                g_.clock = c;
        g_.items.resize(m_.items.size());

        // classify nets
        std::set<std::string> clocked_targets, mem_read_regs;
        std::map<std::string, int> mem_written_by;
        for (size_t i = 0; i < m_.items.size(); ++i) {
            const auto& item = m_.items[i];
            if (const auto* a = std::get_if<ContinuousAssign>(&item)) {
                comb_driver_[a->target] = static_cast<int>(i);
            } else if (const auto* p = std::get_if<ProcessBlock>(&item)) {
                for_each_stmt(p->body, [&](const Stmt& s) {
                    if (s.kind != StmtKind::Assign)
                        return;
                    if (!p->sensitivity.clocked) {
                        comb_driver_[s.lhs.name] = static_cast<int>(i);
                    } else if (is_memory(s.lhs.name)) {
                        mem_written_by[s.lhs.name] = static_cast<int>(i);
                    } else if (s.rhs->kind == ExprKind::BitSelect && is_memory(s.rhs->name)) {
                        mem_read_regs.insert(s.lhs.name);
                        clocked_targets.insert(s.lhs.name);
                        mem_of_reg_[s.lhs.name] = s.rhs->name;
                    } else {
                        clocked_targets.insert(s.lhs.name);
                    }
                });
            }
        }

        for (const auto& p : m_.ports)
            if (p.direction == PortDirection::Input && !clocks.count(p.name))
                add_seq(SeqKind::PrimaryInput, p.name, p.width, p.span);
        auto add_state = [&](const std::string& name, uint32_t width, Span span) {
            if (!clocked_targets.count(name))
                return;
            int id = mem_read_regs.count(name) ? add_seq(SeqKind::MemoryReadPort, name, width, span)
                                               : add_seq(SeqKind::RegisterBank, name, width, span);
            if (mem_read_regs.count(name))
                g_.seq_nodes[id].memory = mem_of_reg_[name];
            reg_node_[name] = id;
        };
        for (const auto& p : m_.ports)
            if (p.direction == PortDirection::Output)
                add_state(p.name, p.width, p.span);
        for (const auto& item : m_.items)
            if (const auto* d = std::get_if<NetDecl>(&item); d && d->kind != NetKind::Memory)
                add_state(d->name, d->width, d->span);
        for (const auto& item : m_.items)
            if (const auto* d = std::get_if<NetDecl>(&item); d && d->kind == NetKind::Memory && mem_written_by.count(d->name)) {
                int id = add_seq(SeqKind::MemoryWritePort, d->name, d->width, d->span);
                g_.seq_nodes[id].memory = d->name;
                mem_write_node_[d->name] = id;
            }
        std::vector<std::pair<int, const Port*>> outputs;
        for (const auto& p : m_.ports)
            if (p.direction == PortDirection::Output)
                outputs.emplace_back(add_seq(SeqKind::PrimaryOutput, p.name, p.width, p.span), &p);

        for (size_t i = 0; i < m_.items.size(); ++i)
            elaborate_item(static_cast<int>(i));

        for (const auto& [id, port] : outputs) {
            cur_item_ = -1;
            cur_target_ = port->name;
            Value v = net_value(port->name);
            if (!v.is_const)
                v.name = port->name;
            g_.seq_nodes[id].inputs.push_back(operand(v, {true, id}, 0));
        }
        detect_resets();
        prune();
    }

private:
    const ModuleDecl& m_;
    DesignGraph& g_;
    std::set<std::string> clocks_;
    std::map<std::string, int> comb_driver_;
    std::map<std::string, int> reg_node_;
    std::map<std::string, std::string> mem_of_reg_;
    std::map<std::string, int> mem_write_node_;
    std::map<std::string, Value> memo_;
    std::set<int> done_, in_progress_;
    int cur_item_ = -1;
    std::string cur_target_;
    Span cur_span_;

    bool is_memory(const std::string& n) const {
        const auto* d = m_.find_net(n);
        return d && d->kind == NetKind::Memory;
    }

    int add_seq(SeqKind kind, const std::string& name, uint32_t width, Span span) {
        SeqNode s;
        s.id = static_cast<int>(g_.seq_nodes.size());
        s.kind = kind;
        s.name = name;
        s.width = width;
        s.span = span;
        g_.seq_nodes.push_back(std::move(s));
        return g_.seq_nodes.back().id;
    }

    Operand operand(const Value& v, NodeRef head, int port) {
        Operand o;
        o.width = v.width;
        if (v.is_const) {
            o.value = v.value & width_mask(v.width);
            return o;
        }
        Edge e;
        e.id = static_cast<int>(g_.edges.size());
        e.tail = v.src;
        e.head = head;
        e.head_port = port;
        e.via_name = v.name;
        e.width = v.width;
        if (v.src.seq)
            g_.seq_nodes[v.src.id].out_edges.push_back(e.id);
        else
            g_.comb_nodes[v.src.id].out_edges.push_back(e.id);
        g_.edges.push_back(std::move(e));
        o.edge = g_.edges.back().id;
        return o;
    }

    template <typename F>
    Value node(Opcode op, const std::vector<Value>& ins, uint32_t width, F&& configure) {
        CombNode n;
        n.id = static_cast<int>(g_.comb_nodes.size());
        n.op = op;
        n.width = width;
        n.owner_item = cur_item_;
        n.owner_target = cur_target_;
        n.span = cur_span_;
        configure(n);
        const int id = n.id;
        g_.comb_nodes.push_back(std::move(n));
        for (size_t i = 0; i < ins.size(); ++i) {
            Operand o = operand(ins[i], {false, id}, static_cast<int>(i));
            g_.comb_nodes[id].operands.push_back(o);
        }
        Value r;
        r.is_const = false;
        r.width = width;
        r.src = {false, id};
        return r;
    }
    Value node(Opcode op, const std::vector<Value>& ins, uint32_t width) {
        return node(op, ins, width, [](CombNode&) {});
    }

    Value resize(const Value& v, uint32_t w) {
        if (v.width == w)
            return v;
        if (v.is_const)
            return constant(v.value, w);
        return node(Opcode::Resize, {v}, w);
    }

    // --- net resolution --------------------------------------------------------

    Value net_value(const std::string& name) {
        if (const auto* lp = m_.find_param(name))
            return constant(lp->value->value, lp->value->width);
        if (clocks_.count(name))
            throw DesignError("clock '" + name + "' is used as data");
        if (const auto* p = m_.find_port(name); p && p->direction == PortDirection::Input) {
            for (const auto& s : g_.seq_nodes)
                if (s.kind == SeqKind::PrimaryInput && s.name == name) {
                    Value v;
                    v.is_const = false;
                    v.width = s.width;
                    v.src = {true, s.id};
                    v.name = name;
                    return v;
                }
        }
        if (auto it = reg_node_.find(name); it != reg_node_.end()) {
            Value v;
            v.is_const = false;
            v.width = g_.seq_nodes[it->second].width;
            v.src = {true, it->second};
            v.name = name;
            return v;
        }
        if (auto it = memo_.find(name); it != memo_.end())
            return it->second;
        if (auto it = comb_driver_.find(name); it != comb_driver_.end()) {
            elaborate_item(it->second);
            if (auto jt = memo_.find(name); jt != memo_.end())
                return jt->second;
        }
        return constant(0, std::max<uint32_t>(1, m_.width_of(name)));
    }

    Value read(const std::string& name, Ctx& ctx) {
        if (ctx.comb && ctx.targets.count(name)) {
            auto it = ctx.env.find(name);
            Value v = it != ctx.env.end() ? it->second : constant(0, std::max<uint32_t>(1, m_.width_of(name)));
            v.name.clear();
            return v;
        }
        Value v = net_value(name);
        if (!v.is_const)
            v.name = name;
        return v;
    }

    // --- expressions -----------------------------------------------------------

    Value eval(const Expr& e, Ctx& ctx) {
        switch (e.kind) {
        case ExprKind::Literal:
            return constant(e.value, e.width);
        case ExprKind::Identifier:
            return read(e.name, ctx);
        case ExprKind::Unary: {
            Value a = eval(*e.operands[0], ctx);
            if (a.is_const)
                return constant(eval_unary(e.unary_op, a.value, a.width, e.width), e.width);
            return node(unary_opcode(e.unary_op), {a}, e.width);
        }
        case ExprKind::Binary: {
            Value a = eval(*e.operands[0], ctx);
            Value b = eval(*e.operands[1], ctx);
            if (a.is_const && b.is_const)
                return constant(eval_binary(e.binary_op, a.value, a.width, b.value, b.width, e.width), e.width);
            return node(binary_opcode(e.binary_op), {a, b}, e.width);
        }
        case ExprKind::Ternary: {
            Value c = eval(*e.operands[0], ctx);
            if (c.is_const)
                return resize(eval(*e.operands[c.value ? 1 : 2], ctx), e.width);
            Value t = eval(*e.operands[1], ctx);
            Value f = eval(*e.operands[2], ctx);
            return node(Opcode::Mux2, {c, t, f}, e.width);
        }
        case ExprKind::Concat: {
            std::vector<Value> parts;
            bool all_const = true;
            for (const auto& op : e.operands) {
                parts.push_back(eval(*op, ctx));
                all_const &= parts.back().is_const;
            }
            if (all_const) {
                uint64_t r = 0;
                for (const auto& p : parts)
                    r = (p.width >= 64 ? 0 : r << p.width) | p.value;
                return constant(r, e.width);
            }
            return node(Opcode::Concat, parts, e.width);
        }
        case ExprKind::Replicate: {
            Value a = eval(*e.operands[0], ctx);
            if (a.is_const) {
                uint64_t r = 0;
                for (uint32_t i = 0; i < e.repeat; ++i)
                    r = (a.width >= 64 ? 0 : r << a.width) | a.value;
                return constant(r, e.width);
            }
            return node(Opcode::Replicate, {a}, e.width, [&](CombNode& n) { n.repeat = e.repeat; });
        }
        case ExprKind::BitSelect: {
            if (is_memory(e.name))
                throw DesignError("memory '" + e.name + "' read outside a top-level clocked read");
            Value base = read(e.name, ctx);
            Value idx = eval(*e.operands[0], ctx);
            if (base.is_const && idx.is_const)
                return constant(idx.value >= 64 ? 0 : (base.value >> idx.value) & 1, 1);
            return node(Opcode::BitSelect, {base, idx}, 1);
        }
        case ExprKind::PartSelect: {
            Value base = read(e.name, ctx);
            if (base.is_const)
                return constant(base.value >> e.lsb, e.width);
            return node(Opcode::PartSelect, {base}, e.width, [&](CombNode& n) {
                n.msb = e.msb;
                n.lsb = e.lsb;
            });
        }
        }
        return constant(0, 1);
    }

    // --- statements ------------------------------------------------------------

    Value hold_value(const std::string& t, const Ctx& ctx) const {
        if (auto it = ctx.env.find(t); it != ctx.env.end())
            return it->second;
        return constant(0, std::max<uint32_t>(1, m_.width_of(t)));
    }

    Value path_enable(const std::vector<PathTerm>& path) {
        Value acc = constant(1, 1);
        for (const auto& term : path) {
            Value t;
            if (term.kind == PathTerm::Cond) {
                Value c = term.v;
                if (term.polarity)
                    t = c.width == 1 ? c : node(Opcode::RedOr, {c}, 1);
                else
                    t = node(Opcode::LogicNot, {c}, 1);
            } else {
                Value any = constant(0, 1);
                for (uint64_t l : term.labels) {
                    Value eq = node(Opcode::Eq, {term.v, constant(l, std::max(term.v.width, literal_min_width(l)))}, 1);
                    any = any.is_const ? eq : node(Opcode::LogicOr, {any, eq}, 1);
                }
                if (term.kind == PathTerm::CaseDefault)
                    t = any.is_const ? constant(1, 1) : node(Opcode::LogicNot, {any}, 1);
                else
                    t = any;
            }
            if (t.is_const) {
                if (!t.value)
                    return constant(0, 1);
                continue;
            }
            acc = acc.is_const ? t : node(Opcode::LogicAnd, {acc, t}, 1);
        }
        return acc;
    }

    void exec(const StmtPtr& s, Ctx& ctx) {
        if (!s)
            return;
        switch (s->kind) {
        case StmtKind::Block:
            for (const auto& b : s->body)
                exec(b, ctx);
            return;
        case StmtKind::Assign:
            exec_assign(*s, ctx);
            return;
        case StmtKind::If:
            exec_if(*s, ctx);
            return;
        case StmtKind::Case:
            exec_case(*s, ctx);
            return;
        }
    }

    void exec_assign(const Stmt& s, Ctx& ctx) {
        const std::string& t = s.lhs.name;
        cur_target_ = t;
        cur_span_ = s.span;
        if (is_memory(t)) {
            const auto* d = m_.find_net(t);
            MemWrite w;
            w.addr = eval(*s.lhs.index, ctx);
            w.data = resize(eval(*s.rhs, ctx), d->width);
            w.enable = path_enable(ctx.path);
            w.span = s.span;
            ctx.mem_writes[t] = w;
            return;
        }
        if (!ctx.comb && s.rhs->kind == ExprKind::BitSelect && is_memory(s.rhs->name)) {
            ctx.mem_reads[t] = eval(*s.rhs->operands[0], ctx);
            return;
        }
        const uint32_t w = std::max<uint32_t>(1, m_.width_of(t));
        if (s.lhs.index) {
            Value base = hold_value(t, ctx);
            Value idx = eval(*s.lhs.index, ctx);
            Value v = resize(eval(*s.rhs, ctx), 1);
            if (base.is_const && idx.is_const && v.is_const) {
                uint64_t r = base.value;
                if (idx.value < w)
                    r = (r & ~(uint64_t{1} << idx.value)) | (v.value << idx.value);
                ctx.env[t] = constant(r, w);
            } else {
                ctx.env[t] = node(Opcode::Demux, {base, idx, v}, w);
            }
            return;
        }
        ctx.env[t] = resize(eval(*s.rhs, ctx), w);
    }

    void merge_into(Ctx& ctx, const Value& sel, const Ctx& pre, const std::vector<Ctx>& branches,
                    const std::vector<std::vector<uint64_t>>& labels, uint32_t alternatives, bool is_if, Span span) {
        std::set<std::string> keys;
        for (const auto& b : branches)
            for (const auto& [k, v] : b.env)
                keys.insert(k);
        for (const auto& k : keys) {
            std::vector<Value> vals;
            for (const auto& b : branches) {
                auto it = b.env.find(k);
                vals.push_back(it != b.env.end() ? it->second : hold_value(k, pre));
            }
            bool all_same = std::all_of(vals.begin(), vals.end(), [&](const Value& v) { return same_value(v, vals[0]); });
            if (all_same) {
                ctx.env[k] = vals[0];
                continue;
            }
            cur_target_ = k;
            cur_span_ = span;
            uint32_t w = 0;
            for (const auto& v : vals)
                w = std::max(w, v.width);
            if (is_if) {
                ctx.env[k] = node(Opcode::Mux2, {sel, vals[0], vals[1]}, w);
            } else {
                std::vector<Value> ins{sel};
                ins.insert(ins.end(), vals.begin(), vals.end());
                ctx.env[k] = node(Opcode::Case, ins, w, [&](CombNode& n) {
                    n.case_labels = labels;
                    n.case_alternatives = alternatives;
                });
            }
        }
        for (const auto& b : branches)
            for (const auto& [mem, w] : b.mem_writes)
                ctx.mem_writes[mem] = w;
    }

    Ctx branch(const Ctx& ctx, PathTerm term) {
        Ctx b = ctx;
        b.mem_writes.clear();
        b.path.push_back(std::move(term));
        return b;
    }

    void exec_if(const Stmt& s, Ctx& ctx) {
        cur_span_ = s.span;
        Value c = eval(*s.cond, ctx);
        if (c.is_const) {
            exec(c.value ? s.then_stmt : s.else_stmt, ctx);
            return;
        }
        std::vector<Ctx> branches;
        branches.push_back(branch(ctx, {PathTerm::Cond, c, true, {}}));
        exec(s.then_stmt, branches.back());
        branches.push_back(branch(ctx, {PathTerm::Cond, c, false, {}}));
        exec(s.else_stmt, branches.back());
        Ctx pre = ctx;
        merge_into(ctx, c, pre, branches, {}, 2, true, s.span);
    }

    void exec_case(const Stmt& s, Ctx& ctx) {
        cur_span_ = s.span;
        Value sel = eval(*s.selector, ctx);
        std::vector<std::vector<uint64_t>> labels;
        std::vector<const CaseItem*> items;
        const CaseItem* def = nullptr;
        std::vector<uint64_t> all_labels;
        for (const auto& item : s.items) {
            if (item.is_default()) {
                if (!def)
                    def = &item;
                continue;
            }
            std::vector<uint64_t> ls;
            for (const auto& l : item.labels) {
                auto v = eval_constant(*l, m_);
                if (!v)
                    throw DesignError("case label is not constant");
                ls.push_back(*v);
            }
            all_labels.insert(all_labels.end(), ls.begin(), ls.end());
            labels.push_back(std::move(ls));
            items.push_back(&item);
        }
        if (sel.is_const) {
            for (size_t i = 0; i < items.size(); ++i)
                for (uint64_t l : labels[i])
                    if (l == sel.value) {
                        exec(items[i]->body, ctx);
                        return;
                    }
            if (def)
                exec(def->body, ctx);
            return;
        }
        std::vector<Ctx> branches;
        for (size_t i = 0; i < items.size(); ++i) {
            branches.push_back(branch(ctx, {PathTerm::CaseMatch, sel, true, labels[i]}));
            // earlier items take priority
            for (size_t j = 0; j < i; ++j)
                branches.back().path.insert(branches.back().path.end() - 1,
                                            PathTerm{PathTerm::CaseDefault, sel, true, labels[j]});
            exec(items[i]->body, branches.back());
        }
        branches.push_back(branch(ctx, {PathTerm::CaseDefault, sel, true, all_labels}));
        if (def)
            exec(def->body, branches.back());
        Ctx pre = ctx;
        const uint32_t alternatives = static_cast<uint32_t>(s.items.size());
        merge_into(ctx, sel, pre, branches, labels, alternatives, false, s.span);
    }

    // --- items -----------------------------------------------------------------

    void elaborate_item(int idx) {
        if (done_.count(idx))
            return;
        if (in_progress_.count(idx))
            throw DesignError("combinational loop through item at line " +
                              std::to_string(item_span(idx).begin.line));
        in_progress_.insert(idx);
        const int saved_item = cur_item_;
        const std::string saved_target = cur_target_;
        const Span saved_span = cur_span_;
        cur_item_ = idx;

        ItemRecord& rec = g_.items[idx];
        rec.item_index = idx;
        const auto& item = m_.items[idx];
        if (const auto* a = std::get_if<ContinuousAssign>(&item)) {
            rec.kind = ItemKind::Assign;
            cur_target_ = a->target;
            cur_span_ = a->span;
            Ctx ctx;
            Value v = resize(eval(*a->rhs, ctx), std::max<uint32_t>(1, m_.width_of(a->target)));
            memo_[a->target] = v;
            g_.items[idx].targets.push_back({a->target, v, -1});
        } else if (const auto* p = std::get_if<ProcessBlock>(&item)) {
            if (p->sensitivity.clocked)
                elaborate_clocked(*p, idx);
            else
                elaborate_comb(*p, idx);
        }
        in_progress_.erase(idx);
        done_.insert(idx);
        cur_item_ = saved_item;
        cur_target_ = saved_target;
        cur_span_ = saved_span;
    }

    Span item_span(int idx) const {
        return std::visit([](const auto& x) { return x.span; }, m_.items[idx]);
    }

    static std::vector<std::string> assigned_names(const StmtPtr& body) {
        std::vector<std::string> out;
        for_each_stmt(body, [&](const Stmt& s) {
            if (s.kind == StmtKind::Assign && std::find(out.begin(), out.end(), s.lhs.name) == out.end())
                out.push_back(s.lhs.name);
        });
        return out;
    }

    void elaborate_comb(const ProcessBlock& p, int idx) {
        g_.items[idx].kind = ItemKind::CombProcess;
        Ctx ctx;
        ctx.comb = true;
        auto names = assigned_names(p.body);
        ctx.targets.insert(names.begin(), names.end());
        exec(p.body, ctx);
        for (const auto& t : names) {
            Value v = hold_value(t, ctx);
            v.name.clear();
            memo_[t] = v;
            g_.items[idx].targets.push_back({t, v, -1});
        }
    }

    void elaborate_clocked(const ProcessBlock& p, int idx) {
        g_.items[idx].kind = ItemKind::ClockedProcess;
        Ctx ctx;
        ctx.comb = false;
        auto names = assigned_names(p.body);
        for (const auto& t : names) {
            if (is_memory(t) || mem_of_reg_.count(t))
                continue;
            ctx.targets.insert(t);
            ctx.env[t] = net_value(t);
            ctx.env[t].name = t;
        }
        exec(p.body, ctx);
        auto& rec = g_.items[idx];
        for (const auto& t : names) {
            if (is_memory(t)) {
                rec.has_memory = true;
                const int sid = mem_write_node_.at(t);
                const MemWrite& w = ctx.mem_writes.at(t);
                cur_target_ = t;
                g_.seq_nodes[sid].owner_item = idx;
                g_.seq_nodes[sid].span = w.span;
                auto& ins = g_.seq_nodes[sid].inputs;
                ins.clear();
                Operand en = operand(w.enable, {true, sid}, 0);
                Operand ad = operand(w.addr, {true, sid}, 1);
                Operand da = operand(w.data, {true, sid}, 2);
                g_.seq_nodes[sid].inputs = {en, ad, da};
                rec.targets.push_back({t, Value{}, sid});
            } else if (mem_of_reg_.count(t)) {
                rec.has_memory = true;
                const int sid = reg_node_.at(t);
                g_.seq_nodes[sid].owner_item = idx;
                Operand ad = operand(ctx.mem_reads.at(t), {true, sid}, 0);
                g_.seq_nodes[sid].inputs = {ad};
                rec.targets.push_back({t, Value{}, sid});
            } else {
                const int sid = reg_node_.at(t);
                g_.seq_nodes[sid].owner_item = idx;
                cur_target_ = t;
                Value d = resize(ctx.env.at(t), g_.seq_nodes[sid].width);
                Operand o = operand(d, {true, sid}, 0);
                g_.seq_nodes[sid].inputs = {o};
                rec.targets.push_back({t, d, sid});
            }
        }
    }

    // Recognizes `rst ? CONST : ...` (and `rst_n ? ... : CONST`) on register inputs.
    void detect_resets() {
        for (auto& s : g_.seq_nodes) {
            if (s.kind != SeqKind::RegisterBank || s.inputs.empty() || s.inputs[0].is_const())
                continue;
            const Edge& e = g_.edges[s.inputs[0].edge];
            if (e.tail.seq)
                continue;
            const CombNode& n = g_.comb_nodes[e.tail.id];
            if (n.op != Opcode::Mux2 || n.operands[0].is_const())
                continue;
            const Edge& ce = g_.edges[n.operands[0].edge];
            if (!ce.tail.seq || g_.seq_nodes[ce.tail.id].kind != SeqKind::PrimaryInput)
                continue;
            const std::string& rn = g_.seq_nodes[ce.tail.id].name;
            const bool high = rn == "rst" || rn == "reset";
            const bool low = rn == "rst_n" || rn == "reset_n";
            const Operand& val = n.operands[high ? 1 : 2];
            if ((high || low) && val.is_const()) {
                s.reset_value = val.value;
                g_.reset = rn;
            }
        }
    }

    // Removes comb nodes that reach no sequential sink and renumbers the graph.
    void prune() {
        const size_t n = g_.comb_nodes.size();
        std::vector<char> live(n, 0);
        std::vector<int> stack;
        auto visit_operands = [&](const std::vector<Operand>& ops) {
            for (const auto& o : ops)
                if (!o.is_const()) {
                    const Edge& e = g_.edges[o.edge];
                    if (!e.tail.seq && !live[e.tail.id]) {
                        live[e.tail.id] = 1;
                        stack.push_back(e.tail.id);
                    }
                }
        };
        for (const auto& s : g_.seq_nodes)
            visit_operands(s.inputs);
        while (!stack.empty()) {
            int id = stack.back();
            stack.pop_back();
            visit_operands(g_.comb_nodes[id].operands);
        }
        std::vector<int> node_map(n, -1);
        std::vector<CombNode> nodes;
        for (size_t i = 0; i < n; ++i)
            if (live[i]) {
                node_map[i] = static_cast<int>(nodes.size());
                nodes.push_back(std::move(g_.comb_nodes[i]));
            }
        auto head_live = [&](const Edge& e) { return e.head.seq || live[e.head.id]; };
        std::vector<int> edge_map(g_.edges.size(), -1);
        std::vector<Edge> edges;
        for (auto& e : g_.edges)
            if (head_live(e)) {
                edge_map[e.id] = static_cast<int>(edges.size());
                edges.push_back(e);
            }
        auto remap_ref = [&](NodeRef& r) {
            if (!r.seq)
                r.id = node_map[r.id];
        };
        for (auto& e : edges) {
            e.id = edge_map[e.id];
            remap_ref(e.tail);
            remap_ref(e.head);
        }
        auto remap_ops = [&](std::vector<Operand>& ops) {
            for (auto& o : ops)
                if (!o.is_const())
                    o.edge = edge_map[o.edge];
        };
        for (size_t i = 0; i < nodes.size(); ++i) {
            nodes[i].id = static_cast<int>(i);
            remap_ops(nodes[i].operands);
            nodes[i].out_edges.clear();
        }
        for (auto& s : g_.seq_nodes) {
            remap_ops(s.inputs);
            s.out_edges.clear();
        }
        for (const auto& e : edges) {
            if (e.tail.seq)
                g_.seq_nodes[e.tail.id].out_edges.push_back(e.id);
            else
                nodes[e.tail.id].out_edges.push_back(e.id);
        }
        for (auto& rec : g_.items)
            for (auto& t : rec.targets)
                if (!t.value.is_const && t.value.src.valid() && !t.value.src.seq) {
                    const int mapped = node_map[t.value.src.id];
                    if (mapped < 0)
                        t.value.dead = true;
                    t.value.src.id = mapped;
                }
        g_.comb_nodes = std::move(nodes);
        g_.edges = std::move(edges);
    }
};

}  // namespace

DesignGraph elaborate(const SourceUnit& unit, const std::string& top) {
    auto diags = subset_check(unit);
    if (!diags.empty())
        throw DesignError(format_diagnostic(diags.front(), unit.file_name));
    DesignGraph g;
    g.top = top;
    g.module = flatten(unit, top);
    diags = subset_check(g.module);
    if (!diags.empty())
        throw DesignError(format_diagnostic(diags.front(), unit.file_name));
    Elaborator(g.module, g).run();
    topo_order(g);  // defensive acyclicity check
    return g;
}

}  // namespace cslow
