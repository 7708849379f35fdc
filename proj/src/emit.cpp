#include "cslow/emit.hpp"

#include "cslow/parser.hpp"
#include "cslow/printer.hpp"
#include "cslow/subset.hpp"

#include <json.hpp>

#include <algorithm>
#include <functional>
#include <map>
#include <set>

namespace cslow {

namespace {

ExprPtr ident(const std::string& n) { return make_identifier(n); }
ExprPtr lit(uint64_t v, uint32_t w) { return make_literal(v, std::max<uint32_t>(w, 1)); }

BinaryOp binop(Opcode op) {
    switch (op) {
    case Opcode::Add: return BinaryOp::Add;
    case Opcode::Sub: return BinaryOp::Sub;
    case Opcode::Mul: return BinaryOp::Mul;
    case Opcode::And: return BinaryOp::And;
    case Opcode::Or: return BinaryOp::Or;
    case Opcode::Xor: return BinaryOp::Xor;
    case Opcode::Xnor: return BinaryOp::Xnor;
    case Opcode::LogicAnd: return BinaryOp::LogicAnd;
    case Opcode::LogicOr: return BinaryOp::LogicOr;
    case Opcode::Eq: return BinaryOp::Eq;
    case Opcode::Ne: return BinaryOp::Ne;
    case Opcode::Lt: return BinaryOp::Lt;
    case Opcode::Le: return BinaryOp::Le;
    case Opcode::Gt: return BinaryOp::Gt;
    case Opcode::Ge: return BinaryOp::Ge;
    case Opcode::Shl: return BinaryOp::Shl;
    case Opcode::Shr: return BinaryOp::Shr;
    default: break;
    }
    throw DesignError("internal: not a binary opcode");
}

UnaryOp unop(Opcode op) {
    switch (op) {
    case Opcode::Not: return UnaryOp::BitNot;
    case Opcode::LogicNot: return UnaryOp::LogicNot;
    case Opcode::Neg: return UnaryOp::Negate;
    case Opcode::RedAnd: return UnaryOp::RedAnd;
    case Opcode::RedOr: return UnaryOp::RedOr;
    case Opcode::RedXor: return UnaryOp::RedXor;
    case Opcode::RedNand: return UnaryOp::RedNand;
    case Opcode::RedNor: return UnaryOp::RedNor;
    case Opcode::RedXnor: return UnaryOp::RedXnor;
    default: break;
    }
    throw DesignError("internal: not a unary opcode");
}

class Builder {
public:
    Builder(const DesignGraph& g, const SegmentAssignment& a) : g_(g), a_(a) {
        if (a.seg.size() != g.comb_nodes.size())
            throw DesignError("assignment does not match the graph");
        auto legal = legality_check(g, a, 0);
        if (!legal.ok)
            throw DesignError("illegal segment assignment: " + legal.violations.front());
        plan_.cmf = a.cmf;
        plan_.clock = g.clock;
        for (const auto& p : g.module.ports)
            used_.insert(p.name);
        for (const auto& item : g.module.items) {
            if (const auto* d = std::get_if<NetDecl>(&item))
                used_.insert(d->name);
            else if (const auto* lp = std::get_if<LocalParam>(&item))
                used_.insert(lp->name);
        }
        plan();
    }

    const RewritePlan& result() const { return plan_; }

    bool empty() const {
        return plan_.chains.empty() && plan_.touched_items.empty() && plan_.banked_memories.empty() &&
               renames_.empty();
    }

    ModuleDecl build(const EmitOptions& opt) {
        const ModuleDecl& src = g_.module;
        ModuleDecl m;
        m.name = src.name;
        m.span = src.span;
        std::set<int> stages;
        for (const auto& c : plan_.chains)
            for (const auto& r : c.registers)
                stages.insert(r.stage);
        for (const auto& p : src.ports) {
            Port q = p;
            if (renames_.count(p.name))
                q.is_reg = false;
            m.ports.push_back(q);
            if (p.name == g_.clock && !opt.tie_clocks)
                for (int s : stages) {
                    Port c;
                    c.name = "clk_sp" + std::to_string(s);
                    if (src.find_port(c.name) || src.find_net(c.name))
                        throw DesignError("port name '" + c.name + "' is reserved for SP stage clocks");
                    m.ports.push_back(c);
                }
        }

        // new declarations first
        for (const auto& p : src.ports)
            if (auto it = renames_.find(p.name); it != renames_.end() && !src.find_net(p.name))
                m.items.push_back(NetDecl{it->second, p.is_reg ? NetKind::Reg : NetKind::Wire, p.width, 1, {}});
        if (!plan_.thread_counter.empty())
            m.items.push_back(NetDecl{plan_.thread_counter, NetKind::Reg, tid_width(), 1, {}});

        // rendered bodies may materialize further wires; render before declaring them
        std::vector<ModuleItem> body;
        for (size_t i = 0; i < src.items.size(); ++i) {
            const bool touched = std::binary_search(plan_.touched_items.begin(), plan_.touched_items.end(),
                                                    static_cast<int>(i));
            if (touched) {
                if (auto item = render_item(static_cast<int>(i)))
                    body.push_back(std::move(*item));
                continue;
            }
            ModuleItem item = clone(src.items[i]);
            rename_identifiers(item, [&](const std::string& n) { return renamed(n); });
            if (auto* d = std::get_if<NetDecl>(&item); d && d->kind == NetKind::Memory &&
                                                        std::count(plan_.banked_memories.begin(),
                                                                   plan_.banked_memories.end(), d->name))
                d->depth = banked_depth(*d);
            body.push_back(std::move(item));
        }
        std::vector<ModuleItem> tail;
        for (const auto& s : g_.seq_nodes)
            if (s.kind == SeqKind::PrimaryOutput && renames_.count(s.name))
                tail.push_back(ContinuousAssign{s.name, operand_expr(s.inputs[0], -1), {}});
        if (!plan_.thread_counter.empty()) {
            const uint32_t w = tid_width();
            auto next = make_ternary(make_binary(BinaryOp::Eq, ident(plan_.thread_counter), lit(a_.cmf - 1, w)),
                                     lit(0, w), make_binary(BinaryOp::Add, ident(plan_.thread_counter), lit(1, w)));
            ProcessBlock p;
            p.sensitivity.clocked = true;
            p.sensitivity.clock = g_.clock;
            p.body = make_assign(LValue{plan_.thread_counter, nullptr, std::nullopt, {}}, next, true);
            tail.push_back(std::move(p));
        }
        // materialized wires (rendering one may request more)
        std::vector<ModuleItem> wires;
        for (size_t k = 0; k < mat_order_.size(); ++k) {
            const int id = mat_order_[k];
            wires.push_back(ContinuousAssign{mat_name_.at(id), render_node(id, g_.comb_nodes[id].owner_item), {}});
        }
        for (int id : mat_order_)
            m.items.push_back(NetDecl{mat_name_.at(id), NetKind::Wire, g_.comb_nodes[id].width, 1, {}});
        for (const auto& c : plan_.chains)
            for (const auto& r : c.registers)
                m.items.push_back(NetDecl{r.name, NetKind::Reg, r.width, 1, {}});
        for (auto& it : body)
            m.items.push_back(std::move(it));
        for (auto& it : wires)
            m.items.push_back(std::move(it));
        for (auto& it : tail)
            m.items.push_back(std::move(it));
        for (const auto& c : plan_.chains)
            for (const auto& r : c.registers) {
                ProcessBlock p;
                p.sensitivity.clocked = true;
                p.sensitivity.clock = opt.tie_clocks ? g_.clock : "clk_sp" + std::to_string(r.stage);
                p.body = make_assign(LValue{r.name, nullptr, std::nullopt, {}}, ident(r.input), true, opt.sp_delay);
                m.items.push_back(std::move(p));
            }
        annotate_widths(m);
        plan_.materialized.clear();
        for (int id : mat_order_)
            plan_.materialized.push_back(mat_name_.at(id));
        return m;
    }

private:
    const DesignGraph& g_;
    const SegmentAssignment& a_;
    RewritePlan plan_;
    std::set<std::string> used_;
    std::map<std::string, std::string> renames_;  // output port -> internal net
    std::map<NodeRef, int> chain_of_;
    std::map<int, std::string> mat_name_;
    std::vector<int> mat_order_;

    std::string fresh(const std::string& want) {
        std::string n = want;
        for (int k = 2; used_.count(n); ++k)
            n = want + "__" + std::to_string(k);
        if (n != want)
            plan_.renamed_for_collision.emplace_back(want, n);
        used_.insert(n);
        return n;
    }

    std::string renamed(const std::string& n) const {
        auto it = renames_.find(n);
        return it != renames_.end() ? it->second : n;
    }

    uint32_t tid_width() const { return std::max<uint32_t>(1, ceil_log2(static_cast<uint64_t>(a_.cmf))); }

    uint32_t addr_width(const NetDecl& d) const { return std::max<uint32_t>(1, ceil_log2(d.depth)); }

    uint32_t banked_depth(const NetDecl& d) const { return (1u << tid_width()) << addr_width(d); }

    int regs(const Edge& e) const { return regs_on_edge(g_, a_, e); }

    void plan() {
        if (a_.cmf == 1) {
            for (const auto& s : g_.seq_nodes)
                if (s.kind == SeqKind::PrimaryOutput)
                    plan_.outputs.push_back({s.name, 0, false});
            return;
        }
        std::set<int> touched;
        for (const auto& e : g_.edges) {
            if (regs(e) <= 0)
                continue;
            const int owner = e.head.seq ? g_.seq_nodes[e.head.id].owner_item : g_.comb_nodes[e.head.id].owner_item;
            if (owner >= 0)
                touched.insert(owner);
        }
        for (const auto& rec : g_.items)
            if (rec.has_memory)
                touched.insert(rec.item_index);
        plan_.touched_items.assign(touched.begin(), touched.end());

        for (const auto& s : g_.seq_nodes) {
            if (s.kind != SeqKind::PrimaryOutput)
                continue;
            int latency = a_.cmf - 1;
            bool rename = false;
            if (!s.inputs.empty() && !s.inputs[0].is_const()) {
                const Edge& e = g_.edges[s.inputs[0].edge];
                latency = head_label(g_, a_, e) - 1;
                rename = regs(e) > 0;
            } else if (!a_.align_outputs) {
                latency = 0;
            }
            if (rename)
                renames_[s.name] = fresh(s.name + "_core");
            plan_.outputs.push_back({s.name, latency, rename});
        }

        for (const auto& item : g_.module.items)
            if (const auto* d = std::get_if<NetDecl>(&item); d && d->kind == NetKind::Memory)
                for (const auto& s : g_.seq_nodes)
                    if ((s.kind == SeqKind::MemoryReadPort || s.kind == SeqKind::MemoryWritePort) && s.memory == d->name) {
                        plan_.banked_memories.push_back(d->name);
                        break;
                    }
        if (!plan_.banked_memories.empty())
            plan_.thread_counter = fresh("csr_tid");

        auto add_chain = [&](NodeRef tail) {
            int longest = 0;
            for (int eid : g_.out_edges(tail))
                longest = std::max(longest, regs(g_.edges[eid]));
            if (longest == 0)
                return;
            SpChain c;
            c.tail = tail;
            c.base = tail.seq ? renamed(g_.seq_nodes[tail.id].name) : node_name(tail.id);
            const int first = tail_label(g_, a_, tail);
            std::string prev = c.base;
            for (int k = 0; k < longest; ++k) {
                SpRegister r;
                r.stage = first + k;
                r.name = fresh(c.base + "_sp" + std::to_string(r.stage));
                r.input = prev;
                r.width = g_.node_width(tail);
                prev = r.name;
                c.registers.push_back(r);
            }
            chain_of_[tail] = static_cast<int>(plan_.chains.size());
            plan_.chains.push_back(std::move(c));
        };
        for (const auto& s : g_.seq_nodes)
            add_chain({true, s.id});
        for (const auto& c : g_.comb_nodes)
            add_chain({false, c.id});
    }

    // Net carrying the value of comb node `id`: its owner's target when the node is
    // that target's final value, otherwise a materialized wire.
    std::string node_name(int id) {
        if (auto it = mat_name_.find(id); it != mat_name_.end())
            return it->second;
        const CombNode& n = g_.comb_nodes[id];
        if (n.owner_item >= 0) {
            const auto& rec = g_.items[n.owner_item];
            if (rec.kind == ItemKind::Assign || rec.kind == ItemKind::CombProcess)
                for (const auto& t : rec.targets)
                    if (!t.value.is_const && !t.value.dead && t.value.src == NodeRef{false, id})
                        return renamed(t.name);
        }
        return materialize(id);
    }

    std::string materialize(int id) {
        if (auto it = mat_name_.find(id); it != mat_name_.end())
            return it->second;
        const CombNode& n = g_.comb_nodes[id];
        std::string base = n.owner_target.empty() ? "csr" : n.owner_target;
        const std::string name = fresh(base + "_n" + std::to_string(id));
        mat_name_[id] = name;
        mat_order_.push_back(id);
        return name;
    }

    std::string chain_reg(NodeRef tail, int stage) const {
        const SpChain& c = plan_.chains[chain_of_.at(tail)];
        const int first = tail_label(g_, a_, tail);
        return c.registers.at(stage - first).name;
    }

    // Uses of comb node `id` that would be inlined into its owner's text.
    int inline_uses(int id) const {
        const CombNode& n = g_.comb_nodes[id];
        int uses = 0;
        for (int eid : n.out_edges) {
            const Edge& e = g_.edges[eid];
            if (regs(e) > 0)
                continue;
            const int owner = e.head.seq ? g_.seq_nodes[e.head.id].owner_item : g_.comb_nodes[e.head.id].owner_item;
            if (owner == n.owner_item)
                ++uses;
        }
        if (n.owner_item >= 0)
            for (const auto& t : g_.items[n.owner_item].targets)
                if (!t.value.is_const && !t.value.dead && t.value.src == NodeRef{false, id} && t.seq_node < 0)
                    ++uses;
        return uses;
    }

    ExprPtr node_ref_expr(int id, int ctx_item) {
        if (auto it = mat_name_.find(id); it != mat_name_.end())
            return ident(it->second);
        const CombNode& n = g_.comb_nodes[id];
        if (n.owner_item == ctx_item && ctx_item >= 0) {
            if (inline_uses(id) <= 1)
                return render_node(id, ctx_item);
            return ident(materialize(id));
        }
        return ident(node_name(id));
    }

    ExprPtr operand_expr(const Operand& o, int ctx_item) {
        if (o.is_const())
            return lit(o.value, o.width);
        const Edge& e = g_.edges[o.edge];
        if (regs(e) > 0)
            return ident(chain_reg(e.tail, head_label(g_, a_, e) - 1));
        if (e.tail.seq)
            return ident(renamed(g_.seq_nodes[e.tail.id].name));
        return node_ref_expr(e.tail.id, ctx_item);
    }

    // Operand rendered as a plain identifier (select bases).
    ExprPtr named_operand(const Operand& o, int ctx_item) {
        ExprPtr x = operand_expr(o, ctx_item);
        if (x->kind == ExprKind::Identifier || o.is_const())
            return x;
        return ident(materialize(g_.edges[o.edge].tail.id));
    }

    ExprPtr render_node(int id, int ctx_item) {
        const CombNode& n = g_.comb_nodes[id];
        auto op = [&](size_t i) { return operand_expr(n.operands[i], ctx_item); };
        switch (n.op) {
        case Opcode::Mux2:
            return make_ternary(op(0), op(1), op(2));
        case Opcode::Case: {
            const size_t k = n.case_labels.size();
            ExprPtr acc = op(k + 1);
            const uint32_t sw = n.operands[0].width;
            for (size_t i = k; i-- > 0;) {
                ExprPtr cond;
                for (uint64_t l : n.case_labels[i]) {
                    ExprPtr eq = make_binary(BinaryOp::Eq, op(0), lit(l, std::max(sw, literal_min_width(l))));
                    cond = cond ? make_binary(BinaryOp::LogicOr, cond, eq) : eq;
                }
                acc = cond ? make_ternary(cond, op(i + 1), acc) : acc;
            }
            return acc;
        }
        case Opcode::Not:
        case Opcode::LogicNot:
        case Opcode::Neg:
        case Opcode::RedAnd:
        case Opcode::RedOr:
        case Opcode::RedXor:
        case Opcode::RedNand:
        case Opcode::RedNor:
        case Opcode::RedXnor:
            return make_unary(unop(n.op), op(0));
        case Opcode::BitSelect: {
            ExprPtr base = n.operands[0].is_const() ? nullptr : named_operand(n.operands[0], ctx_item);
            if (base)
                return make_bit_select(base->name, op(1));
            // constant base: |((C >> i) & W'd1)
            const uint32_t w = n.operands[0].width;
            return make_unary(UnaryOp::RedOr,
                              make_binary(BinaryOp::And, make_binary(BinaryOp::Shr, op(0), op(1)), lit(1, w)));
        }
        case Opcode::PartSelect:
            return make_part_select(named_operand(n.operands[0], ctx_item)->name, n.msb, n.lsb);
        case Opcode::Concat: {
            std::vector<ExprPtr> parts;
            for (size_t i = 0; i < n.operands.size(); ++i)
                parts.push_back(op(i));
            return make_concat(std::move(parts));
        }
        case Opcode::Replicate: {
            auto e = std::make_shared<Expr>();
            e->kind = ExprKind::Replicate;
            e->repeat = n.repeat;
            e->operands = {op(0)};
            return e;
        }
        case Opcode::Demux: {
            const uint32_t w = n.width;
            ExprPtr keep = make_binary(BinaryOp::And, op(0),
                                       make_unary(UnaryOp::BitNot, make_binary(BinaryOp::Shl, lit(1, w), op(1))));
            ExprPtr put = make_binary(BinaryOp::Shl, make_binary(BinaryOp::Or, lit(0, w), op(2)), op(1));
            return make_binary(BinaryOp::Or, keep, put);
        }
        case Opcode::Resize: {
            const uint32_t from = n.operands[0].width;
            if (from < n.width)
                return make_concat({lit(0, n.width - from), op(0)});
            return make_part_select(named_operand(n.operands[0], ctx_item)->name, n.width - 1, 0);
        }
        default:
            return make_binary(binop(n.op), op(0), op(1));
        }
    }

    ExprPtr value_expr(const Value& v, uint32_t width, int ctx_item) {
        if (v.is_const || v.dead || !v.src.valid())
            return lit(v.is_const ? v.value : 0, width);
        if (v.src.seq)
            return ident(renamed(g_.seq_nodes[v.src.id].name));
        return node_ref_expr(v.src.id, ctx_item);
    }

    ExprPtr memory_index(const SeqNode& port, const Operand& addr, int ctx_item) {
        const NetDecl* d = g_.module.find_net(port.memory);
        ExprPtr a = operand_expr(addr, ctx_item);
        const uint32_t aw = addr_width(*d);
        if (addr.width > aw)
            throw DesignError("address of memory '" + port.memory + "' is wider than its depth");
        std::vector<ExprPtr> parts{ident(plan_.thread_counter)};
        if (addr.width < aw)
            parts.push_back(lit(0, aw - addr.width));
        parts.push_back(a);
        return make_concat(std::move(parts));
    }

    std::optional<ModuleItem> render_item(int idx) {
        const ModuleItem& item = g_.module.items[idx];
        const ItemRecord& rec = g_.items[idx];
        if (const auto* ca = std::get_if<ContinuousAssign>(&item)) {
            const uint32_t w = std::max<uint32_t>(1, g_.module.width_of(ca->target));
            return ContinuousAssign{renamed(ca->target), value_expr(rec.targets.at(0).value, w, idx), ca->span};
        }
        const auto* p = std::get_if<ProcessBlock>(&item);
        if (!p)
            return clone(item);
        ProcessBlock out;
        out.sensitivity = p->sensitivity;
        out.span = p->span;
        std::vector<StmtPtr> body;
        if (!p->sensitivity.clocked) {
            for (const auto& t : rec.targets) {
                const uint32_t w = std::max<uint32_t>(1, g_.module.width_of(t.name));
                body.push_back(make_assign(LValue{renamed(t.name), nullptr, std::nullopt, {}},
                                           value_expr(t.value, w, idx), false));
            }
        } else {
            for (const auto& t : rec.targets) {
                const SeqNode& s = g_.seq_nodes.at(t.seq_node);
                switch (s.kind) {
                case SeqKind::RegisterBank:
                    body.push_back(make_assign(LValue{renamed(s.name), nullptr, std::nullopt, {}},
                                               operand_expr(s.inputs.at(0), idx), true));
                    break;
                case SeqKind::MemoryReadPort: {
                    auto rd = make_bit_select(s.memory, memory_index(s, s.inputs.at(0), idx));
                    body.push_back(make_assign(LValue{renamed(s.name), nullptr, std::nullopt, {}}, rd, true));
                    break;
                }
                case SeqKind::MemoryWritePort: {
                    const Operand& en = s.inputs.at(0);
                    if (en.is_const() && en.value == 0)
                        break;
                    auto wr = make_assign(LValue{s.memory, memory_index(s, s.inputs.at(1), idx), std::nullopt, {}},
                                          operand_expr(s.inputs.at(2), idx), true);
                    body.push_back(en.is_const() ? wr : make_if(operand_expr(en, idx), wr, nullptr));
                    break;
                }
                default:
                    break;
                }
            }
        }
        if (body.empty())
            return std::nullopt;
        out.body = make_block(std::move(body));
        return out;
    }
};

}  // namespace

RewritePlan plan_rewrite(const DesignGraph& g, const SegmentAssignment& a) {
    return Builder(g, a).result();
}

EmitResult emit_design(const DesignGraph& g, const SegmentAssignment& a, const EmitOptions& opt) {
    Builder b(g, a);
    EmitResult r;
    if (a.cmf == 1 || b.empty()) {
        r.plan = b.result();
        r.module = g.module;
    } else {
        r.module = b.build(opt);
        r.plan = b.result();
    }
    r.text = print_module(r.module);
    return r;
}

std::string emit_verilog(const DesignGraph& g, const SegmentAssignment& a, const EmitOptions& opt) {
    return emit_design(g, a, opt).text;
}

std::string emit_schedule(const DesignGraph& g, const SegmentAssignment& a, const RewritePlan& plan,
                          const EmitOptions& opt) {
    nlohmann::ordered_json j;
    j["schema"] = "cslow.schedule/1";
    j["top"] = g.top;
    j["cmf"] = a.cmf;
    j["threads"] = a.cmf;
    j["clock"] = g.clock;
    auto clocks = nlohmann::ordered_json::array();
    std::set<int> stages;
    for (const auto& c : plan.chains)
        for (const auto& r : c.registers)
            stages.insert(r.stage);
    for (int s : stages)
        clocks.push_back(opt.tie_clocks ? g.clock : "clk_sp" + std::to_string(s));
    j["stage_clocks"] = clocks;
    j["tie_clocks"] = opt.tie_clocks;
    j["identity"] = a.cmf == 1;
    j["slot_rule"] = "thread k's original cycle t is fast cycle t*cmf+k";
    j["aligned_outputs"] = a.align_outputs;
    auto ins = nlohmann::ordered_json::array();
    for (const auto& s : g.seq_nodes)
        if (s.kind == SeqKind::PrimaryInput)
            ins.push_back({{"port", s.name}, {"offset", 0}});
    j["inputs"] = ins;
    auto outs = nlohmann::ordered_json::array();
    for (const auto& o : plan.outputs) {
        nlohmann::ordered_json x;
        x["port"] = o.port;
        x["offset"] = o.latency;  // fast cycles after the thread's input slot (sampled before the edge)
        x["alignment_stage"] = o.latency + 1;  // segment whose boundary the output leaves from
        x["aligned"] = o.latency == a.cmf - 1;
        outs.push_back(x);
    }
    j["outputs"] = outs;
    auto coll = nlohmann::ordered_json::array();
    for (const auto& [want, got] : plan.renamed_for_collision)
        coll.push_back({{"wanted", want}, {"used", got}});
    j["renamed_for_collision"] = coll;
    j["warmup_original_cycles"] = a.cmf;
    j["banked_memories"] = plan.banked_memories;
    j["thread_counter"] = plan.thread_counter.empty() ? nlohmann::ordered_json(nullptr)
                                                      : nlohmann::ordered_json(plan.thread_counter);
    uint64_t bits = 0;
    auto chains = nlohmann::ordered_json::array();
    for (const auto& c : plan.chains) {
        nlohmann::ordered_json x;
        x["driver"] = g.node_label(c.tail);
        x["base"] = c.base;
        auto regs = nlohmann::ordered_json::array();
        for (const auto& r : c.registers) {
            nlohmann::ordered_json y;
            y["name"] = r.name;
            y["stage"] = r.stage;
            y["width"] = r.width;
            regs.push_back(y);
            bits += r.width;
        }
        x["registers"] = regs;
        chains.push_back(x);
    }
    j["sp_register_bits"] = bits;
    j["chains"] = chains;
    return j.dump(2);
}

std::string remove_sp_register(const std::string& verilog, const std::string& name, std::optional<uint64_t> bit_mask) {
    SourceUnit unit = parse_source(verilog, "<emitted>");
    if (unit.modules.size() != 1)
        throw DesignError("fault injection expects a single module");
    ModuleDecl& m = unit.modules[0];
    int proc = -1;
    ExprPtr input;
    for (size_t i = 0; i < m.items.size(); ++i) {
        const auto* p = std::get_if<ProcessBlock>(&m.items[i]);
        if (!p || !p->sensitivity.clocked)
            continue;
        StmtPtr s = p->body;
        if (s->kind == StmtKind::Block && s->body.size() == 1)
            s = s->body[0];
        if (s->kind == StmtKind::Assign && s->lhs.name == name && !s->lhs.index && !s->lhs.part &&
            s->rhs->kind == ExprKind::Identifier && name.find("_sp") != std::string::npos) {
            proc = static_cast<int>(i);
            input = s->rhs;
        }
    }
    NetDecl* decl = nullptr;
    for (auto& item : m.items)
        if (auto* d = std::get_if<NetDecl>(&item); d && d->name == name && d->kind == NetKind::Reg)
            decl = d;
    if (proc < 0 || !decl)
        throw DesignError("'" + name + "' is not an SP register of the design");
    const uint32_t w = decl->width;
    const uint64_t full = width_mask(w);
    if (!bit_mask || (*bit_mask & full) == full) {
        decl->kind = NetKind::Wire;
        m.items[proc] = ContinuousAssign{name, input, {}};
    } else {
        const uint64_t mask = *bit_mask & full;
        if (mask == 0)
            throw DesignError("fault mask selects no bit of '" + name + "'");
        std::set<std::string> used;
        for (const auto& p : m.ports)
            used.insert(p.name);
        for (const auto& item : m.items)
            if (const auto* d = std::get_if<NetDecl>(&item))
                used.insert(d->name);
        std::string held = name + "__q";
        for (int k = 2; used.count(held); ++k)
            held = name + "__q" + std::to_string(k);
        decl->kind = NetKind::Wire;
        auto& p = std::get<ProcessBlock>(m.items[proc]);
        StmtPtr s = p.body->kind == StmtKind::Block ? p.body->body[0] : p.body;
        s->lhs.name = held;
        m.items.insert(m.items.begin(), NetDecl{held, NetKind::Reg, w, 1, {}});
        auto rhs = make_binary(BinaryOp::Or, make_binary(BinaryOp::And, ident(held), lit(full & ~mask, w)),
                               make_binary(BinaryOp::And, ident(input->name), lit(mask, w)));
        m.items.push_back(ContinuousAssign{name, rhs, {}});
    }
    annotate_widths(m);
    return print_module(m);
}

}  // namespace cslow
