#include "cslow/subset.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>

namespace cslow {

namespace {

struct Checker {
    explicit Checker(const ModuleDecl& mod) : m(mod) {}

    const ModuleDecl& m;
    std::vector<Diagnostic> diags;

    void error(Span span, std::string msg) { diags.push_back({Severity::Error, span, std::move(msg)}); }

    bool is_memory(const std::string& n) const {
        const auto* d = m.find_net(n);
        return d && d->kind == NetKind::Memory;
    }
    bool is_param(const std::string& n) const { return m.find_param(n) != nullptr; }
    bool is_input(const std::string& n) const {
        const auto* p = m.find_port(n);
        return p && p->direction == PortDirection::Input;
    }
    // true for `reg` nets, memories and `output reg` ports
    bool is_reg(const std::string& n) const {
        if (const auto* p = m.find_port(n))
            return p->direction == PortDirection::Output && p->is_reg;
        const auto* d = m.find_net(n);
        return d && d->kind != NetKind::Wire;
    }

    void check_expr(const ExprPtr& e, bool memory_read_allowed) {
        if (!e)
            return;
        switch (e->kind) {
        case ExprKind::Identifier:
            if (!m.is_declared(e->name))
                error(e->span, "undeclared identifier '" + e->name + "'");
            else if (is_memory(e->name))
                error(e->span, "memory '" + e->name + "' used without an index");
            break;
        case ExprKind::BitSelect:
            if (!m.is_declared(e->name))
                error(e->span, "undeclared identifier '" + e->name + "'");
            else if (is_param(e->name))
                error(e->span, "select on localparam '" + e->name + "'");
            else if (is_memory(e->name) && !memory_read_allowed)
                error(e->span, "memory '" + e->name +
                                   "' may only be read by a top-level `r <= " + e->name +
                                   "[addr];` in a clocked process");
            break;
        case ExprKind::PartSelect:
            if (!m.is_declared(e->name)) {
                error(e->span, "undeclared identifier '" + e->name + "'");
            } else if (is_param(e->name) || is_memory(e->name)) {
                error(e->span, "part-select on '" + e->name + "' is not supported");
            } else if (e->msb < e->lsb || e->msb >= m.width_of(e->name)) {
                error(e->span, "part-select [" + std::to_string(e->msb) + ":" + std::to_string(e->lsb) +
                                   "] out of range for '" + e->name + "'");
            }
            break;
        default:
            break;
        }
        if (e->width > 64)
            error(e->span, "expression wider than 64 bits");
        if (e->kind == ExprKind::Replicate && e->repeat == 0)
            error(e->span, "zero replication count");
        for (const auto& op : e->operands)
            check_expr(op, false);
    }

    void collect_reads(const ExprPtr& e, std::vector<std::pair<std::string, Span>>& out) const {
        for_each_expr(e, [&](const Expr& x) {
            if (x.kind == ExprKind::Identifier || x.kind == ExprKind::BitSelect || x.kind == ExprKind::PartSelect)
                if (!is_param(x.name))
                    out.emplace_back(x.name, x.span);
        });
    }

    bool is_constant(const ExprPtr& e) const {
        bool ok = true;
        for_each_expr(e, [&](const Expr& x) {
            if (x.kind == ExprKind::Identifier && !is_param(x.name))
                ok = false;
            if (x.kind == ExprKind::BitSelect || x.kind == ExprKind::PartSelect)
                ok = false;
        });
        return ok;
    }

    // --- combinational processes: definite assignment ------------------------

    using NameSet = std::set<std::string>;

    NameSet comb_flow(const StmtPtr& s, NameSet in, const NameSet& targets) {
        if (!s)
            return in;
        auto check_reads = [&](const ExprPtr& e) {
            std::vector<std::pair<std::string, Span>> reads;
            collect_reads(e, reads);
            for (const auto& [n, sp] : reads)
                if (targets.count(n) && !in.count(n))
                    error(sp, "'" + n +
                                  "' is read before it is assigned in a combinational process "
                                  "(combinational cycle or latch)");
        };
        switch (s->kind) {
        case StmtKind::Block:
            for (const auto& b : s->body)
                in = comb_flow(b, std::move(in), targets);
            return in;
        case StmtKind::If: {
            check_reads(s->cond);
            NameSet a = comb_flow(s->then_stmt, in, targets);
            NameSet b = s->else_stmt ? comb_flow(s->else_stmt, in, targets) : in;
            NameSet out;
            std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.begin()));
            return out;
        }
        case StmtKind::Case: {
            check_reads(s->selector);
            for (const auto& item : s->items)
                for (const auto& l : item.labels)
                    check_reads(l);
            bool has_default = false;
            std::optional<NameSet> acc;
            for (const auto& item : s->items) {
                has_default |= item.is_default();
                NameSet r = comb_flow(item.body, in, targets);
                if (!acc) {
                    acc = std::move(r);
                } else {
                    NameSet out;
                    std::set_intersection(acc->begin(), acc->end(), r.begin(), r.end(),
                                          std::inserter(out, out.begin()));
                    acc = std::move(out);
                }
            }
            if (!acc || !has_default) {
                NameSet base = acc ? *acc : in;
                NameSet out;
                std::set_intersection(base.begin(), base.end(), in.begin(), in.end(),
                                      std::inserter(out, out.begin()));
                return out;
            }
            return *acc;
        }
        case StmtKind::Assign:
            check_reads(s->rhs);
            check_reads(s->lhs.index);
            if (s->lhs.index && !in.count(s->lhs.name))
                error(s->lhs.span, "indexed assignment to '" + s->lhs.name +
                                       "' before a full assignment infers a latch");
            in.insert(s->lhs.name);
            return in;
        }
        return in;
    }

    // --- per-item checks -------------------------------------------------------

    struct ItemInfo {
        Span span;
        bool comb = false;
        std::set<std::string> writes;
        std::set<std::string> reads;  // external reads (for the cycle check)
    };
    std::vector<ItemInfo> items;
    std::map<std::string, std::vector<size_t>> drivers;
    std::map<std::string, int> memory_reads, memory_writes;
    std::string clock;
    Span clock_span;

    void check_lvalue(const LValue& lv, bool in_process, bool clocked) {
        if (!m.is_declared(lv.name)) {
            error(lv.span, "assignment to undeclared '" + lv.name + "'");
            return;
        }
        if (is_param(lv.name)) {
            error(lv.span, "assignment to localparam '" + lv.name + "'");
            return;
        }
        if (is_input(lv.name)) {
            error(lv.span, "assignment to input port '" + lv.name + "'");
            return;
        }
        if (in_process && !is_reg(lv.name))
            error(lv.span, "procedural assignment to wire '" + lv.name + "'");
        if (lv.part)
            error(lv.span, "part-select assignment to '" + lv.name +
                               "': partial drivers are not supported");
        if (is_memory(lv.name)) {
            if (!lv.index)
                error(lv.span, "memory '" + lv.name + "' assigned without an index");
            else if (!clocked)
                error(lv.span, "memory '" + lv.name + "' written outside a clocked process");
            else
                ++memory_writes[lv.name];
        }
        if (lv.index)
            check_expr(lv.index, false);
    }

    void check_memory_index(const std::string& mem, const ExprPtr& index, Span span) {
        const auto* d = m.find_net(mem);
        if (!d || !index)
            return;
        if (index->width > ceil_log2(d->depth))
            error(span, "address of memory '" + mem + "' is " + std::to_string(index->width) +
                            " bits wide; at most " + std::to_string(ceil_log2(d->depth)) + " allowed");
    }

    void check_process(const ProcessBlock& p, size_t idx) {
        ItemInfo info;
        info.span = p.span;
        info.comb = !p.sensitivity.clocked;
        const bool clocked = p.sensitivity.clocked;

        if (clocked) {
            if (!is_input(p.sensitivity.clock))
                error(p.span, "clock '" + p.sensitivity.clock + "' must be an input port");
            if (is_stage_clock(p.sensitivity.clock)) {
                // SP stage clocks are phases of the main domain
            } else if (clock.empty()) {
                clock = p.sensitivity.clock;
                clock_span = p.span;
            } else if (clock != p.sensitivity.clock) {
                error(p.span, "second clock domain '" + p.sensitivity.clock + "' (module already uses '" +
                                  clock + "')");
            }
            if (p.sensitivity.async_reset)
                error(p.span, "asynchronous reset '" + *p.sensitivity.async_reset +
                                  "' is not supported; use a synchronous reset");
        }

        // Top-level statements: memory reads are allowed only there.
        std::set<const Stmt*> top_level;
        if (p.body) {
            if (p.body->kind == StmtKind::Block)
                for (const auto& b : p.body->body)
                    top_level.insert(b.get());
            else
                top_level.insert(p.body.get());
        }

        std::map<std::string, int> assign_count;
        std::set<std::string> memory_read_targets;
        for_each_stmt(p.body, [&](const Stmt& s) {
            if (s.kind == StmtKind::If) {
                check_expr(s.cond, false);
            } else if (s.kind == StmtKind::Case) {
                check_expr(s.selector, false);
                for (const auto& item : s.items)
                    for (const auto& l : item.labels) {
                        check_expr(l, false);
                        if (!is_constant(l))
                            error(l->span, "case label must be a constant");
                    }
            } else if (s.kind == StmtKind::Assign) {
                check_lvalue(s.lhs, true, clocked);
                ++assign_count[s.lhs.name];
                info.writes.insert(s.lhs.name);
                if (clocked && !s.nonblocking)
                    error(s.span, "blocking assignment in a clocked process");
                if (!clocked && s.nonblocking)
                    error(s.span, "non-blocking assignment in a combinational process");
                if (s.unit_delay && !clocked)
                    error(s.span, "`#1` delay outside a clocked process");
                const bool mem_read = s.rhs && s.rhs->kind == ExprKind::BitSelect && is_memory(s.rhs->name);
                const bool ok_read = mem_read && clocked && top_level.count(&s) && !s.lhs.index && !s.lhs.part &&
                                     !is_memory(s.lhs.name);
                check_expr(s.rhs, ok_read);
                if (ok_read) {
                    ++memory_reads[s.rhs->name];
                    memory_read_targets.insert(s.lhs.name);
                    check_memory_index(s.rhs->name, s.rhs->operands[0], s.rhs->span);
                    if (m.width_of(s.lhs.name) != m.find_net(s.rhs->name)->width)
                        error(s.span, "memory read data register '" + s.lhs.name +
                                          "' must have the memory word width");
                }
                if (is_memory(s.lhs.name) && s.lhs.index)
                    check_memory_index(s.lhs.name, s.lhs.index, s.lhs.span);
            }
        });
        for (const auto& t : memory_read_targets)
            if (assign_count[t] != 1)
                error(p.span, "memory read data register '" + t + "' must have exactly one assignment");

        if (!clocked) {
            NameSet targets(info.writes.begin(), info.writes.end());
            for (const auto& t : targets)
                if (is_memory(t))
                    error(p.span, "memory '" + t + "' accessed in a combinational process");
            NameSet out = comb_flow(p.body, {}, targets);
            for (const auto& t : targets)
                if (!out.count(t))
                    error(p.span, "latch inferred for '" + t + "': not assigned on every path");
            std::vector<std::pair<std::string, Span>> reads;
            for_each_stmt(p.body, [&](const Stmt& s) {
                collect_reads(s.cond, reads);
                collect_reads(s.selector, reads);
                for (const auto& item : s.items)
                    for (const auto& l : item.labels)
                        collect_reads(l, reads);
                collect_reads(s.rhs, reads);
                collect_reads(s.lhs.index, reads);
            });
            for (const auto& [n, sp] : reads)
                if (!targets.count(n))
                    info.reads.insert(n);
        }
        for (const auto& w : info.writes)
            drivers[w].push_back(idx);
        items.push_back(std::move(info));
    }

    void check_assign(const ContinuousAssign& a, size_t idx) {
        ItemInfo info;
        info.span = a.span;
        info.comb = true;
        LValue lv{a.target, nullptr, std::nullopt, a.span};
        if (m.is_declared(a.target) && is_reg(a.target))
            error(a.span, "continuous assignment to reg '" + a.target + "'");
        check_lvalue(lv, false, false);
        check_expr(a.rhs, false);
        info.writes.insert(a.target);
        std::vector<std::pair<std::string, Span>> reads;
        collect_reads(a.rhs, reads);
        for (const auto& r : reads)
            info.reads.insert(r.first);
        drivers[a.target].push_back(idx);
        items.push_back(std::move(info));
    }

    void check_cycles() {
        // edges: comb item -> comb items reading its outputs
        std::map<std::string, size_t> comb_driver;
        for (size_t i = 0; i < items.size(); ++i)
            if (items[i].comb)
                for (const auto& w : items[i].writes)
                    comb_driver[w] = i;
        const size_t n = items.size();
        std::vector<std::vector<size_t>> deps(n);
        for (size_t i = 0; i < n; ++i) {
            if (!items[i].comb)
                continue;
            for (const auto& r : items[i].reads)
                if (auto it = comb_driver.find(r); it != comb_driver.end())
                    deps[i].push_back(it->second);
            std::sort(deps[i].begin(), deps[i].end());
            deps[i].erase(std::unique(deps[i].begin(), deps[i].end()), deps[i].end());
        }
        std::vector<int> color(n, 0);
        std::vector<size_t> stack;
        bool reported = false;
        std::function<void(size_t)> dfs = [&](size_t u) {
            color[u] = 1;
            stack.push_back(u);
            for (size_t v : deps[u]) {
                if (reported)
                    break;
                if (color[v] == 1) {
                    auto it = std::find(stack.begin(), stack.end(), v);
                    std::ostringstream os;
                    os << "combinational cycle through ";
                    bool first = true;
                    for (auto j = it; j != stack.end(); ++j) {
                        os << (first ? "" : " <- ") << *items[*j].writes.begin();
                        first = false;
                    }
                    os << " <- " << *items[v].writes.begin();
                    error(items[v].span, os.str());
                    reported = true;
                } else if (color[v] == 0) {
                    dfs(v);
                }
            }
            stack.pop_back();
            color[u] = 2;
        };
        for (size_t i = 0; i < n && !reported; ++i)
            if (items[i].comb && color[i] == 0)
                dfs(i);
    }

    void run() {
        std::map<std::string, int> names;
        for (const auto& p : m.ports) {
            if (++names[p.name] == 2)
                error(p.span, "duplicate declaration of '" + p.name + "'");
            if (p.width == 0 || p.width > 64)
                error(p.span, "port '" + p.name + "' width must be 1..64");
        }
        for (const auto& item : m.items) {
            if (const auto* d = std::get_if<NetDecl>(&item)) {
                if (++names[d->name] == 2)
                    error(d->span, "duplicate declaration of '" + d->name + "'");
                if (d->width == 0 || d->width > 64)
                    error(d->span, "net '" + d->name + "' width must be 1..64");
                if (d->kind == NetKind::Memory && (d->depth < 2 || (d->depth & (d->depth - 1))))
                    error(d->span, "memory '" + d->name + "' depth must be a power of two >= 2");
            } else if (const auto* lp = std::get_if<LocalParam>(&item)) {
                if (++names[lp->name] == 2)
                    error(lp->span, "duplicate declaration of '" + lp->name + "'");
            }
        }
        for (size_t i = 0; i < m.items.size(); ++i) {
            const auto& item = m.items[i];
            if (const auto* a = std::get_if<ContinuousAssign>(&item))
                check_assign(*a, items.size());
            else if (const auto* p = std::get_if<ProcessBlock>(&item))
                check_process(*p, items.size());
            else if (const auto* inst = std::get_if<Instance>(&item))
                for (const auto& c : inst->connections)
                    check_expr(c.expr, false);
        }
        for (const auto& [name, ds] : drivers) {
            if (is_memory(name))
                continue;
            if (ds.size() > 1)
                error(items[ds[1]].span, "'" + name + "' is driven by more than one process or assignment");
        }
        for (const auto& [mem, n] : memory_writes)
            if (n > 1)
                error(m.span, "memory '" + mem + "' has more than one write statement");
        for (const auto& [mem, n] : memory_reads)
            if (n > 1)
                error(m.span, "memory '" + mem + "' has more than one read port");
        for (const auto& [mem, ds] : drivers)
            if (is_memory(mem) && std::set<size_t>(ds.begin(), ds.end()).size() > 1)
                error(items[ds[1]].span, "memory '" + mem + "' is written by more than one process");
        check_cycles();
    }
};

void check_instances(const SourceUnit& unit, const ModuleDecl& m, std::vector<Diagnostic>& out) {
    for (const auto& item : m.items) {
        const auto* inst = std::get_if<Instance>(&item);
        if (!inst)
            continue;
        const ModuleDecl* child = unit.find_module(inst->module_name);
        if (!child) {
            out.push_back({Severity::Error, inst->span, "unknown module '" + inst->module_name + "'"});
            continue;
        }
        for (const auto& c : inst->connections) {
            const Port* p = child->find_port(c.port);
            if (!p) {
                out.push_back({Severity::Error, inst->span,
                               "module '" + child->name + "' has no port '" + c.port + "'"});
                continue;
            }
            if (p->direction == PortDirection::Output && c.expr && c.expr->kind != ExprKind::Identifier)
                out.push_back({Severity::Error, inst->span,
                               "output port '" + c.port + "' must connect to a plain identifier"});
        }
    }
}

bool reaches(const SourceUnit& unit, const std::string& from, const std::string& target,
             std::set<std::string>& seen) {
    const ModuleDecl* m = unit.find_module(from);
    if (!m || !seen.insert(from).second)
        return false;
    for (const auto& item : m->items)
        if (const auto* inst = std::get_if<Instance>(&item)) {
            if (inst->module_name == target)
                return true;
            if (reaches(unit, inst->module_name, target, seen))
                return true;
        }
    return false;
}

}  // namespace

std::vector<Diagnostic> subset_check(const ModuleDecl& module) {
    Checker c(module);
    c.run();
    auto out = std::move(c.diags);
    std::stable_sort(out.begin(), out.end(), [](const Diagnostic& a, const Diagnostic& b) {
        return a.span.begin.offset < b.span.begin.offset;
    });
    return out;
}

std::vector<Diagnostic> subset_check(const SourceUnit& unit) {
    std::vector<Diagnostic> out;
    std::set<std::string> names;
    for (const auto& m : unit.modules) {
        if (!names.insert(m.name).second)
            out.push_back({Severity::Error, m.span, "duplicate module '" + m.name + "'"});
        auto d = subset_check(m);
        out.insert(out.end(), d.begin(), d.end());
        check_instances(unit, m, out);
        std::set<std::string> seen;
        if (reaches(unit, m.name, m.name, seen))
            out.push_back({Severity::Error, m.span, "recursive instantiation of module '" + m.name + "'"});
    }
    return out;
}

bool is_stage_clock(const std::string& name) {
    static const std::string prefix = "clk_sp";
    if (name.size() <= prefix.size() || name.compare(0, prefix.size(), prefix) != 0)
        return false;
    return std::all_of(name.begin() + prefix.size(), name.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::set<std::string> clock_names(const ModuleDecl& module) {
    std::set<std::string> out;
    for (const auto& item : module.items)
        if (const auto* p = std::get_if<ProcessBlock>(&item); p && p->sensitivity.clocked)
            out.insert(p->sensitivity.clock);
    return out;
}

namespace {

ModuleDecl flatten_rec(const SourceUnit& unit, const ModuleDecl& m, std::vector<std::string>& stack) {
    ModuleDecl out;
    out.name = m.name;
    out.ports = m.ports;
    out.span = m.span;
    for (const auto& item : m.items) {
        const auto* inst = std::get_if<Instance>(&item);
        if (!inst) {
            out.items.push_back(clone(item));
            continue;
        }
        const ModuleDecl* child = unit.find_module(inst->module_name);
        if (!child)
            throw DesignError("unknown module '" + inst->module_name + "'");
        if (std::find(stack.begin(), stack.end(), child->name) != stack.end())
            throw DesignError("recursive instantiation of module '" + child->name + "'");
        stack.push_back(child->name);
        ModuleDecl flat = flatten_rec(unit, *child, stack);
        stack.pop_back();

        const std::string prefix = inst->instance_name + "__";
        std::map<std::string, std::string> subst;
        std::vector<ModuleItem> glue;
        for (const auto& p : flat.ports) {
            const Connection* conn = nullptr;
            for (const auto& c : inst->connections)
                if (c.port == p.name)
                    conn = &c;
            const std::string inner = prefix + p.name;
            if (p.direction == PortDirection::Input) {
                if (conn && conn->expr && conn->expr->kind == ExprKind::Identifier &&
                    m.width_of(conn->expr->name) == p.width) {
                    subst[p.name] = conn->expr->name;
                    continue;
                }
                glue.push_back(NetDecl{inner, NetKind::Wire, p.width, 1, inst->span});
                ExprPtr rhs = (conn && conn->expr) ? clone(conn->expr) : make_literal(0, p.width);
                glue.push_back(ContinuousAssign{inner, rhs, inst->span});
            } else {
                glue.push_back(NetDecl{inner, p.is_reg ? NetKind::Reg : NetKind::Wire, p.width, 1, inst->span});
                if (conn && conn->expr)
                    glue.push_back(ContinuousAssign{conn->expr->name, make_identifier(inner), inst->span});
            }
        }
        auto fn = [&](const std::string& n) {
            auto it = subst.find(n);
            return it != subst.end() ? it->second : prefix + n;
        };
        for (auto& g : glue)
            out.items.push_back(std::move(g));
        for (auto& ci : flat.items) {
            rename_identifiers(ci, fn);
            out.items.push_back(std::move(ci));
        }
    }
    annotate_widths(out);
    return out;
}

}  // namespace

ModuleDecl flatten(const SourceUnit& unit, const std::string& top) {
    const ModuleDecl* m = unit.find_module(top);
    if (!m)
        throw DesignError("top module '" + top + "' not found");
    std::vector<std::string> stack{top};
    return flatten_rec(unit, *m, stack);
}

}  // namespace cslow
