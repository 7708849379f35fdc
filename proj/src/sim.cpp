#include "cslow/sim.hpp"

#include "cslow/eval.hpp"
#include "cslow/subset.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>
#include <queue>
#include <random>
#include <set>
#include <sstream>

namespace cslow {

namespace {

struct CExpr {
    ExprKind kind = ExprKind::Literal;
    uint32_t width = 0;
    uint64_t value = 0;
    int slot = -1;
    int mem = -1;
    UnaryOp uop = UnaryOp::BitNot;
    BinaryOp bop = BinaryOp::Add;
    std::vector<CExpr> ops;
    uint32_t repeat = 1, msb = 0, lsb = 0;
};

struct CStmt {
    StmtKind kind = StmtKind::Block;
    std::vector<CStmt> body;  // Block; If: [then, else]; Case: item bodies
    bool has_then = false, has_else = false;
    CExpr cond;  // If condition or Case selector
    std::vector<std::vector<uint64_t>> labels;
    int default_item = -1;
    // Assign
    int slot = -1;
    int mem = -1;
    uint32_t target_width = 0;
    bool has_index = false;
    CExpr index;
    std::optional<std::pair<uint32_t, uint32_t>> part;
    CExpr rhs;
    bool nonblocking = false;
};

struct Pending {
    int slot = -1;
    int mem = -1;
    uint64_t index = 0;
    int mode = 0;  // 0 full, 1 bit, 2 part, 3 memory word
    uint32_t msb = 0, lsb = 0;
    uint64_t value = 0;
};

struct CombItem {
    CStmt body;
    std::vector<int> targets;
    std::set<std::string> reads, writes;
};

}  // namespace

struct Simulator::Impl {
    std::map<std::string, int> slot_of;
    std::map<std::string, int> mem_of;
    std::vector<uint64_t> vals;
    std::vector<uint32_t> widths;
    std::vector<std::vector<uint64_t>> mems;
    std::vector<uint32_t> mem_width;
    std::vector<CombItem> comb;  // topological order
    std::vector<CStmt> clocked;
    std::vector<std::string> inputs, outputs;
    std::vector<Pending> pending;
    const ModuleDecl* m = nullptr;

    int new_slot(const std::string& n, uint32_t w) {
        if (auto it = slot_of.find(n); it != slot_of.end())
            return it->second;
        slot_of[n] = static_cast<int>(vals.size());
        vals.push_back(0);
        widths.push_back(w);
        return slot_of[n];
    }

    CExpr compile(const Expr& e, std::set<std::string>* reads) {
        CExpr c;
        c.kind = e.kind;
        c.width = e.width;
        c.value = e.value;
        c.uop = e.unary_op;
        c.bop = e.binary_op;
        c.repeat = e.repeat;
        c.msb = e.msb;
        c.lsb = e.lsb;
        if (e.kind == ExprKind::Identifier || e.kind == ExprKind::BitSelect || e.kind == ExprKind::PartSelect) {
            if (const auto* lp = m->find_param(e.name); lp && e.kind == ExprKind::Identifier) {
                c.kind = ExprKind::Literal;
                c.value = lp->value->value & width_mask(e.width);
                return c;
            }
            if (auto it = mem_of.find(e.name); it != mem_of.end()) {
                c.mem = it->second;
            } else {
                auto it2 = slot_of.find(e.name);
                if (it2 == slot_of.end())
                    throw DesignError("simulator: undeclared identifier '" + e.name + "'");
                c.slot = it2->second;
            }
            if (reads)
                reads->insert(e.name);
        }
        for (const auto& op : e.operands)
            c.ops.push_back(compile(*op, reads));
        return c;
    }

    CStmt compile(const StmtPtr& s, std::set<std::string>* reads, std::set<std::string>* writes) {
        CStmt c;
        if (!s)
            return c;
        c.kind = s->kind;
        switch (s->kind) {
        case StmtKind::Block:
            for (const auto& b : s->body)
                c.body.push_back(compile(b, reads, writes));
            break;
        case StmtKind::If:
            c.cond = compile(*s->cond, reads);
            c.has_then = static_cast<bool>(s->then_stmt);
            c.has_else = static_cast<bool>(s->else_stmt);
            c.body.push_back(compile(s->then_stmt, reads, writes));
            c.body.push_back(compile(s->else_stmt, reads, writes));
            break;
        case StmtKind::Case:
            c.cond = compile(*s->selector, reads);
            for (const auto& item : s->items) {
                std::vector<uint64_t> ls;
                for (const auto& l : item.labels) {
                    auto v = eval_constant(*l, *m);
                    if (!v)
                        throw DesignError("simulator: case label is not constant");
                    ls.push_back(*v);
                }
                if (item.is_default() && c.default_item < 0)
                    c.default_item = static_cast<int>(c.labels.size());
                c.labels.push_back(std::move(ls));
                c.body.push_back(compile(item.body, reads, writes));
            }
            break;
        case StmtKind::Assign: {
            const std::string& n = s->lhs.name;
            if (writes)
                writes->insert(n);
            if (auto it = mem_of.find(n); it != mem_of.end()) {
                c.mem = it->second;
                c.target_width = mem_width[c.mem];
            } else {
                auto it2 = slot_of.find(n);
                if (it2 == slot_of.end())
                    throw DesignError("simulator: undeclared target '" + n + "'");
                c.slot = it2->second;
                c.target_width = widths[c.slot];
            }
            if (s->lhs.index) {
                c.has_index = true;
                c.index = compile(*s->lhs.index, reads);
            }
            c.part = s->lhs.part;
            c.rhs = compile(*s->rhs, reads);
            c.nonblocking = s->nonblocking;
            break;
        }
        }
        return c;
    }

    uint64_t eval(const CExpr& e) const {
        switch (e.kind) {
        case ExprKind::Literal:
            return e.value;
        case ExprKind::Identifier:
            return vals[e.slot];
        case ExprKind::Unary:
            return eval_unary(e.uop, eval(e.ops[0]), e.ops[0].width, e.width);
        case ExprKind::Binary:
            return eval_binary(e.bop, eval(e.ops[0]), e.ops[0].width, eval(e.ops[1]), e.ops[1].width, e.width);
        case ExprKind::Ternary:
            return (eval(e.ops[0]) ? eval(e.ops[1]) : eval(e.ops[2])) & width_mask(e.width);
        case ExprKind::Concat: {
            uint64_t r = 0;
            for (const auto& op : e.ops)
                r = (op.width >= 64 ? 0 : r << op.width) | eval(op);
            return r & width_mask(e.width);
        }
        case ExprKind::Replicate: {
            const uint64_t v = eval(e.ops[0]);
            uint64_t r = 0;
            for (uint32_t i = 0; i < e.repeat; ++i)
                r = (e.ops[0].width >= 64 ? 0 : r << e.ops[0].width) | v;
            return r & width_mask(e.width);
        }
        case ExprKind::BitSelect: {
            const uint64_t idx = eval(e.ops[0]);
            if (e.mem >= 0) {
                const auto& words = mems[e.mem];
                return idx < words.size() ? words[idx] : 0;
            }
            return idx >= 64 ? 0 : (vals[e.slot] >> idx) & 1;
        }
        case ExprKind::PartSelect:
            return e.lsb >= 64 ? 0 : (vals[e.slot] >> e.lsb) & width_mask(e.width);
        }
        return 0;
    }

    static uint64_t merge_part(uint64_t old, uint64_t v, uint32_t msb, uint32_t lsb) {
        const uint64_t mask = width_mask(msb - lsb + 1) << lsb;
        return (old & ~mask) | ((v << lsb) & mask);
    }

    void exec(const CStmt& s) {
        switch (s.kind) {
        case StmtKind::Block:
            for (const auto& b : s.body)
                exec(b);
            return;
        case StmtKind::If:
            if (eval(s.cond)) {
                if (s.has_then)
                    exec(s.body[0]);
            } else if (s.has_else) {
                exec(s.body[1]);
            }
            return;
        case StmtKind::Case: {
            const uint64_t sel = eval(s.cond);
            for (size_t i = 0; i < s.labels.size(); ++i)
                for (uint64_t l : s.labels[i])
                    if (l == sel) {
                        exec(s.body[i]);
                        return;
                    }
            if (s.default_item >= 0)
                exec(s.body[s.default_item]);
            return;
        }
        case StmtKind::Assign: {
            Pending p;
            p.value = eval(s.rhs);
            if (s.mem >= 0) {
                p.mode = 3;
                p.mem = s.mem;
                p.index = eval(s.index);
                p.value &= width_mask(s.target_width);
            } else if (s.has_index) {
                p.mode = 1;
                p.slot = s.slot;
                p.index = eval(s.index);
                p.value &= 1;
            } else if (s.part) {
                p.mode = 2;
                p.slot = s.slot;
                p.msb = s.part->first;
                p.lsb = s.part->second;
            } else {
                p.slot = s.slot;
                p.value &= width_mask(s.target_width);
            }
            if (s.nonblocking)
                pending.push_back(p);
            else
                apply(p);
            return;
        }
        }
    }

    void apply(const Pending& p) {
        switch (p.mode) {
        case 0:
            vals[p.slot] = p.value;
            break;
        case 1:
            if (p.index < widths[p.slot])
                vals[p.slot] = (vals[p.slot] & ~(uint64_t{1} << p.index)) | (p.value << p.index);
            break;
        case 2:
            vals[p.slot] = merge_part(vals[p.slot], p.value, p.msb, p.lsb) & width_mask(widths[p.slot]);
            break;
        case 3:
            if (p.index < mems[p.mem].size())
                mems[p.mem][p.index] = p.value;
            break;
        }
    }
};

Simulator::Simulator(const ModuleDecl& flat_in) : impl_(std::make_unique<Impl>()) {
    auto& s = *impl_;
    ModuleDecl m = flat_in;
    annotate_widths(m);
    s.m = &m;
    auto clocks = clock_names(m);
    for (const auto& p : m.ports) {
        s.new_slot(p.name, p.width);
        if (p.direction == PortDirection::Output)
            s.outputs.push_back(p.name);
        else if (!clocks.count(p.name) && !is_stage_clock(p.name))
            s.inputs.push_back(p.name);
    }
    for (const auto& item : m.items)
        if (const auto* d = std::get_if<NetDecl>(&item)) {
            if (d->kind == NetKind::Memory) {
                s.mem_of[d->name] = static_cast<int>(s.mems.size());
                s.mems.emplace_back(d->depth, 0);
                s.mem_width.push_back(d->width);
            } else {
                s.new_slot(d->name, d->width);
            }
        }
    std::vector<CombItem> comb;
    for (const auto& item : m.items) {
        if (const auto* a = std::get_if<ContinuousAssign>(&item)) {
            CombItem ci;
            auto st = std::make_shared<Stmt>();
            st->kind = StmtKind::Assign;
            st->lhs.name = a->target;
            st->rhs = a->rhs;
            ci.body = s.compile(st, &ci.reads, &ci.writes);
            comb.push_back(std::move(ci));
        } else if (const auto* p = std::get_if<ProcessBlock>(&item)) {
            if (p->sensitivity.clocked) {
                s.clocked.push_back(s.compile(p->body, nullptr, nullptr));
            } else {
                CombItem ci;
                ci.body = s.compile(p->body, &ci.reads, &ci.writes);
                comb.push_back(std::move(ci));
            }
        } else if (std::holds_alternative<Instance>(item)) {
            throw DesignError("simulator: module must be flattened");
        }
    }
    for (auto& ci : comb)
        for (const auto& w : ci.writes)
            ci.targets.push_back(s.slot_of.at(w));
    // order combinational items by data dependence
    const size_t n = comb.size();
    std::vector<std::vector<int>> succ(n);
    std::vector<int> indeg(n, 0);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) {
            if (i == j)
                continue;
            bool dep = std::any_of(comb[i].writes.begin(), comb[i].writes.end(),
                                   [&](const std::string& w) { return comb[j].reads.count(w) > 0; });
            if (dep) {
                succ[i].push_back(static_cast<int>(j));
                ++indeg[j];
            }
        }
    std::priority_queue<int, std::vector<int>, std::greater<int>> ready;
    for (size_t i = 0; i < n; ++i)
        if (indeg[i] == 0)
            ready.push(static_cast<int>(i));
    while (!ready.empty()) {
        int i = ready.top();
        ready.pop();
        s.comb.push_back(std::move(comb[i]));
        for (int j : succ[i])
            if (--indeg[j] == 0)
                ready.push(j);
    }
    if (s.comb.size() != n)
        throw DesignError("simulator: combinational cycle between items");
    s.m = nullptr;  // compiled; the module copy is no longer needed
}

Simulator::~Simulator() = default;
Simulator::Simulator(Simulator&&) noexcept = default;
Simulator& Simulator::operator=(Simulator&&) noexcept = default;

const std::vector<std::string>& Simulator::data_inputs() const { return impl_->inputs; }
const std::vector<std::string>& Simulator::outputs() const { return impl_->outputs; }

uint32_t Simulator::width(const std::string& net) const {
    auto it = impl_->slot_of.find(net);
    if (it == impl_->slot_of.end())
        throw DesignError("simulator: unknown net '" + net + "'");
    return impl_->widths[it->second];
}

void Simulator::set(const std::string& input, uint64_t value) {
    auto it = impl_->slot_of.find(input);
    if (it == impl_->slot_of.end())
        throw DesignError("simulator: unknown input '" + input + "'");
    impl_->vals[it->second] = value & width_mask(impl_->widths[it->second]);
}

uint64_t Simulator::get(const std::string& net) const {
    auto it = impl_->slot_of.find(net);
    if (it == impl_->slot_of.end())
        throw DesignError("simulator: unknown net '" + net + "'");
    return impl_->vals[it->second];
}

void Simulator::settle() {
    for (const auto& ci : impl_->comb) {
        for (int t : ci.targets)
            impl_->vals[t] = 0;
        impl_->exec(ci.body);
    }
}

void Simulator::clock() {
    impl_->pending.clear();
    for (const auto& p : impl_->clocked)
        impl_->exec(p);
    for (const auto& p : impl_->pending)
        impl_->apply(p);
    impl_->pending.clear();
}

Trace simulate(const ModuleDecl& flat, const Stimulus& stim) {
    Simulator sim(flat);
    Trace tr;
    tr.signals = sim.outputs();
    for (const auto& o : tr.signals)
        tr.widths.push_back(sim.width(o));
    for (const auto& in : stim.inputs)
        if (std::find(sim.data_inputs().begin(), sim.data_inputs().end(), in) == sim.data_inputs().end())
            throw DesignError("stimulus drives '" + in + "', which is not a data input");
    tr.cycles.reserve(stim.cycles.size());
    for (const auto& row : stim.cycles) {
        for (size_t i = 0; i < stim.inputs.size(); ++i)
            sim.set(stim.inputs[i], row.at(i));
        sim.settle();
        std::vector<uint64_t> sample;
        sample.reserve(tr.signals.size());
        for (const auto& o : tr.signals)
            sample.push_back(sim.get(o));
        tr.cycles.push_back(std::move(sample));
        sim.clock();
    }
    return tr;
}

Stimulus interleave(const std::vector<Stimulus>& threads, size_t extra) {
    Stimulus out;
    if (threads.empty())
        return out;
    out.inputs = threads[0].inputs;
    size_t len = threads[0].cycles.size();
    for (const auto& t : threads) {
        if (t.inputs != out.inputs)
            throw DesignError("interleave: threads drive different inputs");
        len = std::min(len, t.cycles.size());
    }
    for (size_t c = 0; c < len; ++c)
        for (const auto& t : threads)
            out.cycles.push_back(t.cycles[c]);
    for (size_t c = 0; c < extra; ++c)
        out.cycles.emplace_back(out.inputs.size(), 0);
    return out;
}

std::vector<Trace> deinterleave(const Trace& fast, int threads, const std::map<std::string, int>& latency) {
    std::vector<Trace> out(threads);
    int max_lat = 0;
    for (const auto& s : fast.signals)
        if (auto it = latency.find(s); it != latency.end())
            max_lat = std::max(max_lat, it->second);
    const size_t n = fast.cycles.size();
    size_t len = n > static_cast<size_t>(max_lat + threads - 1)
                     ? (n - static_cast<size_t>(max_lat + threads - 1) + threads - 1) / threads
                     : 0;
    for (int k = 0; k < threads; ++k) {
        out[k].signals = fast.signals;
        out[k].widths = fast.widths;
        for (size_t t = 0; t < len; ++t) {
            std::vector<uint64_t> row;
            for (size_t i = 0; i < fast.signals.size(); ++i) {
                auto it = latency.find(fast.signals[i]);
                const size_t idx = t * threads + k + (it != latency.end() ? it->second : 0);
                row.push_back(idx < n ? fast.cycles[idx][i] : 0);
            }
            out[k].cycles.push_back(std::move(row));
        }
    }
    return out;
}

std::vector<Stimulus> random_streams(const ModuleDecl& flat, int threads, size_t cycles, uint64_t seed,
                                     size_t reset_cycles) {
    Simulator probe(flat);
    std::vector<Stimulus> out;
    for (int k = 0; k < threads; ++k) {
        std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32), static_cast<uint32_t>(k)};
        std::mt19937_64 rng(seq);
        Stimulus s;
        s.inputs = probe.data_inputs();
        std::vector<uint32_t> w;
        for (const auto& in : s.inputs)
            w.push_back(probe.width(in));
        for (size_t t = 0; t < cycles; ++t) {
            std::vector<uint64_t> row;
            for (size_t i = 0; i < s.inputs.size(); ++i) {
                const std::string& n = s.inputs[i];
                const bool high = n == "rst" || n == "reset";
                const bool low = n == "rst_n" || n == "reset_n";
                uint64_t v = rng() & width_mask(w[i]);
                if (high || low) {
                    const bool assert_reset = t < reset_cycles || (v % 32) == 0;
                    v = assert_reset == high ? 1 : 0;
                }
                row.push_back(v);
            }
            s.cycles.push_back(std::move(row));
        }
        out.push_back(std::move(s));
    }
    return out;
}

EquivalenceVerdict check_equivalence(const ModuleDecl& original, const ModuleDecl& cslow, int threads,
                                     const std::map<std::string, int>& latency,
                                     const std::vector<Stimulus>& streams, size_t warmup) {
    if (threads < 1 || static_cast<int>(streams.size()) != threads)
        throw DesignError("check: need one stimulus stream per thread");
    EquivalenceVerdict v;
    v.threads = threads;
    v.warmup = warmup;
    std::vector<Trace> orig;
    for (const auto& s : streams)
        orig.push_back(simulate(original, s));
    int max_lat = 0;
    for (const auto& [_, l] : latency)
        max_lat = std::max(max_lat, l);
    const int search = 2 * threads + max_lat;
    Trace fast = simulate(cslow, interleave(streams, static_cast<size_t>(search + threads)));
    size_t len = orig[0].cycles.size();
    for (const auto& t : orig)
        len = std::min(len, t.cycles.size());
    v.cycles_per_thread = len;

    std::vector<int> col;
    for (const auto& s : orig[0].signals) {
        auto it = std::find(fast.signals.begin(), fast.signals.end(), s);
        if (it == fast.signals.end())
            throw DesignError("check: output '" + s + "' missing from the C-slowed design");
        col.push_back(static_cast<int>(it - fast.signals.begin()));
    }
    auto lat_of = [&](const std::string& s) {
        auto it = latency.find(s);
        return it != latency.end() ? it->second : 0;
    };
    auto fast_value = [&](size_t idx, int c) -> uint64_t {
        return idx < fast.cycles.size() ? fast.cycles[idx][c] : 0;
    };
    for (size_t t = warmup; t < len; ++t)
        for (int k = 0; k < threads; ++k)
            for (size_t i = 0; i < col.size(); ++i) {
                const std::string& sig = orig[0].signals[i];
                const size_t idx = t * threads + k + lat_of(sig);
                const uint64_t want = orig[k].cycles[t][i];
                const uint64_t got = fast_value(idx, col[i]);
                ++v.comparisons;
                if (want != got && !v.witness)
                    v.witness = Mismatch{k, t, idx, sig, want, got};
            }
    for (size_t i = 0; i < col.size(); ++i) {
        OutputOffset o;
        o.signal = orig[0].signals[i];
        o.scheduled = lat_of(o.signal);
        for (int l = 0; l <= search && !o.discovered; ++l) {
            bool ok = true;
            for (size_t t = warmup; t < len && ok; ++t)
                for (int k = 0; k < threads && ok; ++k)
                    ok = orig[k].cycles[t][i] == fast_value(t * threads + k + l, col[i]);
            if (ok)
                o.discovered = l;
        }
        v.offsets.push_back(o);
    }
    v.equivalent = !v.witness && len > warmup;
    if (len <= warmup)
        v.message = "no cycles compared after warm-up";
    else if (v.witness)
        v.message = "mismatch on '" + v.witness->signal + "' of thread " + std::to_string(v.witness->thread) +
                    " at cycle " + std::to_string(v.witness->cycle) + " (fast cycle " +
                    std::to_string(v.witness->fast_cycle) + "): expected " + std::to_string(v.witness->expected) +
                    ", got " + std::to_string(v.witness->actual);
    else
        v.message = "equivalent on " + std::to_string(v.comparisons) + " comparisons";
    return v;
}

std::string trace_json(const Trace& t) {
    nlohmann::ordered_json j;
    j["schema"] = "cslow.trace/1";
    auto sigs = nlohmann::ordered_json::array();
    for (size_t i = 0; i < t.signals.size(); ++i)
        sigs.push_back({{"name", t.signals[i]}, {"width", t.widths[i]}});
    j["signals"] = sigs;
    j["cycles"] = t.cycles;
    return j.dump(1);
}

std::string trace_vcd(const Trace& t, const std::string& scope) {
    std::ostringstream os;
    os << "$timescale 1ns $end\n$scope module " << scope << " $end\n";
    auto id = [](size_t i) {
        std::string s;
        do {
            s.push_back(static_cast<char>('!' + i % 94));
            i /= 94;
        } while (i);
        return s;
    };
    for (size_t i = 0; i < t.signals.size(); ++i)
        os << "$var wire " << t.widths[i] << ' ' << id(i) << ' ' << t.signals[i] << " $end\n";
    os << "$upscope $end\n$enddefinitions $end\n";
    for (size_t c = 0; c < t.cycles.size(); ++c) {
        os << '#' << c << '\n';
        for (size_t i = 0; i < t.signals.size(); ++i) {
            if (c > 0 && t.cycles[c][i] == t.cycles[c - 1][i])
                continue;
            os << 'b';
            const uint32_t w = std::max<uint32_t>(1, t.widths[i]);
            for (uint32_t b = w; b-- > 0;)
                os << ((t.cycles[c][i] >> b) & 1);
            os << ' ' << id(i) << '\n';
        }
    }
    os << '#' << t.cycles.size() << '\n';
    return os.str();
}

std::string verdict_json(const EquivalenceVerdict& v) {
    nlohmann::ordered_json j;
    j["schema"] = "cslow.check/1";
    j["equivalent"] = v.equivalent;
    j["threads"] = v.threads;
    j["cycles_per_thread"] = v.cycles_per_thread;
    j["warmup"] = v.warmup;
    j["comparisons"] = v.comparisons;
    auto offs = nlohmann::ordered_json::array();
    for (const auto& o : v.offsets) {
        nlohmann::ordered_json x;
        x["signal"] = o.signal;
        x["scheduled_latency"] = o.scheduled;
        x["discovered_latency"] = o.discovered ? nlohmann::ordered_json(*o.discovered) : nlohmann::ordered_json(nullptr);
        offs.push_back(x);
    }
    j["outputs"] = offs;
    if (v.witness) {
        nlohmann::ordered_json w;
        w["thread"] = v.witness->thread;
        w["cycle"] = v.witness->cycle;
        w["fast_cycle"] = v.witness->fast_cycle;
        w["signal"] = v.witness->signal;
        w["expected"] = v.witness->expected;
        w["actual"] = v.witness->actual;
        j["witness"] = w;
    } else {
        j["witness"] = nullptr;
    }
    j["message"] = v.message;
    return j.dump(2);
}

}  // namespace cslow
