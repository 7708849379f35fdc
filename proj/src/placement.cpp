#include "cslow/placement.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <optional>

namespace cslow {

int tail_label(const DesignGraph& g, const SegmentAssignment& a, NodeRef n) {
    (void)g;
    return n.seq ? 1 : a.seg[n.id];
}

int head_label(const DesignGraph& g, const SegmentAssignment& a, const Edge& e) {
    if (!e.head.seq)
        return a.seg[e.head.id];
    if (!a.align_outputs && g.seq_nodes[e.head.id].kind == SeqKind::PrimaryOutput)
        return tail_label(g, a, e.tail);
    return a.cmf;
}

int regs_on_edge(const DesignGraph& g, const SegmentAssignment& a, const Edge& e) {
    return head_label(g, a, e) - tail_label(g, a, e.tail);
}

SegmentAssignment initial_assignment(const DesignGraph& g, int cmf, bool align_outputs) {
    if (cmf < 1)
        throw DesignError("cmf must be >= 1");
    SegmentAssignment a;
    a.cmf = cmf;
    a.align_outputs = align_outputs;
    a.seg.assign(g.comb_nodes.size(), cmf);
    return a;
}

namespace {

double node_weight(const DesignGraph& g, int id, const std::vector<double>* w) {
    return w ? (*w)[id] : static_cast<double>(g.comb_nodes[id].weight);
}

// Intra-segment depth ending at each node (including its own weight).
std::vector<double> local_depths(const DesignGraph& g, const SegmentAssignment& a, const std::vector<int>& order,
                                 const std::vector<double>* w) {
    std::vector<double> d(g.comb_nodes.size(), 0);
    for (int id : order) {
        double best = 0;
        for (const auto& o : g.comb_nodes[id].operands) {
            if (o.is_const())
                continue;
            const Edge& e = g.edges[o.edge];
            if (!e.tail.seq && a.seg[e.tail.id] == a.seg[id])
                best = std::max(best, d[e.tail.id]);
        }
        d[id] = best + node_weight(g, id, w);
    }
    return d;
}

bool is_monotone(const DesignGraph& g, const SegmentAssignment& a) {
    for (const auto& e : g.edges)
        if (regs_on_edge(g, a, e) < 0)
            return false;
    for (int s : a.seg)
        if (s < 1 || s > a.cmf)
            return false;
    return true;
}

Objective objective_with_order(const DesignGraph& g, const SegmentAssignment& a, const std::vector<int>& order,
                               const std::vector<double>* w) {
    auto d = local_depths(g, a, order, w);
    std::vector<double> seg(a.cmf + 1, 0);
    for (size_t i = 0; i < d.size(); ++i)
        seg[a.seg[i]] = std::max(seg[a.seg[i]], d[i]);
    Objective o;
    for (int s = 1; s <= a.cmf; ++s) {
        o.bottleneck = std::max(o.bottleneck, seg[s]);
        o.sum_depths += seg[s];
    }
    o.register_bits = sp_register_bits(g, a);
    return o;
}

// ASAP labeling under bound B; nullopt when infeasible.
std::optional<SegmentAssignment> asap_under(const DesignGraph& g, int cmf, bool align, double bound,
                                            const std::vector<int>& order, const std::vector<double>* w) {
    SegmentAssignment a;
    a.cmf = cmf;
    a.align_outputs = align;
    a.seg.assign(g.comb_nodes.size(), 1);
    std::vector<double> d(g.comb_nodes.size(), 0);
    for (int id : order) {
        const double wt = node_weight(g, id, w);
        if (wt > bound)
            return std::nullopt;
        int label = 1;
        for (const auto& o : g.comb_nodes[id].operands)
            if (!o.is_const()) {
                const Edge& e = g.edges[o.edge];
                if (!e.tail.seq)
                    label = std::max(label, a.seg[e.tail.id]);
            }
        double depth = 0;
        for (const auto& o : g.comb_nodes[id].operands)
            if (!o.is_const()) {
                const Edge& e = g.edges[o.edge];
                if (!e.tail.seq && a.seg[e.tail.id] == label)
                    depth = std::max(depth, d[e.tail.id]);
            }
        if (depth + wt > bound) {
            ++label;
            depth = 0;
        }
        if (label > cmf)
            return std::nullopt;
        a.seg[id] = label;
        d[id] = depth + wt;
    }
    return a;
}

}  // namespace

std::vector<double> segment_depth_values(const DesignGraph& g, const SegmentAssignment& a,
                                         const std::vector<double>* w) {
    auto order = topo_order(g);
    auto d = local_depths(g, a, order, w);
    std::vector<double> seg(a.cmf, 0);
    for (size_t i = 0; i < d.size(); ++i)
        seg[a.seg[i] - 1] = std::max(seg[a.seg[i] - 1], d[i]);
    return seg;
}

uint64_t sp_register_bits(const DesignGraph& g, const SegmentAssignment& a) {
    uint64_t bits = 0;
    auto add_tail = [&](NodeRef n, const std::vector<int>& outs) {
        int longest = 0;
        for (int eid : outs)
            longest = std::max(longest, regs_on_edge(g, a, g.edges[eid]));
        bits += static_cast<uint64_t>(longest) * g.node_width(n);
    };
    for (const auto& s : g.seq_nodes)
        add_tail({true, s.id}, s.out_edges);
    for (const auto& c : g.comb_nodes)
        add_tail({false, c.id}, c.out_edges);
    return bits;
}

Objective evaluate_objective(const DesignGraph& g, const SegmentAssignment& a, const std::vector<double>* w) {
    return objective_with_order(g, a, topo_order(g), w);
}

SegmentAssignment min_bottleneck_assignment(const DesignGraph& g, int cmf, bool align, const std::vector<double>* w) {
    auto order = topo_order(g);
    double lo = 0, hi = 0;
    for (size_t i = 0; i < g.comb_nodes.size(); ++i) {
        lo = std::max(lo, node_weight(g, static_cast<int>(i), w));
        hi += node_weight(g, static_cast<int>(i), w);
    }
    if (auto a = asap_under(g, cmf, align, lo, order, w))
        return *a;
    bool integral = w == nullptr;
    if (integral) {
        long long l = static_cast<long long>(lo), h = static_cast<long long>(hi);
        while (l + 1 < h) {  // invariant: l infeasible, h feasible
            long long mid = l + (h - l) / 2;
            if (asap_under(g, cmf, align, static_cast<double>(mid), order, w))
                h = mid;
            else
                l = mid;
        }
        return *asap_under(g, cmf, align, static_cast<double>(h), order, w);
    }
    for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
        double mid = lo + (hi - lo) / 2;
        if (asap_under(g, cmf, align, mid, order, w))
            hi = mid;
        else
            lo = mid;
    }
    return *asap_under(g, cmf, align, hi, order, w);
}

BalanceResult balance_traced(const DesignGraph& g, const SegmentAssignment& input, const std::vector<double>* w) {
    if (input.seg.size() != g.comb_nodes.size() || input.cmf < 1 || !is_monotone(g, input))
        throw DesignError("balance: illegal input assignment");
    const auto order = topo_order(g);
    BalanceResult r;
    SegmentAssignment cur = input;
    Objective obj = objective_with_order(g, cur, order, w);
    r.history.push_back(obj);
    if (cur.cmf == 1) {
        r.assignment = cur;
        return r;
    }
    SegmentAssignment seed = min_bottleneck_assignment(g, cur.cmf, cur.align_outputs, w);
    Objective seed_obj = objective_with_order(g, seed, order, w);
    if (seed_obj < obj) {
        cur = seed;
        obj = seed_obj;
        r.history.push_back(obj);
    }
    // predecessor / successor labels bound each move
    for (;;) {
        std::optional<Objective> best;
        int best_node = -1, best_label = 0;
        for (int id : order) {
            int lo = 1, hi = cur.cmf;
            for (const auto& o : g.comb_nodes[id].operands)
                if (!o.is_const()) {
                    const Edge& e = g.edges[o.edge];
                    if (!e.tail.seq)
                        lo = std::max(lo, cur.seg[e.tail.id]);
                }
            for (int eid : g.comb_nodes[id].out_edges) {
                const Edge& e = g.edges[eid];
                if (!e.head.seq)
                    hi = std::min(hi, cur.seg[e.head.id]);
            }
            const int s = cur.seg[id];
            for (int cand : {s - 1, s + 1}) {
                if (cand < lo || cand > hi)
                    continue;
                cur.seg[id] = cand;
                Objective o = objective_with_order(g, cur, order, w);
                cur.seg[id] = s;
                if (o < obj && (!best || o < *best || (o == *best && id < best_node))) {
                    best = o;
                    best_node = id;
                    best_label = cand;
                }
            }
        }
        if (!best)
            break;
        cur.seg[best_node] = best_label;
        obj = *best;
        r.history.push_back(obj);
    }
    r.assignment = cur;
    return r;
}

SegmentAssignment balance(const DesignGraph& g, const SegmentAssignment& a) {
    return balance_traced(g, a).assignment;
}

LegalityVerdict legality_check(const DesignGraph& g, const SegmentAssignment& a, uint64_t path_limit) {
    LegalityVerdict v;
    if (a.seg.size() != g.comb_nodes.size()) {
        v.ok = false;
        v.violations.push_back("assignment size does not match the graph");
        return v;
    }
    for (size_t i = 0; i < a.seg.size(); ++i)
        if (a.seg[i] < 1 || a.seg[i] > a.cmf) {
            v.ok = false;
            v.violations.push_back("node " + g.node_label({false, static_cast<int>(i)}) + " has label " +
                                   std::to_string(a.seg[i]) + " outside 1.." + std::to_string(a.cmf));
        }
    if (!v.ok)
        return v;
    for (const auto& e : g.edges)
        if (regs_on_edge(g, a, e) < 0) {
            v.ok = false;
            v.violations.push_back("monotonicity violated on edge " + std::to_string(e.id) + ": " +
                                   g.node_label(e.tail) + " (segment " + std::to_string(tail_label(g, a, e.tail)) +
                                   ") -> " + g.node_label(e.head) + " (segment " +
                                   std::to_string(head_label(g, a, e)) + ")");
        }
    auto paths = enumerate_paths(g, path_limit);
    if (!paths)
        return v;
    v.path_oracle_used = true;
    for (const auto& p : *paths) {
        ++v.paths_checked;
        int sum = 0;
        for (int eid : p.edges)
            sum += regs_on_edge(g, a, g.edges[eid]);
        const Edge& last = g.edges[p.edges.back()];
        const bool free_output = !a.align_outputs && g.seq_nodes[last.head.id].kind == SeqKind::PrimaryOutput;
        if (!free_output && sum != a.cmf - 1) {
            v.ok = false;
            std::string w = "path with " + std::to_string(sum) + " SP registers (expected " +
                            std::to_string(a.cmf - 1) + "):";
            for (const auto& n : p.nodes)
                w += " " + g.node_label(n);
            v.violations.push_back(w);
        }
    }
    return v;
}

CutReport segment_depths(const DesignGraph& g, const SegmentAssignment& a) {
    auto legal = legality_check(g, a, 0);
    if (!legal.ok)
        throw DesignError("segment_depths: illegal assignment: " + legal.violations.front());
    const auto order = topo_order(g);
    const size_t n = g.comb_nodes.size();
    CutReport r;
    r.cmf = a.cmf;
    std::vector<double> d = local_depths(g, a, order, nullptr);
    // memory reach: depth of paths starting at a memory read port within segment 1
    std::vector<double> from_mem(n, -1);
    for (int id : order) {
        for (const auto& o : g.comb_nodes[id].operands) {
            if (o.is_const())
                continue;
            const Edge& e = g.edges[o.edge];
            if (e.tail.seq && g.seq_nodes[e.tail.id].kind == SeqKind::MemoryReadPort && a.seg[id] == 1)
                from_mem[id] = std::max(from_mem[id], 0.0);
            else if (!e.tail.seq && a.seg[e.tail.id] == a.seg[id] && from_mem[e.tail.id] >= 0)
                from_mem[id] = std::max(from_mem[id], from_mem[e.tail.id]);
        }
        if (from_mem[id] >= 0)
            from_mem[id] += g.comb_nodes[id].weight;
    }
    for (int s = 1; s <= a.cmf; ++s) {
        SegmentInfo info;
        info.segment = s;
        int end = -1;
        for (size_t i = 0; i < n; ++i)
            if (a.seg[i] == s && (end < 0 || d[i] > d[end]))
                end = static_cast<int>(i);
        if (end >= 0) {
            info.depth = static_cast<uint32_t>(d[end]);
            std::vector<NodeRef> w{{false, end}};
            int cur = end;
            for (;;) {
                int pick = -1;
                const double need = d[cur] - g.comb_nodes[cur].weight;
                for (const auto& o : g.comb_nodes[cur].operands) {
                    if (o.is_const())
                        continue;
                    const Edge& e = g.edges[o.edge];
                    if (!e.tail.seq && a.seg[e.tail.id] == s && d[e.tail.id] == need && (pick < 0 || e.tail.id < pick))
                        pick = e.tail.id;
                }
                if (pick < 0 || need <= 0)
                    break;
                w.push_back({false, pick});
                cur = pick;
            }
            std::reverse(w.begin(), w.end());
            info.witness = w;
            for (size_t i = 0; i < n; ++i)
                if (a.seg[i] == s && info.depth > 0 && from_mem[i] == info.depth)
                    info.memory_bounded = true;
            if (s == a.cmf && info.depth > 0)
                for (const auto& sn : g.seq_nodes) {
                    if (sn.kind != SeqKind::MemoryReadPort && sn.kind != SeqKind::MemoryWritePort)
                        continue;
                    for (const auto& o : sn.inputs)
                        if (!o.is_const()) {
                            const Edge& e = g.edges[o.edge];
                            if (!e.tail.seq && a.seg[e.tail.id] == s && d[e.tail.id] == info.depth)
                                info.memory_bounded = true;
                        }
                }
        }
        r.segments.push_back(info);
    }
    for (const auto& s : r.segments)
        if (s.depth > r.segments[r.bottleneck_segment - 1].depth)
            r.bottleneck_segment = s.segment;
    for (const auto& e : g.edges) {
        const int k = regs_on_edge(g, a, e);
        if (k > 0)
            r.cuts.push_back({e.id, k, tail_label(g, a, e.tail)});
    }
    r.total_register_bits = sp_register_bits(g, a);
    uint32_t t = 0;
    {
        std::vector<uint32_t> din(n, 0);
        for (int id : order) {
            uint32_t best = 0;
            for (const auto& o : g.comb_nodes[id].operands)
                if (!o.is_const()) {
                    const Edge& e = g.edges[o.edge];
                    if (!e.tail.seq)
                        best = std::max(best, din[e.tail.id]);
                }
            din[id] = best + g.comb_nodes[id].weight;
            t = std::max(t, din[id]);
        }
    }
    const uint32_t share = (t + a.cmf - 1) / a.cmf;
    for (const auto& c : g.comb_nodes)
        if (c.weight > share && a.cmf > 1)
            r.unsplittable_nodes.push_back(c.id);
    return r;
}

std::string cut_report_json(const DesignGraph& g, const CutReport& r) {
    nlohmann::ordered_json j;
    j["schema"] = "cslow.cut_report/1";
    j["cmf"] = r.cmf;
    j["bottleneck_segment"] = r.bottleneck_segment;
    j["total_register_bits"] = r.total_register_bits;
    j["reoptimized"] = r.reoptimized;
    auto segs = nlohmann::ordered_json::array();
    for (const auto& s : r.segments) {
        nlohmann::ordered_json x;
        x["segment"] = s.segment;
        x["depth_2ild"] = s.depth;
        x["memory_bounded"] = s.memory_bounded;
        auto w = nlohmann::ordered_json::array();
        for (const auto& n : s.witness)
            w.push_back(g.node_label(n));
        x["witness"] = w;
        segs.push_back(x);
    }
    j["segments"] = segs;
    auto cuts = nlohmann::ordered_json::array();
    for (const auto& c : r.cuts) {
        const Edge& e = g.edges[c.edge];
        nlohmann::ordered_json x;
        x["edge"] = c.edge;
        x["tail"] = g.node_label(e.tail);
        x["head"] = g.node_label(e.head);
        x["signal"] = e.via_name;
        x["width"] = e.width;
        x["registers"] = c.registers;
        auto stages = nlohmann::ordered_json::array();
        for (int k = 0; k < c.registers; ++k)
            stages.push_back(c.first_stage + k);
        x["stages"] = stages;
        cuts.push_back(x);
    }
    j["cuts"] = cuts;
    auto un = nlohmann::ordered_json::array();
    for (int id : r.unsplittable_nodes)
        un.push_back(g.node_label({false, id}));
    j["unsplittable_nodes"] = un;
    j["notes"] = r.notes;
    return j.dump(2);
}

BackAnnotation read_back_annotation(const std::string& text, const std::string& source) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DesignError("back-annotation " + source + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("segments") || !j["segments"].is_object())
        throw DesignError("back-annotation " + source + ": expected { \"segments\": { ... } }");
    BackAnnotation ann;
    ann.source = source;
    for (const auto& [k, v] : j["segments"].items()) {
        int id = 0;
        try {
            size_t pos = 0;
            id = std::stoi(k, &pos);
            if (pos != k.size())
                throw std::invalid_argument(k);
        } catch (const std::exception&) {
            throw DesignError("back-annotation " + source + ": segment id '" + k + "' is not an integer");
        }
        if (!v.is_number() || !(v.get<double>() > 0))
            throw DesignError("back-annotation " + source + ": delay of segment " + k + " must be a positive number");
        ann.segment_ps[id] = v.get<double>();
    }
    return ann;
}

SegmentAssignment reoptimize_with_sta(const DesignGraph& g, const SegmentAssignment& a, const BackAnnotation& ann,
                                      const CostTable& table) {
    if (ann.segment_ps.empty())
        return a;
    for (const auto& [s, ps] : ann.segment_ps)
        if (s < 1 || s > a.cmf)
            throw DesignError("back-annotation references unknown segment " + std::to_string(s));
    auto predicted = segment_depth_values(g, a);
    std::vector<double> w(g.comb_nodes.size());
    for (size_t i = 0; i < w.size(); ++i) {
        const int s = a.seg[i];
        double factor = 1.0;
        if (auto it = ann.segment_ps.find(s); it != ann.segment_ps.end() && predicted[s - 1] > 0)
            factor = it->second / (predicted[s - 1] * table.mu_lut_ps);
        w[i] = g.comb_nodes[i].weight * factor;
    }
    return balance_traced(g, a, &w).assignment;
}

}  // namespace cslow
