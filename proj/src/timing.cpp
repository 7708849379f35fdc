#include "cslow/timing.hpp"
#include "cslow/metrics.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace cslow {

namespace {

using nlohmann::json;

template <typename T>
T get_as(const json& v, const std::string& key) {
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        throw DesignError("cost table: wrong type for '" + key + "'");
    }
}

}  // namespace

void CostTable::apply_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw DesignError(std::string("cost table: ") + e.what());
    }
    if (!j.is_object())
        throw DesignError("cost table: expected a JSON object");
    for (const auto& [key, v] : j.items()) {
        if (key == "if_depth") {
            if_depth = get_as<uint32_t>(v, key);
        } else if (key == "comb_depth") {
            comb_depth = get_as<uint32_t>(v, key);
        } else if (key == "compare_extra") {
            compare_extra = get_as<uint32_t>(v, key);
        } else if (key == "case_mode") {
            auto s = get_as<std::string>(v, key);
            if (s == "alternatives")
                case_mode = CaseDepthMode::Alternatives;
            else if (s == "select_width")
                case_mode = CaseDepthMode::SelectWidth;
            else
                throw DesignError("cost table: case_mode must be \"alternatives\" or \"select_width\"");
        } else if (key == "math_mode") {
            auto s = get_as<std::string>(v, key);
            if (s == "result_width")
                math_mode = MathDepthMode::ResultWidth;
            else if (s == "log2")
                math_mode = MathDepthMode::Log2;
            else
                throw DesignError("cost table: math_mode must be \"result_width\" or \"log2\"");
        } else if (key == "mu_lut_ps") {
            mu_lut_ps = get_as<double>(v, key);
        } else if (key == "mu_dsp_ps") {
            mu_dsp_ps = get_as<double>(v, key);
        } else if (key == "dsp_mul") {
            dsp_mul = get_as<bool>(v, key);
        } else if (key == "dsp_width_threshold") {
            dsp_width_threshold = get_as<uint32_t>(v, key);
        } else if (key == "reg_overhead_ns") {
            reg_overhead_ns = get_as<double>(v, key);
        } else {
            throw DesignError("cost table: unknown key '" + key + "'");
        }
    }
    if (!(mu_lut_ps > 0) || !(mu_dsp_ps > 0))
        throw DesignError("cost table: mu values must be positive");
    if (reg_overhead_ns < 0)
        throw DesignError("cost table: reg_overhead_ns must be non-negative");
}

std::string CostTable::to_json() const {
    nlohmann::ordered_json j;
    j["if_depth"] = if_depth;
    j["comb_depth"] = comb_depth;
    j["case_mode"] = case_mode == CaseDepthMode::Alternatives ? "alternatives" : "select_width";
    j["math_mode"] = math_mode == MathDepthMode::ResultWidth ? "result_width" : "log2";
    j["compare_extra"] = compare_extra;
    j["mu_lut_ps"] = mu_lut_ps;
    j["mu_dsp_ps"] = mu_dsp_ps;
    j["dsp_mul"] = dsp_mul;
    j["dsp_width_threshold"] = dsp_width_threshold;
    j["reg_overhead_ns"] = reg_overhead_ns;
    return j.dump(2);
}

uint32_t rtlcs_depth(Rtlcs kind, const RtlcsShape& shape, const CostTable& t) {
    auto op_w = [&](size_t i) -> uint32_t {
        return i < shape.operand_widths.size() ? shape.operand_widths[i] : shape.result_width;
    };
    switch (kind) {
    case Rtlcs::If:
        return t.if_depth;
    case Rtlcs::Comb:
        return t.comb_depth;
    case Rtlcs::Case:
        if (t.case_mode == CaseDepthMode::SelectWidth)
            return op_w(0);
        return ceil_log2(std::max<uint32_t>(shape.alternatives, 2));
    case Rtlcs::Unary:
        return ceil_log2(op_w(0));
    case Rtlcs::Mux:
    case Rtlcs::Demux:
        return shape.constant_index ? 0 : ceil_log2(op_w(0));
    case Rtlcs::ShiftVar:
        return shape.constant_index ? 0 : op_w(1);
    case Rtlcs::ShiftConst:
    case Rtlcs::Wiring:
        return 0;
    case Rtlcs::Compare: {
        uint32_t w = 1;
        for (uint32_t x : shape.operand_widths)
            w = std::max(w, x);
        return ceil_log2(w) + t.compare_extra;
    }
    case Rtlcs::Math: {
        uint32_t d = t.math_mode == MathDepthMode::ResultWidth ? shape.result_width
                                                               : ceil_log2(shape.result_width) + 1;
        if (shape.is_mul && t.dsp_mul && shape.result_width >= t.dsp_width_threshold)
            d = static_cast<uint32_t>(std::lround(d * t.mu_dsp_ps / t.mu_lut_ps));
        return d;
    }
    }
    throw DesignError("unknown RTLCS kind");
}

uint32_t rtlcs_depth(const CombNode& n, const CostTable& t) {
    RtlcsShape shape;
    for (const auto& o : n.operands)
        shape.operand_widths.push_back(o.width);
    shape.result_width = n.width;
    shape.alternatives = n.case_alternatives;
    shape.is_mul = n.op == Opcode::Mul;
    if (n.op == Opcode::Case)
        shape.operand_widths = {n.operands[0].width};
    return rtlcs_depth(rtlcs_of(n), shape, t);
}

void weigh_graph(DesignGraph& g, const CostTable& t) {
    for (auto& n : g.comb_nodes) {
        n.weight = rtlcs_depth(n, t);
        n.weighted = true;
    }
}

DepthReport longest_paths(const DesignGraph& g) {
    for (const auto& n : g.comb_nodes)
        if (!n.weighted)
            throw DesignError("unweighted node " + g.node_label({false, n.id}));
    const auto order = topo_order(g);
    const size_t n = g.comb_nodes.size();
    DepthReport r;
    r.d_in.assign(n, 0);
    r.d_out.assign(n, 0);
    r.sink_arrival.assign(g.seq_nodes.size(), 0);
    auto arrival = [&](const Edge& e) -> uint32_t {
        return e.tail.seq ? 0 : r.d_in[e.tail.id] + g.comb_nodes[e.tail.id].weight;
    };
    for (int id : order)
        for (const auto& o : g.comb_nodes[id].operands)
            if (!o.is_const())
                r.d_in[id] = std::max(r.d_in[id], arrival(g.edges[o.edge]));
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        for (int eid : g.comb_nodes[*it].out_edges) {
            const Edge& e = g.edges[eid];
            if (!e.head.seq)
                r.d_out[*it] = std::max(r.d_out[*it], g.comb_nodes[e.head.id].weight + r.d_out[e.head.id]);
        }
    for (const auto& s : g.seq_nodes)
        for (const auto& o : s.inputs)
            if (!o.is_const())
                r.sink_arrival[s.id] = std::max(r.sink_arrival[s.id], arrival(g.edges[o.edge]));

    // witness: smallest-id node on a worst path, then walk both ways by smallest edge id
    int best = -1;
    for (size_t i = 0; i < n; ++i) {
        uint32_t total = r.d_in[i] + g.comb_nodes[i].weight + r.d_out[i];
        if (best < 0 || total > r.t_2ild) {
            r.t_2ild = total;
            best = static_cast<int>(i);
        }
    }
    if (best < 0) {
        for (const auto& e : g.edges) {
            r.witness = {e.tail, e.head};
            r.witness_edges = {e.id};
            break;
        }
        return r;
    }
    std::vector<NodeRef> back;
    std::vector<int> back_edges;
    NodeRef cur{false, best};
    for (;;) {
        const auto& node = g.comb_nodes[cur.id];
        int pick = -1;
        for (const auto& o : node.operands)
            if (!o.is_const() && arrival(g.edges[o.edge]) == r.d_in[cur.id] && (pick < 0 || o.edge < pick))
                pick = o.edge;
        back_edges.push_back(pick);
        cur = g.edges[pick].tail;
        back.push_back(cur);
        if (cur.seq)
            break;
    }
    std::reverse(back.begin(), back.end());
    std::reverse(back_edges.begin(), back_edges.end());
    r.witness = back;
    r.witness_edges = back_edges;
    cur = {false, best};
    r.witness.push_back(cur);
    for (;;) {
        const auto& node = g.comb_nodes[cur.id];
        int pick = -1;
        for (int eid : node.out_edges) {
            const Edge& e = g.edges[eid];
            uint32_t v = e.head.seq ? 0 : g.comb_nodes[e.head.id].weight + r.d_out[e.head.id];
            if (v == r.d_out[cur.id] && (pick < 0 || eid < pick))
                pick = eid;
        }
        r.witness_edges.push_back(pick);
        cur = g.edges[pick].head;
        r.witness.push_back(cur);
        if (cur.seq)
            break;
    }
    return r;
}

std::string depth_report_json(const DesignGraph& g, const DepthReport& r, const CostTable& t) {
    nlohmann::ordered_json j;
    j["schema"] = "cslow.depth_report/1";
    j["top"] = g.top;
    j["t_2ild"] = r.t_2ild;
    j["estimated_ns"] = r.t_2ild * t.mu_lut_ps / 1000.0 + t.reg_overhead_ns;
    auto w = nlohmann::ordered_json::array();
    for (const auto& n : r.witness) {
        nlohmann::ordered_json x;
        x["node"] = g.node_label(n);
        Span sp = n.seq ? g.seq_nodes[n.id].span : g.comb_nodes[n.id].span;
        x["line"] = sp.begin.line;
        x["column"] = sp.begin.column;
        x["end_line"] = sp.end.line;
        x["end_column"] = sp.end.column;
        if (!n.seq)
            x["weight"] = g.comb_nodes[n.id].weight;
        w.push_back(x);
    }
    j["witness"] = w;
    auto nodes = nlohmann::ordered_json::array();
    for (const auto& c : g.comb_nodes) {
        nlohmann::ordered_json x;
        x["id"] = c.id;
        x["node"] = g.node_label({false, c.id});
        x["weight"] = c.weight;
        x["d_in"] = r.d_in[c.id];
        x["d_out"] = r.d_out[c.id];
        nodes.push_back(x);
    }
    j["nodes"] = nodes;
    auto sinks = nlohmann::ordered_json::array();
    for (const auto& s : g.seq_nodes)
        if (s.is_sink()) {
            nlohmann::ordered_json x;
            x["node"] = g.node_label({true, s.id});
            x["arrival"] = r.sink_arrival[s.id];
            sinks.push_back(x);
        }
    j["sinks"] = sinks;
    return j.dump(2);
}

std::string depth_report_table(const DesignGraph& g, const DepthReport& r, const CostTable& t) {
    std::ostringstream os;
    const double t_orig = r.t_2ild * t.mu_lut_ps / 1000.0 + t.reg_overhead_ns;
    os << "design " << g.top << ": worst 2iLD " << r.t_2ild << " (" << std::fixed << std::setprecision(3)
       << t_orig << " ns estimated)\n";
    os << "worst path:";
    for (const auto& n : r.witness)
        os << ' ' << g.node_label(n);
    os << "\n\nCMF  theoretical [ns]  speedup\n";
    for (int c = 1; c <= 4; ++c) {
        auto th = theoretical_timing(t_orig, c, t);
        os << std::setw(3) << c << "  " << std::setw(16) << th.ns << "  " << std::setw(6) << std::setprecision(1)
           << th.speedup_percent << "%\n"
           << std::setprecision(3);
    }
    return os.str();
}

}  // namespace cslow
