#include "cslow/graph.hpp"

#include <json.hpp>

#include <functional>
#include <limits>
#include <queue>

namespace cslow {

const char* to_string(SeqKind k) {
    switch (k) {
    case SeqKind::PrimaryInput: return "primary-input";
    case SeqKind::PrimaryOutput: return "primary-output";
    case SeqKind::RegisterBank: return "register-bank";
    case SeqKind::MemoryReadPort: return "memory-read-port";
    case SeqKind::MemoryWritePort: return "memory-write-port";
    }
    return "?";
}

const char* to_string(Opcode op) {
    switch (op) {
    case Opcode::Mux2: return "mux2";
    case Opcode::Case: return "case";
    case Opcode::Add: return "add";
    case Opcode::Sub: return "sub";
    case Opcode::Mul: return "mul";
    case Opcode::Neg: return "neg";
    case Opcode::And: return "and";
    case Opcode::Or: return "or";
    case Opcode::Xor: return "xor";
    case Opcode::Xnor: return "xnor";
    case Opcode::Not: return "not";
    case Opcode::LogicAnd: return "land";
    case Opcode::LogicOr: return "lor";
    case Opcode::LogicNot: return "lnot";
    case Opcode::RedAnd: return "red_and";
    case Opcode::RedOr: return "red_or";
    case Opcode::RedXor: return "red_xor";
    case Opcode::RedNand: return "red_nand";
    case Opcode::RedNor: return "red_nor";
    case Opcode::RedXnor: return "red_xnor";
    case Opcode::Eq: return "eq";
    case Opcode::Ne: return "ne";
    case Opcode::Lt: return "lt";
    case Opcode::Le: return "le";
    case Opcode::Gt: return "gt";
    case Opcode::Ge: return "ge";
    case Opcode::Shl: return "shl";
    case Opcode::Shr: return "shr";
    case Opcode::BitSelect: return "bit_select";
    case Opcode::PartSelect: return "part_select";
    case Opcode::Concat: return "concat";
    case Opcode::Replicate: return "replicate";
    case Opcode::Demux: return "demux";
    case Opcode::Resize: return "resize";
    }
    return "?";
}

const char* to_string(Rtlcs k) {
    switch (k) {
    case Rtlcs::If: return "if";
    case Rtlcs::Case: return "case";
    case Rtlcs::Math: return "math";
    case Rtlcs::Comb: return "comb";
    case Rtlcs::Unary: return "unary";
    case Rtlcs::Mux: return "mux";
    case Rtlcs::Demux: return "demux";
    case Rtlcs::ShiftVar: return "shift";
    case Rtlcs::ShiftConst: return "shift-const";
    case Rtlcs::Compare: return "compare";
    case Rtlcs::Wiring: return "wiring";
    }
    return "?";
}

Rtlcs rtlcs_of(const CombNode& n) {
    switch (n.op) {
    case Opcode::Mux2: return Rtlcs::If;
    case Opcode::Case: return Rtlcs::Case;
    case Opcode::Add:
    case Opcode::Sub:
    case Opcode::Mul:
    case Opcode::Neg: return Rtlcs::Math;
    case Opcode::And:
    case Opcode::Or:
    case Opcode::Xor:
    case Opcode::Xnor:
    case Opcode::Not:
    case Opcode::LogicAnd:
    case Opcode::LogicOr:
    case Opcode::LogicNot: return Rtlcs::Comb;
    case Opcode::RedAnd:
    case Opcode::RedOr:
    case Opcode::RedXor:
    case Opcode::RedNand:
    case Opcode::RedNor:
    case Opcode::RedXnor: return Rtlcs::Unary;
    case Opcode::Eq:
    case Opcode::Ne:
    case Opcode::Lt:
    case Opcode::Le:
    case Opcode::Gt:
    case Opcode::Ge: return Rtlcs::Compare;
    case Opcode::Shl:
    case Opcode::Shr: return n.operands[1].is_const() ? Rtlcs::ShiftConst : Rtlcs::ShiftVar;
    case Opcode::BitSelect: return n.operands[1].is_const() ? Rtlcs::Wiring : Rtlcs::Mux;
    case Opcode::Demux: return n.operands[1].is_const() ? Rtlcs::Wiring : Rtlcs::Demux;
    case Opcode::PartSelect:
    case Opcode::Concat:
    case Opcode::Replicate:
    case Opcode::Resize: return Rtlcs::Wiring;
    }
    return Rtlcs::Wiring;
}

std::string DesignGraph::node_label(NodeRef n) const {
    if (n.seq) {
        const auto& s = seq_nodes[n.id];
        return std::string(to_string(s.kind)) + ":" + s.name;
    }
    const auto& c = comb_nodes[n.id];
    return std::string(to_string(c.op)) + "#" + std::to_string(c.id) + "(" + c.owner_target + ")";
}

std::vector<int> topo_order(const DesignGraph& g) {
    const size_t n = g.comb_nodes.size();
    std::vector<int> indeg(n, 0);
    for (const auto& e : g.edges)
        if (!e.tail.seq && !e.head.seq)
            ++indeg[e.head.id];
    std::priority_queue<int, std::vector<int>, std::greater<int>> ready;
    for (size_t i = 0; i < n; ++i)
        if (indeg[i] == 0)
            ready.push(static_cast<int>(i));
    std::vector<int> order;
    order.reserve(n);
    while (!ready.empty()) {
        int u = ready.top();
        ready.pop();
        order.push_back(u);
        for (int eid : g.comb_nodes[u].out_edges) {
            const Edge& e = g.edges[eid];
            if (!e.head.seq && --indeg[e.head.id] == 0)
                ready.push(e.head.id);
        }
    }
    if (order.size() != n) {
        std::string msg = "combinational cycle among nodes:";
        for (size_t i = 0; i < n; ++i)
            if (indeg[i] > 0)
                msg += " " + g.node_label({false, static_cast<int>(i)});
        throw DesignError(msg);
    }
    return order;
}

namespace {

uint64_t sat_add(uint64_t a, uint64_t b) {
    return a > std::numeric_limits<uint64_t>::max() - b ? std::numeric_limits<uint64_t>::max() : a + b;
}

}  // namespace

uint64_t count_paths(const DesignGraph& g) {
    auto order = topo_order(g);
    std::vector<uint64_t> from(g.comb_nodes.size(), 0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        uint64_t c = 0;
        for (int eid : g.comb_nodes[*it].out_edges) {
            const Edge& e = g.edges[eid];
            c = sat_add(c, e.head.seq ? 1 : from[e.head.id]);
        }
        from[*it] = c;
    }
    uint64_t total = 0;
    for (const auto& s : g.seq_nodes)
        for (int eid : s.out_edges) {
            const Edge& e = g.edges[eid];
            total = sat_add(total, e.head.seq ? 1 : from[e.head.id]);
        }
    return total;
}

std::optional<std::vector<GraphPath>> enumerate_paths(const DesignGraph& g, uint64_t limit) {
    if (count_paths(g) > limit)
        return std::nullopt;
    std::vector<GraphPath> out;
    GraphPath cur;
    std::function<void(NodeRef)> dfs = [&](NodeRef n) {
        for (int eid : g.out_edges(n)) {
            const Edge& e = g.edges[eid];
            cur.edges.push_back(eid);
            cur.nodes.push_back(e.head);
            if (e.head.seq)
                out.push_back(cur);
            else
                dfs(e.head);
            cur.edges.pop_back();
            cur.nodes.pop_back();
        }
    };
    for (const auto& s : g.seq_nodes) {
        if (!s.is_source())
            continue;
        cur.nodes = {{true, s.id}};
        cur.edges.clear();
        dfs({true, s.id});
    }
    return out;
}

std::string graph_to_json(const DesignGraph& g) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["schema"] = "cslow.graph/1";
    j["top"] = g.top;
    j["clock"] = g.clock;
    j["reset"] = g.reset ? ordered_json(*g.reset) : ordered_json(nullptr);
    auto ref = [](NodeRef r) {
        ordered_json x;
        x["kind"] = r.seq ? "seq" : "comb";
        x["id"] = r.id;
        return x;
    };
    auto operands = [&](const std::vector<Operand>& ops) {
        ordered_json a = ordered_json::array();
        for (const auto& o : ops) {
            ordered_json x;
            if (o.is_const()) {
                x["const"] = o.value;
            } else {
                x["edge"] = o.edge;
            }
            x["width"] = o.width;
            a.push_back(x);
        }
        return a;
    };
    ordered_json seq = ordered_json::array();
    for (const auto& s : g.seq_nodes) {
        ordered_json x;
        x["id"] = s.id;
        x["kind"] = to_string(s.kind);
        x["name"] = s.name;
        if (!s.memory.empty())
            x["memory"] = s.memory;
        x["width"] = s.width;
        x["reset_value"] = s.reset_value ? ordered_json(*s.reset_value) : ordered_json(nullptr);
        x["inputs"] = operands(s.inputs);
        seq.push_back(x);
    }
    ordered_json comb = ordered_json::array();
    for (const auto& c : g.comb_nodes) {
        ordered_json x;
        x["id"] = c.id;
        x["op"] = to_string(c.op);
        x["rtlcs"] = to_string(rtlcs_of(c));
        x["width"] = c.width;
        x["weight"] = c.weighted ? ordered_json(c.weight) : ordered_json(nullptr);
        x["target"] = c.owner_target;
        x["line"] = c.span.begin.line;
        x["operands"] = operands(c.operands);
        if (c.op == Opcode::Case) {
            x["case_labels"] = c.case_labels;
            x["case_alternatives"] = c.case_alternatives;
        }
        comb.push_back(x);
    }
    ordered_json edges = ordered_json::array();
    for (const auto& e : g.edges) {
        ordered_json x;
        x["id"] = e.id;
        x["tail"] = ref(e.tail);
        x["head"] = ref(e.head);
        x["port"] = e.head_port;
        x["via"] = e.via_name;
        x["width"] = e.width;
        edges.push_back(x);
    }
    j["seq_nodes"] = seq;
    j["comb_nodes"] = comb;
    j["edges"] = edges;
    return j.dump(2);
}

}  // namespace cslow
