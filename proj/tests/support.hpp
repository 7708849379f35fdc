#pragma once

#include "cslow/emit.hpp"
#include "cslow/parser.hpp"
#include "cslow/placement.hpp"
#include "cslow/sim.hpp"
#include "cslow/subset.hpp"
#include "cslow/timing.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace support {

inline const std::vector<std::string>& corpus() {
    static const std::vector<std::string> names{"counter", "fsm", "alu", "mac", "ram_rmw"};
    return names;
}

inline std::string fixture_path(const std::string& name) {
    return std::string(CSLOW_FIXTURE_DIR) + "/" + name + ".v";
}

inline std::string golden_path(const std::string& name) {
    return std::string(CSLOW_GOLDEN_DIR) + "/" + name;
}

inline cslow::SourceUnit load_unit(const std::string& name) {
    return cslow::parse_source(cslow::read_text_file(fixture_path(name)), fixture_path(name));
}

inline cslow::DesignGraph load_graph(const std::string& name, const cslow::CostTable& t = {}) {
    auto g = cslow::elaborate(load_unit(name), name);
    cslow::weigh_graph(g, t);
    return g;
}

// Calls `visit(weight_sum)` for every source-to-sink path; plain recursion over edges.
inline void brute_force_paths(const cslow::DesignGraph& g, const std::function<void(uint64_t)>& visit) {
    std::function<void(cslow::NodeRef, uint64_t)> walk = [&](cslow::NodeRef n, uint64_t acc) {
        for (int e : g.out_edges(n)) {
            const auto& h = g.edges[e].head;
            if (h.seq)
                visit(acc);
            else
                walk(h, acc + g.comb_nodes[h.id].weight);
        }
    };
    for (const auto& s : g.seq_nodes)
        if (s.is_source())
            walk({true, s.id}, 0);
}

inline uint64_t brute_force_max(const cslow::DesignGraph& g) {
    uint64_t best = 0;
    brute_force_paths(g, [&](uint64_t d) { best = std::max(best, d); });
    return best;
}

// input -> c_0 -> ... -> c_{n-1} -> output, 8 bits wide.
inline cslow::DesignGraph make_chain(const std::vector<uint32_t>& weights) {
    using namespace cslow;
    DesignGraph g;
    g.top = "chain";
    g.clock = "clk";
    const int n = static_cast<int>(weights.size());
    g.seq_nodes.resize(2);
    g.seq_nodes[0].id = 0;
    g.seq_nodes[0].kind = SeqKind::PrimaryInput;
    g.seq_nodes[0].name = "in";
    g.seq_nodes[0].width = 8;
    g.seq_nodes[1].id = 1;
    g.seq_nodes[1].kind = SeqKind::PrimaryOutput;
    g.seq_nodes[1].name = "out";
    g.seq_nodes[1].width = 8;
    g.comb_nodes.resize(n);
    for (int i = 0; i < n; ++i) {
        auto& c = g.comb_nodes[i];
        c.id = i;
        c.op = Opcode::Not;
        c.width = 8;
        c.weight = weights[i];
        c.weighted = true;
        c.owner_target = "n" + std::to_string(i);
    }
    auto link = [&](NodeRef t, NodeRef h) {
        Edge e;
        e.id = static_cast<int>(g.edges.size());
        e.tail = t;
        e.head = h;
        e.width = 8;
        g.edges.push_back(e);
        (t.seq ? g.seq_nodes[t.id].out_edges : g.comb_nodes[t.id].out_edges).push_back(e.id);
        Operand op;
        op.edge = e.id;
        op.width = 8;
        (h.seq ? g.seq_nodes[h.id].inputs : g.comb_nodes[h.id].operands).push_back(op);
    };
    NodeRef prev{true, 0};
    for (int i = 0; i < n; ++i) {
        link(prev, {false, i});
        prev = {false, i};
    }
    link(prev, {true, 1});
    return g;
}

// Minimum bottleneck over every monotone labeling of a chain into cmf segments.
inline uint64_t chain_optimum(const std::vector<uint32_t>& w, int cmf) {
    const int n = static_cast<int>(w.size());
    uint64_t best = UINT64_MAX;
    std::vector<int> lab(n, 1);
    std::function<void(int, int)> rec = [&](int i, int lo) {
        if (i == n) {
            uint64_t worst = 0, run = 0;
            for (int k = 0; k < n; ++k) {
                run = (k > 0 && lab[k] == lab[k - 1]) ? run + w[k] : w[k];
                worst = std::max(worst, run);
            }
            best = std::min(best, worst);
            return;
        }
        for (int l = lo; l <= cmf; ++l) {
            lab[i] = l;
            rec(i + 1, l);
        }
    };
    rec(0, 1);
    return n == 0 ? 0 : best;
}

struct Emitted {
    cslow::DesignGraph graph;
    cslow::SegmentAssignment assignment;
    cslow::EmitResult result;
};

inline Emitted emit_fixture(const std::string& name, int cmf, const cslow::EmitOptions& opt = {}) {
    Emitted e;
    e.graph = load_graph(name);
    e.assignment = cslow::balance(e.graph, cslow::initial_assignment(e.graph, cmf));
    e.result = cslow::emit_design(e.graph, e.assignment, opt);
    return e;
}

inline std::map<std::string, int> latencies(const cslow::RewritePlan& plan) {
    std::map<std::string, int> m;
    for (const auto& o : plan.outputs)
        m[o.port] = o.latency;
    return m;
}

inline cslow::EquivalenceVerdict check_text(const std::string& name, const std::string& text, int cmf,
                                            const cslow::RewritePlan& plan, size_t cycles, uint64_t seed) {
    const auto unit = load_unit(name);
    const auto original = cslow::flatten(unit, name);
    const auto fast = cslow::parse_source(text, "<emitted>").modules.at(0);
    auto streams = cslow::random_streams(original, cmf, cycles, seed, cmf);
    return cslow::check_equivalence(original, fast, cmf, latencies(plan), streams, cmf);
}

}  // namespace support
