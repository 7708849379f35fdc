#pragma once

#include "cslow/graph.hpp"
#include "cslow/timing.hpp"

#include <compare>
#include <map>
#include <string>
#include <vector>

namespace cslow {

// Segment label per comb node in 1..cmf. Sequential sources sit in segment 1 and
// sinks in segment cmf; an edge u->v carries label(v) - label(u) SP registers.
// With align_outputs off, a primary output takes the label of its driver (no
// alignment registers) and its latency is reported instead.
struct SegmentAssignment {
    int cmf = 1;
    std::vector<int> seg;
    bool align_outputs = true;
};

int tail_label(const DesignGraph& g, const SegmentAssignment& a, NodeRef n);
int head_label(const DesignGraph& g, const SegmentAssignment& a, const Edge& e);
int regs_on_edge(const DesignGraph& g, const SegmentAssignment& a, const Edge& e);

SegmentAssignment initial_assignment(const DesignGraph& g, int cmf, bool align_outputs = true);

// Lexicographic placement objective.
struct Objective {
    double bottleneck = 0;
    double sum_depths = 0;
    uint64_t register_bits = 0;
    auto operator<=>(const Objective&) const = default;
};

// `weights` overrides node weights (used by back-annotated re-optimization).
Objective evaluate_objective(const DesignGraph& g, const SegmentAssignment& a,
                             const std::vector<double>* weights = nullptr);

// Per-segment longest intra-segment depth (crossing edges restart at 0).
std::vector<double> segment_depth_values(const DesignGraph& g, const SegmentAssignment& a,
                                         const std::vector<double>* weights = nullptr);

// Total SP register bits; chains are shared per driving node.
uint64_t sp_register_bits(const DesignGraph& g, const SegmentAssignment& a);

struct BalanceResult {
    SegmentAssignment assignment;
    std::vector<Objective> history;  // input objective, then one entry per accepted step
};

// Exact min-bottleneck labeling for monotone assignments.
SegmentAssignment min_bottleneck_assignment(const DesignGraph& g, int cmf, bool align_outputs = true,
                                            const std::vector<double>* weights = nullptr);

// Seeds with the better of the input and the exact min-bottleneck labeling, then
// applies strictly improving single-node +-1 moves (best move first, ties to the
// smallest node id) until none is left. Throws DesignError on an illegal input.
BalanceResult balance_traced(const DesignGraph& g, const SegmentAssignment& a,
                             const std::vector<double>* weights = nullptr);
SegmentAssignment balance(const DesignGraph& g, const SegmentAssignment& a);

struct LegalityVerdict {
    bool ok = true;
    std::vector<std::string> violations;
    bool path_oracle_used = false;
    uint64_t paths_checked = 0;
};

LegalityVerdict legality_check(const DesignGraph& g, const SegmentAssignment& a, uint64_t path_limit);

struct SegmentInfo {
    int segment = 0;
    uint32_t depth = 0;
    std::vector<NodeRef> witness;
    bool memory_bounded = false;
};

struct EdgeCut {
    int edge = -1;
    int registers = 0;
    int first_stage = 0;  // stages first_stage .. first_stage + registers - 1
};

struct CutReport {
    int cmf = 1;
    std::vector<SegmentInfo> segments;
    std::vector<EdgeCut> cuts;
    uint64_t total_register_bits = 0;
    int bottleneck_segment = 1;
    std::vector<int> unsplittable_nodes;  // weight > ceil(T / cmf)
    bool reoptimized = false;
    std::vector<std::string> notes;
};

CutReport segment_depths(const DesignGraph& g, const SegmentAssignment& a);
std::string cut_report_json(const DesignGraph& g, const CutReport& r);

struct BackAnnotation {
    std::map<int, double> segment_ps;
    std::string source;
};

// Reads `{ "segments": { "<id>": <ps>, ... } }`. Throws DesignError.
BackAnnotation read_back_annotation(const std::string& text, const std::string& source);

// Scales node weights by measured / predicted delay of their current segment and
// re-runs balance. An empty annotation returns the input unchanged.
SegmentAssignment reoptimize_with_sta(const DesignGraph& g, const SegmentAssignment& a, const BackAnnotation& ann,
                                      const CostTable& table = {});

}  // namespace cslow
