#pragma once

#include "cslow/graph.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cslow {

enum class CaseDepthMode { Alternatives, SelectWidth };
enum class MathDepthMode { ResultWidth, Log2 };

// 2-input logic depth cost model. Defaults:
//   if/ternary 1, comb 1, case ceil(log2(max(#alternatives, 2))),
//   unary reduction ceil(log2 w), variable mux/demux ceil(log2 n),
//   variable shift = shift-amount width, wiring 0,
//   add/sub/neg/mul = result width (mul DSP-scaled when result width >= threshold),
//   compare ceil(log2 w) + 1.
struct CostTable {
    uint32_t if_depth = 1;
    uint32_t comb_depth = 1;
    CaseDepthMode case_mode = CaseDepthMode::Alternatives;
    MathDepthMode math_mode = MathDepthMode::ResultWidth;
    uint32_t compare_extra = 1;
    double mu_lut_ps = 825.0;
    double mu_dsp_ps = 1520.0;
    bool dsp_mul = true;
    uint32_t dsp_width_threshold = 16;
    double reg_overhead_ns = 0.400;

    // Applies overrides from a JSON object; unknown keys and wrong types throw DesignError.
    void apply_json(const std::string& text);
    std::string to_json() const;
};

struct RtlcsShape {
    std::vector<uint32_t> operand_widths;
    uint32_t result_width = 1;
    uint32_t alternatives = 0;  // case only
    bool is_mul = false;
    bool constant_index = false;  // shift amount / mux / demux index is a constant
};

uint32_t rtlcs_depth(Rtlcs kind, const RtlcsShape& shape, const CostTable& table);
uint32_t rtlcs_depth(const CombNode& node, const CostTable& table);

// Sets every comb node weight. Idempotent.
void weigh_graph(DesignGraph& g, const CostTable& table);

struct DepthReport {
    std::vector<uint32_t> d_in;   // per comb node
    std::vector<uint32_t> d_out;  // per comb node
    uint32_t t_2ild = 0;
    std::vector<NodeRef> witness;  // source seq, comb nodes, sink seq
    std::vector<int> witness_edges;
    std::vector<uint32_t> sink_arrival;  // per seq node: worst depth arriving at its inputs
};

// Forward/backward longest paths. Throws DesignError on unweighted nodes.
DepthReport longest_paths(const DesignGraph& g);

std::string depth_report_json(const DesignGraph& g, const DepthReport& r, const CostTable& table);
std::string depth_report_table(const DesignGraph& g, const DepthReport& r, const CostTable& table);

}  // namespace cslow
