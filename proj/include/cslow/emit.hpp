#pragma once

#include "cslow/graph.hpp"
#include "cslow/placement.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cslow {

struct EmitOptions {
    bool sp_delay = true;     // `<= #1` on SP registers
    bool tie_clocks = false;  // clock SP registers from the main clock
};

// One SP register of a chain: `always @(posedge clk_sp<stage>) name <= #1 input;`
struct SpRegister {
    std::string name;
    std::string input;
    int stage = 0;
    uint32_t width = 0;
};

struct SpChain {
    NodeRef tail;
    std::string base;
    std::vector<SpRegister> registers;  // ordered by stage
};

struct OutputTiming {
    std::string port;
    int latency = 0;  // fast cycles between a thread's input slot and its output
    bool renamed = false;
};

struct RewritePlan {
    int cmf = 1;
    std::string clock;
    std::vector<SpChain> chains;
    std::vector<int> touched_items;
    std::vector<std::string> materialized;  // new wires named after their node
    std::vector<OutputTiming> outputs;
    std::vector<std::string> banked_memories;
    std::string thread_counter;  // empty when no memory is banked
    std::vector<std::pair<std::string, std::string>> renamed_for_collision;  // wanted -> used
};

RewritePlan plan_rewrite(const DesignGraph& g, const SegmentAssignment& a);

struct EmitResult {
    RewritePlan plan;
    ModuleDecl module;
    std::string text;
};

// cmf == 1 or an empty plan reproduces the (flattened) input.
EmitResult emit_design(const DesignGraph& g, const SegmentAssignment& a, const EmitOptions& opt = {});
std::string emit_verilog(const DesignGraph& g, const SegmentAssignment& a, const EmitOptions& opt = {});

// Stable JSON (schema "cslow.schedule/1") describing thread slots and latencies.
std::string emit_schedule(const DesignGraph& g, const SegmentAssignment& a, const RewritePlan& plan,
                          const EmitOptions& opt = {});

// Fault injection: turns SP register `name` of an emitted design into a wire
// (`assign name = input;`). With `bit_mask`, only the masked bits bypass the
// register. Throws DesignError when `name` is not an SP register.
std::string remove_sp_register(const std::string& verilog, const std::string& name,
                               std::optional<uint64_t> bit_mask = std::nullopt);

}  // namespace cslow
