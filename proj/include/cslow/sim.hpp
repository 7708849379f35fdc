#pragma once

#include "cslow/ast.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cslow {

// Per-cycle input values for a set of data inputs.
struct Stimulus {
    std::vector<std::string> inputs;
    std::vector<std::vector<uint64_t>> cycles;  // cycles[t][i] is inputs[i] at cycle t
};

// Output values sampled before each clock edge.
struct Trace {
    std::vector<std::string> signals;
    std::vector<uint32_t> widths;
    std::vector<std::vector<uint64_t>> cycles;
};

// Two-valued cycle simulator of a flattened module. Every posedge clock is the
// same clock. Widths follow the self-determined rules of the subset.
class Simulator {
public:
    explicit Simulator(const ModuleDecl& flat);
    ~Simulator();
    Simulator(Simulator&&) noexcept;
    Simulator& operator=(Simulator&&) noexcept;

    const std::vector<std::string>& data_inputs() const;
    const std::vector<std::string>& outputs() const;
    uint32_t width(const std::string& net) const;

    void set(const std::string& input, uint64_t value);
    uint64_t get(const std::string& net) const;
    void settle();  // evaluate combinational items
    void clock();   // one posedge: clocked processes, then non-blocking commits

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Applies the stimulus cycle by cycle (inputs, settle, sample, edge). Inputs the
// stimulus does not mention stay 0.
Trace simulate(const ModuleDecl& flat, const Stimulus& stim);

// Fast-cycle stream: cycle t * C + k carries thread k's cycle t. `extra` zero
// cycles are appended to flush the pipeline.
Stimulus interleave(const std::vector<Stimulus>& threads, size_t extra = 0);

// Thread k's samples: trace cycle t * C + k + latency(signal).
std::vector<Trace> deinterleave(const Trace& fast, int threads, const std::map<std::string, int>& latency);

// Independent random streams, one per thread. A reset input (rst / reset active
// high, rst_n / reset_n active low) is asserted for the first `reset_cycles`
// cycles and then pulsed with probability 1/32.
std::vector<Stimulus> random_streams(const ModuleDecl& flat, int threads, size_t cycles, uint64_t seed,
                                     size_t reset_cycles);

struct Mismatch {
    int thread = 0;
    size_t cycle = 0;       // original cycle of the thread
    size_t fast_cycle = 0;  // cycle of the C-slowed design
    std::string signal;
    uint64_t expected = 0;
    uint64_t actual = 0;
};

struct OutputOffset {
    std::string signal;
    int scheduled = 0;
    std::optional<int> discovered;  // smallest latency under which this output matches
};

struct EquivalenceVerdict {
    bool equivalent = false;
    int threads = 0;
    size_t cycles_per_thread = 0;
    size_t warmup = 0;
    uint64_t comparisons = 0;
    std::vector<OutputOffset> offsets;
    std::optional<Mismatch> witness;
    std::string message;
};

// Runs each stream on `original` and the interleaved streams on `cslow`, then
// compares every output after `warmup` cycles under the scheduled latencies.
EquivalenceVerdict check_equivalence(const ModuleDecl& original, const ModuleDecl& cslow, int threads,
                                     const std::map<std::string, int>& latency,
                                     const std::vector<Stimulus>& streams, size_t warmup);

std::string trace_json(const Trace& t);
// Minimal VCD: one timestep per cycle, every signal as a vector wire.
std::string trace_vcd(const Trace& t, const std::string& scope);
std::string verdict_json(const EquivalenceVerdict& v);

}  // namespace cslow
