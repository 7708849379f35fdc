#pragma once

#include <cstddef>
#include <cstdint>

namespace cslow {

// Single LUT-net-pair delay: chi-square with k_single degrees of freedom scaled to mean mu_ps.
struct DelayModel {
    uint32_t k_single = 8;
    double mu_ps = 825.0;
    uint64_t seed = 1;
};

struct DelaySummary {
    double mean = 0;
    double variance = 0;
    double skewness = 0;
    size_t samples = 0;
};

// Sums n_pairs independent single-pair draws per sample. Deterministic for a fixed seed.
DelaySummary sample_segment_delay(uint32_t n_pairs, const DelayModel& model, size_t n_samples);

// Analytic skewness of the n_pairs sum: sqrt(8 / (k_single * n_pairs)).
double analytic_skewness(uint32_t n_pairs, const DelayModel& model);

}  // namespace cslow
