#pragma once

#include "cslow/timing.hpp"

#include <optional>

namespace cslow {

struct TheoreticalTiming {
    double ns = 0;
    double speedup_percent = 0;  // t_orig / ns * 100
};

// (t_orig + (cmf - 1) * reg_overhead) / cmf
TheoreticalTiming theoretical_timing(double t_orig_ns, int cmf, const CostTable& table = {});

struct MetricsRow {
    double relative_performance = 0;      // t_orig / t_achieved
    std::optional<double> timing_ratio;   // t_theory / t_achieved
    std::optional<double> pps_khz;        // (1 / t_achieved) in kHz per slice
    std::optional<double> relative_luts;  // lut / lut_orig
};

MetricsRow derive_metrics(double t_orig_ns, std::optional<double> t_theory_ns, double t_achieved_ns,
                          std::optional<double> occupied_slices, std::optional<double> lut_count_orig = {},
                          std::optional<double> lut_count = {});

// gate_share + ff_share * ff_csr / ff_orig
double relative_area_asic(double ff_csr, double ff_orig, double gate_share = 0.58, double ff_share = 0.42);

}  // namespace cslow
