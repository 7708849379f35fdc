#include "cslow/metrics.hpp"
#include <cmath>

namespace cslow {

TheoreticalTiming theoretical_timing(double t_orig_ns, int cmf, const CostTable& table) {
    if (cmf < 1)
        throw DesignError("cmf must be >= 1");
    if (!(t_orig_ns > 0))
        throw DesignError("t_orig must be positive");
    TheoreticalTiming r;
    r.ns = (t_orig_ns + (cmf - 1) * table.reg_overhead_ns) / cmf;
    r.speedup_percent = t_orig_ns / r.ns * 100.0;
    return r;
}

MetricsRow derive_metrics(double t_orig_ns, std::optional<double> t_theory_ns, double t_achieved_ns,
                          std::optional<double> occupied_slices, std::optional<double> lut_count_orig,
                          std::optional<double> lut_count) {
    if (!(t_orig_ns > 0) || !(t_achieved_ns > 0))
        throw DesignError("timing inputs must be positive");
    MetricsRow r;
    r.relative_performance = t_orig_ns / t_achieved_ns;
    if (t_theory_ns) {
        if (!(*t_theory_ns > 0))
            throw DesignError("theoretical timing must be positive");
        r.timing_ratio = *t_theory_ns / t_achieved_ns;
    }
    if (occupied_slices) {
        if (!(*occupied_slices > 0))
            throw DesignError("slice count must be positive");
        r.pps_khz = (1e6 / t_achieved_ns) / *occupied_slices;
    }
    if (lut_count_orig && lut_count) {
        if (!(*lut_count_orig > 0) || !(*lut_count > 0))
            throw DesignError("LUT counts must be positive");
        r.relative_luts = *lut_count / *lut_count_orig;
    }
    return r;
}

double relative_area_asic(double ff_csr, double ff_orig, double gate_share, double ff_share) {
    if (!(ff_csr > 0) || !(ff_orig > 0))
        throw DesignError("flip-flop counts must be positive");
    if (gate_share < 0 || ff_share < 0 || std::abs(gate_share + ff_share - 1.0) > 1e-9)
        throw DesignError("gate and flip-flop shares must be non-negative and sum to 1");
    return gate_share + ff_share * (ff_csr / ff_orig);
}

}  // namespace cslow
