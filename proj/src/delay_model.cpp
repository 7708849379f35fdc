#include "cslow/delay_model.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace cslow {

DelaySummary sample_segment_delay(uint32_t n_pairs, const DelayModel& model, size_t n_samples) {
    if (n_pairs == 0 || n_samples == 0 || model.k_single == 0 || !(model.mu_ps > 0))
        throw std::invalid_argument("sample_segment_delay: n_pairs, n_samples, k and mu must be positive");
    std::mt19937_64 rng(model.seed);
    std::chi_squared_distribution<double> chi(static_cast<double>(model.k_single));
    const double scale = model.mu_ps / model.k_single;
    std::vector<double> xs(n_samples);
    double sum = 0;
    for (auto& x : xs) {
        double s = 0;
        for (uint32_t i = 0; i < n_pairs; ++i)
            s += chi(rng);
        x = s * scale;
        sum += x;
    }
    DelaySummary r;
    r.samples = n_samples;
    r.mean = sum / n_samples;
    double m2 = 0, m3 = 0;
    for (double x : xs) {
        const double d = x - r.mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= n_samples;
    m3 /= n_samples;
    r.variance = m2;
    r.skewness = m2 > 0 ? m3 / std::pow(m2, 1.5) : 0.0;
    return r;
}

double analytic_skewness(uint32_t n_pairs, const DelayModel& model) {
    return std::sqrt(8.0 / (static_cast<double>(model.k_single) * n_pairs));
}

}  // namespace cslow
