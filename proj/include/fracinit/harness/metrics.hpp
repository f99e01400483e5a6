#pragma once

#include <cmath>
#include <span>
#include <stdexcept>

#include "fracinit/signal.hpp"

namespace fracinit::harness {

/// |est - truth| / |truth| in percent.
inline double relative_error_param(double truth, double est) {
    if (truth == 0.0) throw std::invalid_argument("relative_error_param: zero reference value");
    return std::abs(est - truth) / std::abs(truth) * 100.0;
}

/// ||est - truth||_2 / ||truth||_2 in percent.
inline double relative_error_signal(std::span<const double> truth, std::span<const double> est) {
    if (truth.size() != est.size()) throw std::invalid_argument("relative_error_signal: length mismatch");
    double num = 0.0;
    double den = 0.0;
    for (std::size_t k = 0; k < truth.size(); ++k) {
        num += (est[k] - truth[k]) * (est[k] - truth[k]);
        den += truth[k] * truth[k];
    }
    if (den == 0.0) throw std::invalid_argument("relative_error_signal: zero-norm reference");
    return std::sqrt(num / den) * 100.0;
}

inline double relative_error_signal(const SampledSignal& truth, const SampledSignal& est) {
    return relative_error_signal(truth.values(), est.values());
}

}  // namespace fracinit::harness
