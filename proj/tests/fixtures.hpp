#pragma once

// Small simulated datasets shared by the regressor and estimator tests.

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "fracinit/gl.hpp"
#include "fracinit/signal.hpp"

namespace fixture {

struct Case {
    fracinit::Dataset data;
    fracinit::HistorySegment history;
    fracinit::FosModel truth;
};

inline std::vector<double> sinc_input(std::size_t n, double h) {
    std::vector<double> u(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double x = 2.0 * std::numbers::pi * h * static_cast<double>(k);
        u[k] = k == 0 ? 10.0 : 10.0 * std::sin(x) / x;
    }
    return u;
}

/// Two-order model driven by a sinc repeated once per K samples; the history
/// is the model's own response over the earlier cycles, so the split is exact.
inline Case two_order(std::size_t n3 = 101, std::size_t K = 101, double h = 0.1) {
    using namespace fracinit;
    FosModel m({3.0, 2.0}, 1.0, {OrderValue(1.5, {1, 2}), OrderValue(0.5, {0, 1})});
    const auto cycle = sinc_input(K, h);
    std::vector<double> u_all(n3 + K);
    for (std::size_t k = 0; k < u_all.size(); ++k) u_all[k] = cycle[(k + K - n3 % K) % K];
    const auto g_all = make_grid(h, 0.0, 0, n3 + K);
    const auto y_all = simulate_fos(m, SampledSignal(0.0, h, u_all), HistorySegment{}, g_all);
    const auto g = make_grid(h, 0.0, n3, K);
    std::vector<double> hist(y_all.values().begin(), y_all.values().begin() + static_cast<long>(n3));
    std::vector<double> u(u_all.begin() + static_cast<long>(n3), u_all.end());
    std::vector<double> y(y_all.values().begin() + static_cast<long>(n3), y_all.values().end());
    return {Dataset(g, SampledSignal(g.t_in(), h, u), SampledSignal(g.t_in(), h, y)), HistorySegment(hist), m};
}

/// One-order model with a random periodic input and a random history.
inline Case one_order(std::uint64_t seed, std::size_t n3 = 30, std::size_t K = 60, double alpha = 0.7) {
    using namespace fracinit;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(0.0, 10.0);
    FosModel m({1.0}, 0.5, {OrderValue(alpha, {0, 2})});
    const double h = 0.01;
    const auto g = make_grid(h, 0.0, n3, K);
    std::vector<double> hist(n3), u(K);
    for (auto& v : hist) v = d(rng);
    for (auto& v : u) v = d(rng);
    const SampledSignal us(g.t_in(), h, u);
    const auto y = simulate_fos(m, us, HistorySegment(hist), g);
    return {Dataset(g, us, y), HistorySegment(hist), m};
}

}  // namespace fixture
