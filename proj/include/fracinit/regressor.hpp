#pragma once

/// Linear-in-p regression system F(alpha; N3) p = R and its order
/// sensitivities dF/dalpha_j.
///
/// Column i < N holds A_i(t_k) = -(initialized GL derivative of y of order
/// alpha_i at t_k); the last column holds u(t_k); R_k = y(t_k).

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "fracinit/gl.hpp"
#include "fracinit/signal.hpp"

namespace fracinit {

struct RegressorBundle {
    Eigen::MatrixXd F;
    Eigen::VectorXd R;
    /// dF[j] = dF/dalpha_j; only column j is nonzero.
    std::vector<Eigen::MatrixXd> dF;
};

namespace detail {

inline void check_orders(std::span<const double> alphas, std::span<const OrderInterval> intervals) {
    if (alphas.empty()) {
        throw std::invalid_argument("regressor: at least one order is required");
    }
    if (!intervals.empty()) {
        if (intervals.size() != alphas.size()) {
            throw std::invalid_argument("regressor: one interval per order is required");
        }
        for (std::size_t i = 0; i < alphas.size(); ++i) {
            if (!intervals[i].contains(alphas[i])) {
                throw std::invalid_argument("regressor: order outside its admissible interval");
            }
        }
    }
    for (double a : alphas) {
        if (!std::isfinite(a)) throw std::invalid_argument("regressor: non-finite order");
    }
}

inline void check_layout(const Dataset& data, const HistorySegment& history) {
    if (history.size() != data.grid().n_history()) {
        throw std::invalid_argument("regressor: history length differs from grid N3");
    }
}

/// Full-window sums over z = [history | y] at rows k = 0..K-1:
/// S_k = sum_{j=0..k+N3} C_j z_{k+N3-j}, and the same with dC_j when `derivative`.
inline Eigen::VectorXd combined_sums(std::span<const double> z, const BinomialTable& table, std::size_t n3,
                                     std::size_t K, bool derivative) {
    const auto w = derivative ? table.dc() : table.c();
    Eigen::VectorXd s(static_cast<Eigen::Index>(K));
    for (std::size_t k = 0; k < K; ++k) {
        const std::size_t idx = k + n3;
        s(static_cast<Eigen::Index>(k)) = weighted_window(w, z, idx, 0, idx);
    }
    return s;
}

}  // namespace detail

/// F and R at the given orders. `intervals` may be empty to skip the
/// admissibility check (used by finite-difference probes).
inline RegressorBundle assemble(const Dataset& data, const HistorySegment& history, std::span<const double> alphas,
                                std::span<const OrderInterval> intervals = {}) {
    detail::check_orders(alphas, intervals);
    detail::check_layout(data, history);
    const auto& grid = data.grid();
    const std::size_t K = grid.n_estimation();
    const std::size_t n = alphas.size();
    const auto z = concat_history_output(history, data.y().values());

    RegressorBundle out;
    out.F.resize(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(n + 1));
    out.R.resize(static_cast<Eigen::Index>(K));
    for (std::size_t i = 0; i < n; ++i) {
        const BinomialTable table(alphas[i], grid.n_total());
        out.F.col(static_cast<Eigen::Index>(i)) =
            -std::pow(grid.h(), -alphas[i]) * detail::combined_sums(z, table, grid.n_history(), K, false);
    }
    for (std::size_t k = 0; k < K; ++k) {
        out.F(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n)) = data.u()[k];
        out.R(static_cast<Eigen::Index>(k)) = data.y()[k];
    }
    return out;
}

/// dF/dalpha_j for every order. With S and dS the full-window sums of C and
/// dC, the nonzero column is ln(h) h^{-alpha_j} S - h^{-alpha_j} dS.
inline std::vector<Eigen::MatrixXd> sensitivities(const Dataset& data, const HistorySegment& history,
                                                  std::span<const double> alphas,
                                                  std::span<const OrderInterval> intervals = {}) {
    detail::check_orders(alphas, intervals);
    detail::check_layout(data, history);
    const auto& grid = data.grid();
    const std::size_t K = grid.n_estimation();
    const std::size_t n = alphas.size();
    const auto z = concat_history_output(history, data.y().values());
    const double log_h = std::log(grid.h());

    std::vector<Eigen::MatrixXd> dF;
    dF.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        const BinomialTable table(alphas[j], grid.n_total());
        const double scale = std::pow(grid.h(), -alphas[j]);
        Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(n + 1));
        d.col(static_cast<Eigen::Index>(j)) =
            log_h * scale * detail::combined_sums(z, table, grid.n_history(), K, false) -
            scale * detail::combined_sums(z, table, grid.n_history(), K, true);
        dF.push_back(std::move(d));
    }
    return dF;
}

inline RegressorBundle assemble_with_sensitivities(const Dataset& data, const HistorySegment& history,
                                                   std::span<const double> alphas,
                                                   std::span<const OrderInterval> intervals = {}) {
    auto out = assemble(data, history, alphas, intervals);
    out.dF = sensitivities(data, history, alphas, intervals);
    return out;
}

}  // namespace fracinit
