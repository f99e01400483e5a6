#pragma once

/// Grunwald-Letnikov machinery: signed binomial weights and their order
/// derivatives, full-window and initialized discrete differintegrals, the
/// history (initialization) term, and the forward simulator for
///
///     y(t) + sum_i a_i D^{alpha_i} y(t) = b u(t).
///
/// The initialized derivative at estimation sample k is the full GL sum over
/// the combined sequence z = [history | y] evaluated at index k + N3. The
/// history term Psi is the part of that sum that touches history samples.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracinit/signal.hpp"

namespace fracinit {

/// Open admissible interval (lower, upper) for a differentiation order.
struct OrderInterval {
    int lower = 0;
    int upper = 1;

    bool contains(double alpha) const noexcept { return alpha > lower && alpha < upper; }
    bool overlaps(const OrderInterval& other) const noexcept {
        return lower < other.upper && other.lower < upper;
    }
    bool operator==(const OrderInterval&) const = default;
};

class OrderValue {
public:
    OrderValue(double alpha, OrderInterval interval) : alpha_(alpha), interval_(interval) {
        if (interval.lower >= interval.upper) {
            throw std::invalid_argument("OrderValue: empty interval");
        }
        if (!interval.contains(alpha)) {
            throw std::invalid_argument("OrderValue: order " + std::to_string(alpha) + " outside (" +
                                        std::to_string(interval.lower) + ", " + std::to_string(interval.upper) +
                                        ")");
        }
    }

    double alpha() const noexcept { return alpha_; }
    const OrderInterval& interval() const noexcept { return interval_; }

private:
    double alpha_;
    OrderInterval interval_;
};

/// C_j = (-1)^j binom(alpha, j) and dC_j/dalpha for j = 0..n_max.
class BinomialTable {
public:
    BinomialTable(double alpha, std::size_t n_max) : alpha_(alpha), c_(n_max + 1), dc_(n_max + 1) {
        c_[0] = 1.0;
        dc_[0] = 0.0;
        for (std::size_t j = 1; j <= n_max; ++j) {
            const double jd = static_cast<double>(j);
            const double factor = 1.0 - (1.0 + alpha) / jd;
            c_[j] = factor * c_[j - 1];
            dc_[j] = (-1.0 / jd) * c_[j - 1] + factor * dc_[j - 1];
        }
    }

    double alpha() const noexcept { return alpha_; }
    std::size_t n_max() const noexcept { return c_.size() - 1; }
    std::span<const double> c() const noexcept { return c_; }
    std::span<const double> dc() const noexcept { return dc_; }

private:
    double alpha_;
    std::vector<double> c_;
    std::vector<double> dc_;
};

inline std::vector<double> binom_coeffs(double alpha, std::size_t n_max) {
    BinomialTable t(alpha, n_max);
    return {t.c().begin(), t.c().end()};
}

inline std::vector<double> binom_coeff_derivs(double alpha, std::size_t n_max) {
    BinomialTable t(alpha, n_max);
    return {t.dc().begin(), t.dc().end()};
}

namespace detail {

/// sum_{j=j0..j1} w_j z_{k-j}; requires j1 <= k.
inline double weighted_window(std::span<const double> w, std::span<const double> z, std::size_t k, std::size_t j0,
                              std::size_t j1) {
    double s = 0.0;
    for (std::size_t j = j0; j <= j1; ++j) {
        s += w[j] * z[k - j];
    }
    return s;
}

inline void require_table(const BinomialTable& table, std::size_t n) {
    if (table.n_max() < n) {
        throw std::invalid_argument("binomial table shorter than the GL window");
    }
}

}  // namespace detail

/// h^{-alpha} sum_{j=0..k} C_j z_{k-j}: GL differintegral from the sequence start.
inline double gl_full(std::span<const double> z, const BinomialTable& table, double h, std::size_t k) {
    if (k >= z.size()) {
        throw std::out_of_range("gl_full: index out of range");
    }
    detail::require_table(table, k);
    return std::pow(h, -table.alpha()) * detail::weighted_window(table.c(), z, k, 0, k);
}

inline double gl_full(std::span<const double> z, double alpha, double h, std::size_t k) {
    if (k >= z.size()) {
        throw std::out_of_range("gl_full: index out of range");
    }
    return gl_full(z, BinomialTable(alpha, k), h, k);
}

/// History term at estimation sample k:
/// h^{-alpha} sum_{j=k+1..k+N3} C_j history[k+N3-j].
inline double psi_init(const HistorySegment& history, const BinomialTable& table, const SamplingGrid& grid,
                       std::size_t k) {
    if (k >= grid.n_estimation()) {
        throw std::out_of_range("psi_init: index out of range");
    }
    const std::size_t n3 = grid.n_history();
    if (history.size() != n3) {
        throw std::invalid_argument("psi_init: history length differs from grid N3");
    }
    if (n3 == 0) {
        return 0.0;
    }
    detail::require_table(table, k + n3);
    const auto c = table.c();
    double s = 0.0;
    for (std::size_t m = 0; m < n3; ++m) {
        // j = k + N3 - m
        s += c[k + n3 - m] * history[m];
    }
    return std::pow(grid.h(), -table.alpha()) * s;
}

inline double psi_init(const HistorySegment& history, double alpha, const SamplingGrid& grid, std::size_t k) {
    if (k >= grid.n_estimation()) {
        throw std::out_of_range("psi_init: index out of range");
    }
    return psi_init(history, BinomialTable(alpha, k + grid.n_history()), grid, k);
}

/// Uninitialized GL derivative of y on [t_in, T] plus the history term.
inline SampledSignal gl_initialized(const SampledSignal& y, const HistorySegment& history, double alpha,
                                   const SamplingGrid& grid) {
    if (y.size() != grid.n_estimation()) {
        throw std::invalid_argument("gl_initialized: y length differs from grid K");
    }
    const BinomialTable table(alpha, grid.n_total());
    const double scale = std::pow(grid.h(), -alpha);
    std::vector<double> out(y.size());
    for (std::size_t k = 0; k < y.size(); ++k) {
        out[k] = scale * detail::weighted_window(table.c(), y.values(), k, 0, k) + psi_init(history, table, grid, k);
    }
    return SampledSignal(y.t_start(), y.h(), std::move(out));
}

/// Coefficients a_i, gain b and orders alpha_i of the model above.
/// Orders must be distinct and sit in pairwise disjoint intervals; they may be
/// listed in any order.
class FosModel {
public:
    FosModel(std::vector<double> coeffs, double gain, std::vector<OrderValue> orders)
        : coeffs_(std::move(coeffs)), gain_(gain), orders_(std::move(orders)) {
        if (coeffs_.empty() || coeffs_.size() != orders_.size()) {
            throw std::invalid_argument("FosModel: need one coefficient per order and N >= 1");
        }
        for (std::size_t i = 0; i < orders_.size(); ++i) {
            for (std::size_t j = i + 1; j < orders_.size(); ++j) {
                if (orders_[i].interval().overlaps(orders_[j].interval())) {
                    throw std::invalid_argument("FosModel: order intervals overlap");
                }
            }
        }
        detail::require_finite(coeffs_, "FosModel coefficients");
        if (!std::isfinite(gain_)) {
            throw std::invalid_argument("FosModel: non-finite gain");
        }
    }

    std::size_t order_count() const noexcept { return orders_.size(); }
    std::span<const double> coeffs() const noexcept { return coeffs_; }
    double gain() const noexcept { return gain_; }
    const std::vector<OrderValue>& orders() const noexcept { return orders_; }

    std::vector<double> alphas() const {
        std::vector<double> out;
        out.reserve(orders_.size());
        for (const auto& o : orders_) out.push_back(o.alpha());
        return out;
    }

    /// p = (a_1..a_N, b).
    std::vector<double> linear_params() const {
        std::vector<double> p(coeffs_.begin(), coeffs_.end());
        p.push_back(gain_);
        return p;
    }

private:
    std::vector<double> coeffs_;
    double gain_;
    std::vector<OrderValue> orders_;
};

/// Forward recursion for the discrete initialized FOS. The history is frozen
/// and enters only through Psi.
inline SampledSignal simulate_fos(const FosModel& model, const SampledSignal& u, const HistorySegment& history,
                                  const SamplingGrid& grid) {
    const std::size_t K = grid.n_estimation();
    if (u.size() != K) {
        throw std::invalid_argument("simulate_fos: input length differs from grid K");
    }
    if (history.size() != grid.n_history()) {
        throw std::invalid_argument("simulate_fos: history length differs from grid N3");
    }
    const std::size_t n = model.order_count();
    const double h = grid.h();

    std::vector<BinomialTable> tables;
    std::vector<double> scales;
    tables.reserve(n);
    double denom = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        tables.emplace_back(model.orders()[i].alpha(), grid.n_total());
        scales.push_back(std::pow(h, -model.orders()[i].alpha()));
        denom += model.coeffs()[i] * scales.back();
    }
    if (std::abs(denom) <= 1e-12) {
        throw std::domain_error("simulate_fos: near-singular step denominator 1 + sum a_i h^-alpha_i");
    }

    std::vector<double> y(K, 0.0);
    for (std::size_t k = 0; k < K; ++k) {
        double rhs = model.gain() * u[k];
        for (std::size_t i = 0; i < n; ++i) {
            const double past = k == 0 ? 0.0 : detail::weighted_window(tables[i].c(), y, k, 1, k);
            rhs -= model.coeffs()[i] * (scales[i] * past + psi_init(history, tables[i], grid, k));
        }
        y[k] = rhs / denom;
    }
    return SampledSignal(u.t_start(), u.h(), std::move(y));
}

/// Per-sample residual y_k + sum_i a_i D^{alpha_i} y_k - b u_k of the discrete
/// initialized equation, evaluated through gl_initialized.
inline std::vector<double> fos_equation_residual(const FosModel& model, const SampledSignal& u,
                                                 const SampledSignal& y, const HistorySegment& history,
                                                 const SamplingGrid& grid) {
    std::vector<double> r(y.values().begin(), y.values().end());
    for (std::size_t k = 0; k < r.size(); ++k) r[k] -= model.gain() * u[k];
    for (std::size_t i = 0; i < model.order_count(); ++i) {
        const auto d = gl_initialized(y, history, model.orders()[i].alpha(), grid);
        for (std::size_t k = 0; k < r.size(); ++k) r[k] += model.coeffs()[i] * d[k];
    }
    return r;
}

}  // namespace fracinit
