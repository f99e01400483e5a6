#pragma once

/// Value types shared by the kernel, regressor and estimator: the uniform
/// sampling grid, sampled signals, pre-initial history segments and datasets.
///
/// Time is carried as (start, step, index). Absolute sample times are derived
/// on demand and never stored per sample.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fracinit {

/// Uniform grid of a record born at `t_abs`: `n_history` pre-initial samples
/// followed by `n_estimation` samples starting at `t_in`.
class SamplingGrid {
public:
    SamplingGrid(double h, double t_abs, std::size_t n_history, std::size_t n_estimation)
        : h_(h), t_abs_(t_abs), n_history_(n_history), n_estimation_(n_estimation) {
        if (!(h > 0.0) || !std::isfinite(h)) {
            throw std::invalid_argument("SamplingGrid: step h must be positive and finite");
        }
        if (!std::isfinite(t_abs)) {
            throw std::invalid_argument("SamplingGrid: t_abs must be finite");
        }
        if (n_estimation == 0) {
            throw std::invalid_argument("SamplingGrid: estimation length K must be at least 1");
        }
    }

    double h() const noexcept { return h_; }
    double t_abs() const noexcept { return t_abs_; }
    std::size_t n_history() const noexcept { return n_history_; }
    std::size_t n_estimation() const noexcept { return n_estimation_; }
    std::size_t n_total() const noexcept { return n_history_ + n_estimation_; }

    double t_in() const noexcept { return t_abs_ + static_cast<double>(n_history_) * h_; }

    /// Time of combined-sequence sample m (history first, then estimation samples).
    double time_of(std::size_t m) const noexcept { return t_abs_ + static_cast<double>(m) * h_; }

    bool operator==(const SamplingGrid&) const = default;

private:
    double h_;
    double t_abs_;
    std::size_t n_history_;
    std::size_t n_estimation_;
};

inline SamplingGrid make_grid(double h, double t_abs, std::size_t n_history, std::size_t n_estimation) {
    return SamplingGrid(h, t_abs, n_history, n_estimation);
}

namespace detail {

inline void require_finite(std::span<const double> values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument(std::string(what) + ": non-finite sample");
        }
    }
}

}  // namespace detail

/// Uniformly sampled, finite, non-empty real time series.
class SampledSignal {
public:
    SampledSignal(double t_start, double h, std::vector<double> values)
        : t_start_(t_start), h_(h), values_(std::move(values)) {
        if (!(h > 0.0) || !std::isfinite(h)) {
            throw std::invalid_argument("SampledSignal: step must be positive and finite");
        }
        if (values_.empty()) {
            throw std::invalid_argument("SampledSignal: empty signal");
        }
        detail::require_finite(values_, "SampledSignal");
    }

    double t_start() const noexcept { return t_start_; }
    double h() const noexcept { return h_; }
    std::size_t size() const noexcept { return values_.size(); }
    double time_of(std::size_t k) const noexcept { return t_start_ + static_cast<double>(k) * h_; }

    double operator[](std::size_t k) const { return values_[k]; }
    std::span<const double> values() const noexcept { return values_; }

private:
    double t_start_;
    double h_;
    std::vector<double> values_;
};

/// Pre-initial samples f_in on [t_abs, t_in), oldest first; the last sample
/// sits at t_in - h so the combined sequence never duplicates t_in.
class HistorySegment {
public:
    HistorySegment() = default;
    explicit HistorySegment(std::vector<double> values) : values_(std::move(values)) {
        detail::require_finite(values_, "HistorySegment");
    }

    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }
    double operator[](std::size_t m) const { return values_[m]; }
    std::span<const double> values() const noexcept { return values_; }

    static HistorySegment zeros(std::size_t n) { return HistorySegment(std::vector<double>(n, 0.0)); }

private:
    std::vector<double> values_;
};

/// Input/output record on [t_in, T] together with its grid.
class Dataset {
public:
    Dataset(SamplingGrid grid, SampledSignal u, SampledSignal y)
        : grid_(grid), u_(std::move(u)), y_(std::move(y)) {
        const std::size_t k = grid_.n_estimation();
        if (u_.size() != k || y_.size() != k) {
            throw std::invalid_argument("Dataset: u and y must both have K samples");
        }
        const double tol = 1e-9 * std::max(1.0, std::abs(grid_.t_in()));
        if (std::abs(u_.t_start() - grid_.t_in()) > tol || std::abs(y_.t_start() - grid_.t_in()) > tol) {
            throw std::invalid_argument("Dataset: u and y must start at t_in");
        }
        if (u_.h() != grid_.h() || y_.h() != grid_.h()) {
            throw std::invalid_argument("Dataset: u and y must share the grid step");
        }
    }

    const SamplingGrid& grid() const noexcept { return grid_; }
    const SampledSignal& u() const noexcept { return u_; }
    const SampledSignal& y() const noexcept { return y_; }

private:
    SamplingGrid grid_;
    SampledSignal u_;
    SampledSignal y_;
};

/// Combined sequence z = [history | y] used by the full-window GL sum.
inline std::vector<double> concat_history_output(const HistorySegment& history, std::span<const double> y) {
    std::vector<double> z;
    z.reserve(history.size() + y.size());
    z.insert(z.end(), history.values().begin(), history.values().end());
    z.insert(z.end(), y.begin(), y.end());
    return z;
}

inline std::vector<double> concat_history_output(const HistorySegment& history, const SampledSignal& y) {
    return concat_history_output(history, y.values());
}

/// Checked variant: the history and output must match the grid's N3 and K.
inline std::vector<double> concat_history_output(const HistorySegment& history, const SampledSignal& y,
                                                 const SamplingGrid& grid) {
    if (history.size() != grid.n_history() || y.size() != grid.n_estimation()) {
        throw std::invalid_argument("concat_history_output: lengths do not match the grid");
    }
    return concat_history_output(history, y.values());
}

}  // namespace fracinit
