#pragma once

/// Two-stage separable least-squares estimator.
///
/// For fixed orders the linear parameters are p = F^+ R. The orders solve
/// J(alpha) = (I - F F^+) R = 0 by Newton steps alpha <- alpha - J'^+ J, with
/// the analytic Jacobian J' built from the derivative of the pseudoinverse.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SVD>

#include "fracinit/gl.hpp"
#include "fracinit/regressor.hpp"
#include "fracinit/signal.hpp"

namespace fracinit {

// ---------------------------------------------------------------------------
// Pseudoinverse and its derivative
// ---------------------------------------------------------------------------

/// Numerical rank: singular values above rank_tol * sigma_max.
inline Eigen::Index numerical_rank(const Eigen::MatrixXd& M, double rank_tol) {
    if (M.size() == 0) return 0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return 0;
    const double cut = rank_tol * s(0);
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > cut) ++r;
    }
    return r;
}

/// Moore-Penrose inverse from a thin SVD; singular values at or below
/// rank_tol * sigma_max are treated as zero.
inline Eigen::MatrixXd pinv(const Eigen::MatrixXd& M, double rank_tol = 1e-10) {
    if (M.size() == 0) return Eigen::MatrixXd::Zero(M.cols(), M.rows());
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
    if (s.size() > 0 && s(0) > 0.0) {
        const double cut = rank_tol * s(0);
        for (Eigen::Index i = 0; i < s.size(); ++i) {
            if (s(i) > cut) inv(i) = 1.0 / s(i);
        }
    }
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

struct PinvDerivative {
    Eigen::MatrixXd value;
    /// False when a rank probe along dM saw the rank change, in which case
    /// the pseudoinverse is not differentiable there.
    bool reliable = true;
};

/// d(M^+) for a direction dM at constant rank:
///   -M^+ dM M^+ + M^+ M^+^T dM^T (I - M M^+) + (I - M^+ M) dM^T M^+^T M^+.
/// The K x K projector is never formed.
inline PinvDerivative pinv_derivative(const Eigen::MatrixXd& M, const Eigen::MatrixXd& dM,
                                      const Eigen::MatrixXd& M_pinv, double rank_tol = 1e-10) {
    if (dM.rows() != M.rows() || dM.cols() != M.cols() || M_pinv.rows() != M.cols() || M_pinv.cols() != M.rows()) {
        throw std::invalid_argument("pinv_derivative: inconsistent shapes");
    }
    const Eigen::MatrixXd& B = M_pinv;
    const Eigen::MatrixXd dMt = dM.transpose();

    // dM^T (I - M B) and (I - B M) without the large identity.
    const Eigen::MatrixXd left_null = dMt - (dMt * M) * B;
    const Eigen::MatrixXd BM = B * M;
    const Eigen::MatrixXd right_proj = Eigen::MatrixXd::Identity(BM.rows(), BM.cols()) - BM;

    PinvDerivative out;
    out.value = -B * dM * B + (B * B.transpose()) * left_null + right_proj * (dMt * (B.transpose() * B));

    constexpr double probe = 1e-6;
    const Eigen::Index r0 = numerical_rank(M, rank_tol);
    out.reliable = numerical_rank(M + probe * dM, rank_tol) == r0 && numerical_rank(M - probe * dM, rank_tol) == r0;
    return out;
}

// ---------------------------------------------------------------------------
// Separable least-squares pieces
// ---------------------------------------------------------------------------

struct LinearParams {
    Eigen::VectorXd p;
    Eigen::Index rank = 0;
    bool full_rank = true;
};

/// Minimum-norm least-squares p = F^+ R.
inline LinearParams solve_linear_params(const Eigen::MatrixXd& F, const Eigen::VectorXd& R,
                                        double rank_tol = 1e-10) {
    if (F.rows() != R.size()) {
        throw std::invalid_argument("solve_linear_params: F rows differ from R length");
    }
    LinearParams out;
    out.p = pinv(F, rank_tol) * R;
    out.rank = numerical_rank(F, rank_tol);
    out.full_rank = out.rank == std::min(F.rows(), F.cols());
    return out;
}

struct Projection {
    Eigen::MatrixXd P;  ///< F F^+
    Eigen::VectorXd J;  ///< (I - P) R
};

inline Projection projection_residual(const Eigen::MatrixXd& F, const Eigen::VectorXd& R, double rank_tol = 1e-10) {
    if (F.rows() != R.size()) {
        throw std::invalid_argument("projection_residual: F rows differ from R length");
    }
    Projection out;
    out.P = F * pinv(F, rank_tol);
    out.J = R - out.P * R;
    return out;
}

/// J without forming P.
inline Eigen::VectorXd projection_residual_vector(const Eigen::MatrixXd& F, const Eigen::MatrixXd& F_pinv,
                                                  const Eigen::VectorXd& R) {
    return R - F * (F_pinv * R);
}

/// J'_{:,j} = dJ/dalpha_j = -(dP/dalpha_j) R with dP = F dB_j + dF_j B and
/// dB_j from pinv_derivative.
/// `unreliable`, when given, counts directions whose rank probe failed.
inline Eigen::MatrixXd jacobian(const Eigen::MatrixXd& F, const std::vector<Eigen::MatrixXd>& dF,
                                const Eigen::VectorXd& R, double rank_tol = 1e-10, int* unreliable = nullptr) {
    if (F.rows() != R.size()) {
        throw std::invalid_argument("jacobian: F rows differ from R length");
    }
    const Eigen::MatrixXd B = pinv(F, rank_tol);
    const Eigen::VectorXd BR = B * R;
    Eigen::MatrixXd Jp(F.rows(), static_cast<Eigen::Index>(dF.size()));
    for (std::size_t j = 0; j < dF.size(); ++j) {
        if (dF[j].rows() != F.rows() || dF[j].cols() != F.cols()) {
            throw std::invalid_argument("jacobian: dF shape differs from F");
        }
        const auto dB = pinv_derivative(F, dF[j], B, rank_tol);
        if (!dB.reliable && unreliable != nullptr) ++*unreliable;
        Jp.col(static_cast<Eigen::Index>(j)) = -(F * (dB.value * R) + dF[j] * BR);
    }
    return Jp;
}

// ---------------------------------------------------------------------------
// Newton iteration on the orders
// ---------------------------------------------------------------------------

struct EstimationConfig {
    std::vector<double> alpha0;
    double epsilon = 1e-8;
    int max_iter = 50;
    double rank_tol = 1e-10;
    double bounds_margin = 1e-3;
    /// Halve the step while the residual grows. Off by default.
    bool step_halving = false;

    void validate() const {
        if (alpha0.empty()) throw std::invalid_argument("EstimationConfig: alpha0 is empty");
        if (!(epsilon > 0.0)) throw std::invalid_argument("EstimationConfig: epsilon must be positive");
        if (max_iter < 1) throw std::invalid_argument("EstimationConfig: max_iter must be at least 1");
        if (!(rank_tol > 0.0 && rank_tol < 1.0)) throw std::invalid_argument("EstimationConfig: rank_tol in (0,1)");
        if (!(bounds_margin > 0.0)) throw std::invalid_argument("EstimationConfig: bounds_margin must be positive");
    }
};

/// Number of orders and their admissible intervals.
struct ModelStructure {
    std::vector<OrderInterval> intervals;

    std::size_t order_count() const noexcept { return intervals.size(); }

    void validate() const {
        if (intervals.empty()) throw std::invalid_argument("ModelStructure: no orders");
        for (std::size_t i = 0; i < intervals.size(); ++i) {
            if (intervals[i].lower >= intervals[i].upper) {
                throw std::invalid_argument("ModelStructure: empty interval");
            }
            for (std::size_t j = i + 1; j < intervals.size(); ++j) {
                if (intervals[i].overlaps(intervals[j])) {
                    throw std::invalid_argument("ModelStructure: overlapping intervals");
                }
            }
        }
    }

    /// (floor(a), floor(a) + 1) for each initial order.
    static ModelStructure from_initial_orders(std::span<const double> alpha0) {
        ModelStructure s;
        for (double a : alpha0) {
            const int lo = static_cast<int>(std::floor(a));
            s.intervals.push_back({lo, lo + 1});
        }
        return s;
    }
};

struct EstimationResult {
    Eigen::VectorXd p_hat;      ///< (a_1..a_N, b)
    std::vector<double> alpha_hat;
    int iterations = 0;
    std::vector<double> residual_history;  ///< ||J|| / ||R|| per iterate, iterate 0 included
    std::vector<std::vector<double>> alpha_history;
    bool converged = false;
    /// ||y_sim - y|| / ||y|| where y_sim re-simulates the estimated model
    /// with the estimation history; NaN if that model cannot be simulated.
    double final_output_error = std::numeric_limits<double>::quiet_NaN();
    /// ||F p_hat - R|| / ||R|| (one-step predictor).
    double predictor_error = std::numeric_limits<double>::quiet_NaN();
    bool rank_deficient = false;
    int unreliable_derivatives = 0;
};

namespace detail {

/// Clamp each order into (lower + margin, upper - margin), then sort the
/// values and hand them back to the intervals in ascending interval order.
inline void make_feasible(std::vector<double>& alpha, const ModelStructure& s, double margin) {
    const std::size_t n = alpha.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& iv = s.intervals[i];
        double lo = iv.lower + margin;
        double hi = iv.upper - margin;
        if (lo > hi) lo = hi = 0.5 * (iv.lower + iv.upper);
        if (!std::isfinite(alpha[i])) alpha[i] = 0.5 * (lo + hi);
        alpha[i] = std::clamp(alpha[i], lo, hi);
    }
    std::vector<std::size_t> by_interval(n);
    std::iota(by_interval.begin(), by_interval.end(), 0);
    std::sort(by_interval.begin(), by_interval.end(),
              [&](std::size_t a, std::size_t b) { return s.intervals[a].lower < s.intervals[b].lower; });
    std::vector<double> values;
    values.reserve(n);
    for (std::size_t i : by_interval) values.push_back(alpha[i]);
    std::sort(values.begin(), values.end());
    for (std::size_t r = 0; r < n; ++r) alpha[by_interval[r]] = values[r];
}

inline double relative_norm(const Eigen::VectorXd& v, const Eigen::VectorXd& ref) {
    const double d = ref.norm();
    return d > 0.0 ? v.norm() / d : v.norm();
}

}  // namespace detail

/// Builds a FosModel from an estimate; orders are clamped strictly inside
/// their intervals.
inline FosModel model_from_estimate(const Eigen::VectorXd& p, std::span<const double> alpha,
                                    const ModelStructure& s) {
    std::vector<double> a(p.data(), p.data() + p.size() - 1);
    std::vector<OrderValue> orders;
    for (std::size_t i = 0; i < alpha.size(); ++i) orders.emplace_back(alpha[i], s.intervals[i]);
    return FosModel(std::move(a), p(p.size() - 1), std::move(orders));
}

inline EstimationResult estimate(const Dataset& data, const HistorySegment& history, const ModelStructure& structure,
                                 const EstimationConfig& config) {
    config.validate();
    structure.validate();
    if (config.alpha0.size() != structure.order_count()) {
        throw std::invalid_argument("estimate: alpha0 length differs from the number of orders");
    }
    for (std::size_t i = 0; i < config.alpha0.size(); ++i) {
        if (!structure.intervals[i].contains(config.alpha0[i])) {
            throw std::invalid_argument("estimate: alpha0 outside its admissible interval");
        }
    }

    EstimationResult res;
    std::vector<double> alpha = config.alpha0;

    struct Evaluation {
        RegressorBundle bundle;
        Eigen::MatrixXd B;
        Eigen::VectorXd J;
        double residual;
    };
    auto evaluate = [&](const std::vector<double>& a) {
        Evaluation e;
        e.bundle = assemble(data, history, a);
        e.B = pinv(e.bundle.F, config.rank_tol);
        e.J = projection_residual_vector(e.bundle.F, e.B, e.bundle.R);
        e.residual = detail::relative_norm(e.J, e.bundle.R);
        return e;
    };

    Evaluation cur = evaluate(alpha);
    res.alpha_history.push_back(alpha);
    res.residual_history.push_back(cur.residual);

    for (;;) {
        if (cur.residual <= config.epsilon) {
            res.converged = true;
            break;
        }
        if (res.iterations >= config.max_iter) break;

        const auto dF = sensitivities(data, history, alpha);
        const Eigen::MatrixXd Jp = jacobian(cur.bundle.F, dF, cur.bundle.R, config.rank_tol,
                                            &res.unreliable_derivatives);
        const Eigen::VectorXd step = pinv(Jp, config.rank_tol) * cur.J;

        double scale = 1.0;
        std::vector<double> next;
        Evaluation trial;
        for (int halvings = 0;; ++halvings) {
            next = alpha;
            for (std::size_t i = 0; i < next.size(); ++i) next[i] -= scale * step(static_cast<Eigen::Index>(i));
            detail::make_feasible(next, structure, config.bounds_margin);
            trial = evaluate(next);
            if (!config.step_halving || trial.residual <= cur.residual || halvings >= 20) break;
            scale *= 0.5;
        }

        alpha = std::move(next);
        cur = std::move(trial);
        ++res.iterations;
        res.alpha_history.push_back(alpha);
        res.residual_history.push_back(cur.residual);
    }

    res.alpha_hat = alpha;
    res.p_hat = cur.B * cur.bundle.R;
    res.rank_deficient = numerical_rank(cur.bundle.F, config.rank_tol) < cur.bundle.F.cols();
    res.predictor_error = detail::relative_norm(cur.bundle.F * res.p_hat - cur.bundle.R, cur.bundle.R);

    try {
        const FosModel fitted = model_from_estimate(res.p_hat, alpha, structure);
        const auto y_sim = simulate_fos(fitted, data.u(), history, data.grid());
        Eigen::VectorXd diff(static_cast<Eigen::Index>(y_sim.size()));
        for (std::size_t k = 0; k < y_sim.size(); ++k) diff(static_cast<Eigen::Index>(k)) = y_sim[k] - data.y()[k];
        res.final_output_error = detail::relative_norm(diff, cur.bundle.R);
    } catch (const std::exception&) {
        // Left as NaN: the fitted model is not simulable on this grid.
    }
    return res;
}

}  // namespace fracinit
