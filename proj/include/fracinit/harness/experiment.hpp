#pragma once

// Estimation experiments on generated data.
//
// Truth data always come from simulating N_C + N_0 cycles from a zero
// history. The estimator sees the last N_0 cycles. In inverse-crime mode it
// also gets the true preceding N_C cycles as history; in paper mode it gets
// N_C duplicates of the first measured cycle instead, so the history it
// assumes differs from the one that produced the data.

#include <cmath>
#include <cstddef>
#include <functional>
#include <future>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "fracinit/estimator.hpp"
#include "fracinit/harness/generators.hpp"
#include "fracinit/harness/history.hpp"
#include "fracinit/harness/io.hpp"
#include "fracinit/harness/metrics.hpp"

namespace fracinit::harness {

enum class HistoryPolicy { inverse_crime, paper_mode };

struct ExperimentReport {
    std::string generator;
    std::size_t n_cycles = 0;         ///< N_C
    std::size_t n_output_cycles = 0;  ///< N_0
    std::vector<double> alpha0;
    EstimationResult result;
    std::vector<double> param_re;  ///< Re% of a_1..a_N, b
    std::vector<double> order_re;  ///< Re% of alpha_1..alpha_N
    double output_re = std::numeric_limits<double>::quiet_NaN();
};

/// Re% of every estimate against the generator truth.
inline void score(ExperimentReport& rep, const FosModel& truth) {
    const auto p = truth.linear_params();
    const auto a = truth.alphas();
    rep.param_re.clear();
    rep.order_re.clear();
    for (std::size_t i = 0; i < p.size(); ++i) {
        rep.param_re.push_back(relative_error_param(p[i], rep.result.p_hat(static_cast<Eigen::Index>(i))));
    }
    for (std::size_t i = 0; i < a.size(); ++i) rep.order_re.push_back(relative_error_param(a[i], rep.result.alpha_hat[i]));
    rep.output_re = rep.result.final_output_error * 100.0;
}

inline ExperimentReport run_experiment(const GeneratorSpec& g, std::size_t n_cycles, std::size_t n_output_cycles,
                                       EstimationConfig config, HistoryPolicy policy) {
    if (n_output_cycles == 0) throw std::invalid_argument("experiment: N_0 must be at least 1");
    if (config.alpha0.empty()) config.alpha0 = g.default_alpha0;
    const auto record = simulate_cycles(g, n_cycles + n_output_cycles);
    const auto split = split_record(record, n_cycles, n_output_cycles);
    const HistorySegment history = policy == HistoryPolicy::inverse_crime
                                       ? split.true_history
                                       : build_duplicate_history(split.data.y(), g.cycle_length, n_cycles);

    ExperimentReport rep;
    rep.generator = g.name;
    rep.n_cycles = n_cycles;
    rep.n_output_cycles = n_output_cycles;
    rep.alpha0 = config.alpha0;
    rep.result = estimate(split.data, history, g.structure, config);
    score(rep, g.truth);
    return rep;
}

inline ExperimentReport paper_mode_experiment(const std::string& name, std::size_t n_cycles,
                                              std::size_t n_output_cycles, const EstimationConfig& config = {},
                                              std::uint64_t seed = default_seed) {
    return run_experiment(make_generator(name, seed), n_cycles, n_output_cycles, config, HistoryPolicy::paper_mode);
}

inline ExperimentReport inverse_crime_experiment(const std::string& name, std::size_t n_cycles,
                                                 std::size_t n_output_cycles, const EstimationConfig& config = {},
                                                 std::uint64_t seed = default_seed) {
    return run_experiment(make_generator(name, seed), n_cycles, n_output_cycles, config, HistoryPolicy::inverse_crime);
}

// ---------------------------------------------------------------------------
// Neurovascular parameter map
// ---------------------------------------------------------------------------

struct NeuroParams {
    double k = 0.0;
    double gamma = 0.0;
    double alpha1 = 0.0;  ///< higher order, in (1, 2)
    double alpha2 = 0.0;  ///< lower order, in (0, 1)
};

/// From the normalized fit y + (k/g) D^{alpha2} y + (1/g) D^{alpha1} y = (1/g) u
/// with p = (a_{alpha2}, a_{alpha1}, b) and orders (alpha2, alpha1).
inline NeuroParams neuro_param_map(std::span<const double> p_hat, std::span<const double> alpha_hat) {
    if (p_hat.size() != 3 || alpha_hat.size() != 2) {
        throw std::invalid_argument("neuro_param_map: expects a two-order estimate");
    }
    if (p_hat[2] == 0.0) throw std::invalid_argument("neuro_param_map: zero gain estimate");
    NeuroParams out;
    out.gamma = 1.0 / p_hat[2];
    out.k = p_hat[0] * out.gamma;
    out.alpha2 = alpha_hat[0];
    out.alpha1 = alpha_hat[1];
    return out;
}

/// Inverse of neuro_param_map (with a_{alpha1} = 1/gamma).
inline std::vector<double> neuro_linear_params(const NeuroParams& n) {
    return {n.k / n.gamma, 1.0 / n.gamma, 1.0 / n.gamma};
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

struct SweepRow {
    std::size_t n_cycles = 0;
    std::size_t n_output_cycles = 0;
    std::vector<double> alpha0;
    std::vector<double> param_re;
    std::vector<double> order_re;
    double output_re = std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;
    bool converged = false;
    std::string status = "ok";
};

struct SweepReport {
    std::size_t order_count = 0;
    std::vector<SweepRow> rows;
};

struct SweepGrid {
    std::vector<std::size_t> n_cycles;
    std::vector<std::size_t> n_output_cycles;
    std::vector<std::vector<double>> alpha0;  ///< empty means the generator default
};

/// Parses an alpha0 list. Vectors are separated by ';' and components by
/// ','. Without ';' a single-order model reads each comma item as its own
/// vector, and a multi-order model reads the whole list as one vector.
inline std::vector<std::vector<double>> parse_alpha0_list(const std::string& s, std::size_t order_count) {
    std::vector<std::vector<double>> out;
    if (trim(s).empty()) return out;
    if (s.find(';') != std::string::npos) {
        for (const auto& item : split(s, ';')) {
            if (!item.empty()) out.push_back(parse_real_list(item));
        }
    } else if (order_count == 1) {
        for (double v : parse_real_list(s)) out.push_back({v});
    } else {
        out.push_back(parse_real_list(s));
    }
    for (const auto& v : out) {
        if (v.size() != order_count) throw std::invalid_argument("alpha0 vector has the wrong number of orders");
    }
    return out;
}

/// One estimate per (N_C, N_0, alpha0) cell, rows in lexicographic grid order.
/// `cell` runs a single cell; failures are recorded in the row.
inline SweepReport run_sweep_cells(
    const SweepGrid& grid, std::size_t order_count,
    const std::function<ExperimentReport(std::size_t, std::size_t, const std::vector<double>&)>& cell,
    unsigned threads = 1) {
    struct Cell {
        std::size_t nc, n0;
        std::vector<double> alpha0;
    };
    std::vector<Cell> cells;
    const std::vector<std::vector<double>> alphas = grid.alpha0.empty() ? std::vector<std::vector<double>>{{}} : grid.alpha0;
    for (auto nc : grid.n_cycles) {
        for (auto n0 : grid.n_output_cycles) {
            for (const auto& a0 : alphas) cells.push_back({nc, n0, a0});
        }
    }

    auto run = [&](const Cell& c) {
        SweepRow row;
        row.n_cycles = c.nc;
        row.n_output_cycles = c.n0;
        row.alpha0 = c.alpha0;
        try {
            const auto rep = cell(c.nc, c.n0, c.alpha0);
            row.alpha0 = rep.alpha0;
            row.param_re = rep.param_re;
            row.order_re = rep.order_re;
            row.output_re = rep.output_re;
            row.iterations = rep.result.iterations;
            row.converged = rep.result.converged;
        } catch (const std::exception& e) {
            row.status = std::string("failed: ") + e.what();
        }
        return row;
    };

    SweepReport report;
    report.order_count = order_count;
    report.rows.resize(cells.size());
    if (threads <= 1) {
        for (std::size_t i = 0; i < cells.size(); ++i) report.rows[i] = run(cells[i]);
    } else {
        for (std::size_t start = 0; start < cells.size(); start += threads) {
            std::vector<std::future<SweepRow>> batch;
            for (std::size_t i = start; i < std::min(cells.size(), start + threads); ++i) {
                batch.push_back(std::async(std::launch::async, run, std::cref(cells[i])));
            }
            for (std::size_t i = 0; i < batch.size(); ++i) report.rows[start + i] = batch[i].get();
        }
    }
    return report;
}

inline SweepReport run_sweep(const std::string& generator, const SweepGrid& grid, const EstimationConfig& base,
                             HistoryPolicy policy = HistoryPolicy::paper_mode, std::uint64_t seed = default_seed,
                             unsigned threads = 1) {
    const auto g = make_generator(generator, seed);
    SweepGrid filled = grid;
    if (filled.alpha0.empty()) filled.alpha0 = {base.alpha0.empty() ? g.default_alpha0 : base.alpha0};
    return run_sweep_cells(
        filled, g.structure.order_count(),
        [&](std::size_t nc, std::size_t n0, const std::vector<double>& a0) {
            EstimationConfig cfg = base;
            if (!a0.empty()) cfg.alpha0 = a0;
            return run_experiment(g, nc, n0, cfg, policy);
        },
        threads);
}

/// Sweep over a measured record: the first N_0 cycles of length L are the
/// estimation data, with N_C duplicates of the first cycle as history.
/// `truth`, when given, is used for parameter errors.
inline SweepReport run_sweep(const Record& record, std::size_t cycle_length, const ModelStructure& structure,
                             const SweepGrid& grid, const EstimationConfig& base,
                             const std::optional<FosModel>& truth = std::nullopt, unsigned threads = 1) {
    if (cycle_length == 0) throw std::invalid_argument("sweep: cycle length must be positive");
    SweepGrid filled = grid;
    if (filled.alpha0.empty()) filled.alpha0 = {base.alpha0};
    return run_sweep_cells(
        filled, structure.order_count(),
        [&](std::size_t nc, std::size_t n0, const std::vector<double>& a0) {
            const std::size_t K = n0 * cycle_length;
            if (K == 0 || K > record.y.size()) {
                throw std::invalid_argument("infeasible cell: N_0 cycles exceed the record");
            }
            const std::size_t n3 = nc * cycle_length;
            const SamplingGrid g(record.h, record.t0 - static_cast<double>(n3) * record.h, n3, K);
            const Dataset data(g, SampledSignal(record.t0, record.h, {record.u.begin(), record.u.begin() + K}),
                               SampledSignal(record.t0, record.h, {record.y.begin(), record.y.begin() + K}));
            EstimationConfig cfg = base;
            if (!a0.empty()) cfg.alpha0 = a0;
            ExperimentReport rep;
            rep.n_cycles = nc;
            rep.n_output_cycles = n0;
            rep.alpha0 = cfg.alpha0;
            rep.result = estimate(data, build_duplicate_history(data.y(), cycle_length, nc), structure, cfg);
            rep.output_re = rep.result.final_output_error * 100.0;
            if (truth) score(rep, *truth);
            return rep;
        },
        threads);
}

inline void write_sweep_csv(std::ostream& out, const SweepReport& r) {
    const std::size_t n = r.order_count;
    out << "nc,n0,alpha0";
    for (std::size_t i = 1; i <= n; ++i) out << ",re_a" << i;
    out << ",re_b";
    for (std::size_t i = 1; i <= n; ++i) out << ",re_alpha" << i;
    out << ",re_y,iterations,converged,status\n";
    auto field = [&](const std::vector<double>& v, std::size_t i) {
        return i < v.size() ? format_real(v[i]) : std::string("nan");
    };
    for (const auto& row : r.rows) {
        out << row.n_cycles << ',' << row.n_output_cycles << ',' << join_reals(row.alpha0, " ");
        for (std::size_t i = 0; i <= n; ++i) out << ',' << field(row.param_re, i);
        for (std::size_t i = 0; i < n; ++i) out << ',' << field(row.order_re, i);
        out << ',' << format_real(row.output_re) << ',' << row.iterations << ',' << (row.converged ? 1 : 0) << ','
            << row.status << '\n';
    }
}

inline KeyValues report_record(const ExperimentReport& rep) {
    KeyValues kv;
    if (!rep.generator.empty()) kv.set("generator", rep.generator);
    kv.set("n_cycles", std::to_string(rep.n_cycles));
    kv.set("n_output_cycles", std::to_string(rep.n_output_cycles));
    kv.set("alpha0", rep.alpha0);
    const auto& r = rep.result;
    kv.set("p_hat", std::vector<double>(r.p_hat.data(), r.p_hat.data() + r.p_hat.size()));
    kv.set("alpha_hat", r.alpha_hat);
    kv.set("iterations", std::to_string(r.iterations));
    kv.set("converged", r.converged ? "true" : "false");
    kv.set("residual_history", r.residual_history);
    kv.set("final_output_error", r.final_output_error);
    kv.set("predictor_error", r.predictor_error);
    kv.set("rank_deficient", r.rank_deficient ? "true" : "false");
    kv.set("unreliable_derivatives", std::to_string(r.unreliable_derivatives));
    if (!rep.param_re.empty()) kv.set("re_params_percent", rep.param_re);
    if (!rep.order_re.empty()) kv.set("re_orders_percent", rep.order_re);
    kv.set("re_output_percent", rep.output_re);
    return kv;
}

}  // namespace fracinit::harness
