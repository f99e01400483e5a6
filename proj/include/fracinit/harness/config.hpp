#pragma once

// Flat `key = value` run configuration.
//
//   h               sampling step; inferred from the data when absent
//   t_abs           unused by `estimate` (t_abs follows from t_in and N3)
//   n_cycles        N_C, number of history cycles
//   n_output_cycles N_0, number of measured cycles used for estimation
//   cycle_length    L in samples (default: record length / N_0)
//   alpha0          comma list of initial orders
//   intervals       comma list of lower:upper (default floor(alpha0):floor+1)
//   epsilon, max_iter, rank_tol, bounds_margin, step_halving
//   seed            generator seed
//   history_mode    zero | duplicate | file
//   history_file    history CSV for history_mode = file

#include <cstdint>
#include <string>

#include "fracinit/estimator.hpp"
#include "fracinit/harness/generators.hpp"
#include "fracinit/harness/history.hpp"
#include "fracinit/harness/io.hpp"

namespace fracinit::harness {

struct RunConfig {
    EstimationConfig estimation;
    ModelStructure structure;
    double h = 0.0;
    double t_abs = 0.0;
    std::size_t n_cycles = 0;
    std::size_t n_output_cycles = 0;  ///< 0 means the whole record
    std::size_t cycle_length = 0;     ///< 0 means record length / N_0
    std::uint64_t seed = default_seed;
    HistoryMode history_mode = HistoryMode::zero;
    std::string history_file;
};

inline RunConfig parse_run_config(const KeyValues& kv) {
    RunConfig c;
    for (const auto& key : kv.keys()) {
        static const char* known[] = {"h",       "t_abs",    "n_cycles",      "n_output_cycles", "cycle_length",
                                      "alpha0",  "intervals", "epsilon",      "max_iter",        "rank_tol",
                                      "bounds_margin", "step_halving", "seed", "history_mode",   "history_file"};
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw IoError("unknown config key '" + key + "'");
    }
    c.h = kv.real("h", 0.0);
    c.t_abs = kv.real("t_abs", 0.0);
    c.n_cycles = static_cast<std::size_t>(kv.integer("n_cycles", 0));
    c.n_output_cycles = static_cast<std::size_t>(kv.integer("n_output_cycles", 0));
    c.cycle_length = static_cast<std::size_t>(kv.integer("cycle_length", 0));
    if (kv.has("alpha0")) c.estimation.alpha0 = kv.reals("alpha0");
    c.estimation.epsilon = kv.real("epsilon", c.estimation.epsilon);
    c.estimation.max_iter = static_cast<int>(kv.integer("max_iter", c.estimation.max_iter));
    c.estimation.rank_tol = kv.real("rank_tol", c.estimation.rank_tol);
    c.estimation.bounds_margin = kv.real("bounds_margin", c.estimation.bounds_margin);
    const auto halving = kv.text("step_halving", "false");
    c.estimation.step_halving = halving == "true" || halving == "1";
    c.seed = static_cast<std::uint64_t>(kv.integer("seed", static_cast<long long>(default_seed)));
    c.history_mode = parse_history_mode(kv.text("history_mode", "zero"));
    c.history_file = kv.text("history_file", "");
    if (kv.has("intervals")) {
        c.structure.intervals = parse_intervals(kv.get("intervals"));
    } else if (!c.estimation.alpha0.empty()) {
        c.structure = ModelStructure::from_initial_orders(c.estimation.alpha0);
    }
    return c;
}

/// Model from `a`, `b`, `alpha` and optional `intervals` keys (the layout of a
/// truth file).
inline FosModel read_model(const KeyValues& kv) {
    const auto a = kv.reals("a");
    const auto alpha = kv.reals("alpha");
    const auto intervals = kv.has("intervals") ? parse_intervals(kv.get("intervals"))
                                               : ModelStructure::from_initial_orders(alpha).intervals;
    if (intervals.size() != alpha.size() || a.size() != alpha.size()) {
        throw IoError("model: a, alpha and intervals must have the same length");
    }
    std::vector<OrderValue> orders;
    for (std::size_t i = 0; i < alpha.size(); ++i) orders.emplace_back(alpha[i], intervals[i]);
    return FosModel(a, kv.real("b"), std::move(orders));
}

}  // namespace fracinit::harness
