#pragma once

// Synthetic experiment generators. Every generator describes one input cycle
// of L samples; longer records repeat that cycle and are simulated from a
// zero history at t_abs = 0.
//
//   ex1-random  y + a D^0.7 y = b u, a = 1, b = 0.5, uniform [0,100] input
//   ex1-pulse   same model, 0.84 s pulse train, amplitude 350, duty 0.27
//   ex2-sinc    y + 3 D^1.5 y + 2 D^0.5 y = u, u = 10 sin(2 pi t)/(2 pi t)
//   ex2-square  same model, u = 1 on [2, 7)
//   windkessel  P + tau D^0.85 P = R_p Q, tau = 1.15, R_p = 1.13,
//               half-sine ejection 0.3 s of 0.84 s, peak 425
//   neuro       f + (k/g) D^0.6 f + (1/g) D^1.7 f = (1/g) u, k = 0.65, g = 0.41,
//               u = exp(-(t-5)^2)
//   aberration  D^0.5 y = u, u = t on (0,5), 1 afterwards

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracinit/estimator.hpp"
#include "fracinit/gl.hpp"
#include "fracinit/harness/io.hpp"
#include "fracinit/signal.hpp"

namespace fracinit::harness {

inline constexpr std::uint64_t default_seed = 42;

inline const std::vector<std::string>& generator_names() {
    static const std::vector<std::string> names = {"ex1-random", "ex1-pulse", "ex2-sinc", "ex2-square",
                                                   "windkessel", "neuro",     "aberration"};
    return names;
}

struct GeneratorSpec {
    std::string name;
    std::uint64_t seed = default_seed;
    double h = 0.01;
    std::size_t cycle_length = 1;    ///< L
    std::size_t default_cycles = 1;  ///< record length of `gen`, in cycles
    FosModel truth;
    ModelStructure structure;
    std::vector<double> default_alpha0;
    std::vector<double> input_cycle;  ///< u over one cycle, L samples
};

namespace detail {

inline FosModel model(std::vector<double> a, double b, std::vector<double> alpha, const ModelStructure& s) {
    std::vector<OrderValue> orders;
    for (std::size_t i = 0; i < alpha.size(); ++i) orders.emplace_back(alpha[i], s.intervals[i]);
    return FosModel(std::move(a), b, std::move(orders));
}

template <class F>
std::vector<double> sample_cycle(std::size_t L, double h, F&& f) {
    std::vector<double> u(L);
    for (std::size_t i = 0; i < L; ++i) u[i] = f(i, static_cast<double>(i) * h);
    return u;
}

}  // namespace detail

/// ex1 and windkessel orders live in (0, 2) so that initial guesses up to
/// 1.25 are admissible.
inline GeneratorSpec make_generator(const std::string& name, std::uint64_t seed = default_seed) {
    using std::numbers::pi;
    if (name == "ex1-random" || name == "ex1-pulse") {
        const ModelStructure s{{{0, 2}}};
        GeneratorSpec g{name, seed, 0.01, 84, 15, detail::model({1.0}, 0.5, {0.7}, s), s, {0.5}, {}};
        if (name == "ex1-random") {
            std::mt19937_64 rng(seed);
            g.input_cycle = detail::sample_cycle(g.cycle_length, g.h, [&](std::size_t, double) {
                // 53 random bits mapped to [0, 1), independent of the standard library's distributions.
                return 100.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53;
            });
        } else {
            const double on_samples = 0.27 * static_cast<double>(g.cycle_length);
            g.input_cycle = detail::sample_cycle(g.cycle_length, g.h, [&](std::size_t i, double) {
                return static_cast<double>(i) < on_samples ? 350.0 : 0.0;
            });
        }
        return g;
    }
    if (name == "ex2-sinc" || name == "ex2-square") {
        const ModelStructure s{{{1, 2}, {0, 1}}};
        const bool sinc = name == "ex2-sinc";
        GeneratorSpec g{name, seed, sinc ? 0.1 : 0.01, sinc ? 101u : 1001u, 1,
                        detail::model({3.0, 2.0}, 1.0, {1.5, 0.5}, s), s, {1.4, 0.6}, {}};
        if (sinc) {
            g.input_cycle = detail::sample_cycle(g.cycle_length, g.h, [](std::size_t i, double t) {
                if (i == 0) return 10.0;
                const double x = 2.0 * pi * t;
                return 10.0 * std::sin(x) / x;
            });
        } else {
            g.input_cycle = detail::sample_cycle(g.cycle_length, g.h, [](std::size_t i, double) {
                return (i >= 200 && i < 700) ? 1.0 : 0.0;
            });
        }
        return g;
    }
    if (name == "windkessel") {
        const ModelStructure s{{{0, 2}}};
        GeneratorSpec g{name, seed, 0.01, 84, 10, detail::model({1.15}, 1.13, {0.85}, s), s, {0.7}, {}};
        g.input_cycle = detail::sample_cycle(g.cycle_length, g.h, [](std::size_t i, double t) {
            return i < 30 ? 425.0 * std::sin(pi * t / 0.3) : 0.0;
        });
        return g;
    }
    if (name == "neuro") {
        const double k = 0.65;
        const double gamma = 0.41;
        const ModelStructure s{{{0, 1}, {1, 2}}};
        GeneratorSpec g{name, seed, 0.1, 151, 1, detail::model({k / gamma, 1.0 / gamma}, 1.0 / gamma, {0.6, 1.7}, s),
                        s, {0.5, 1.6}, {}};
        g.input_cycle = detail::sample_cycle(g.cycle_length, g.h, [](std::size_t, double t) {
            return std::exp(-(t - 5.0) * (t - 5.0));
        });
        return g;
    }
    throw std::invalid_argument("unknown generator '" + name + "'");
}

/// Input and output over n_cycles, simulated from zero history at t = 0.
struct CycleRecord {
    double h = 0.0;
    std::size_t cycle_length = 0;
    std::vector<double> u;
    std::vector<double> y;
};

inline CycleRecord simulate_cycles(const GeneratorSpec& g, std::size_t n_cycles) {
    if (n_cycles == 0) throw std::invalid_argument("simulate_cycles: need at least one cycle");
    CycleRecord r{g.h, g.cycle_length, {}, {}};
    r.u.reserve(n_cycles * g.cycle_length);
    for (std::size_t c = 0; c < n_cycles; ++c) r.u.insert(r.u.end(), g.input_cycle.begin(), g.input_cycle.end());
    const SamplingGrid grid(g.h, 0.0, 0, r.u.size());
    const auto y = simulate_fos(g.truth, SampledSignal(0.0, g.h, r.u), HistorySegment{}, grid);
    r.y.assign(y.values().begin(), y.values().end());
    return r;
}

/// The last n_estimation_cycles of a record as a dataset whose grid keeps the
/// preceding n_history_cycles as history. Also returns that true history.
struct SplitRecord {
    Dataset data;
    HistorySegment true_history;
};

inline SplitRecord split_record(const CycleRecord& r, std::size_t n_history_cycles, std::size_t n_estimation_cycles) {
    const std::size_t L = r.cycle_length;
    const std::size_t n3 = n_history_cycles * L;
    const std::size_t K = n_estimation_cycles * L;
    if (K == 0 || n3 + K > r.y.size()) throw std::invalid_argument("split_record: cycles exceed the record");
    const std::size_t offset = r.y.size() - n3 - K;
    const double t_abs = static_cast<double>(offset) * r.h;
    const SamplingGrid grid(r.h, t_abs, n3, K);
    std::vector<double> u(r.u.begin() + offset + n3, r.u.begin() + offset + n3 + K);
    std::vector<double> y(r.y.begin() + offset + n3, r.y.begin() + offset + n3 + K);
    std::vector<double> hist(r.y.begin() + offset, r.y.begin() + offset + n3);
    return {Dataset(grid, SampledSignal(grid.t_in(), r.h, std::move(u)), SampledSignal(grid.t_in(), r.h, std::move(y))),
            HistorySegment(std::move(hist))};
}

// ---------------------------------------------------------------------------
// Truth record
// ---------------------------------------------------------------------------

inline KeyValues truth_record(const GeneratorSpec& g, const SamplingGrid& grid) {
    KeyValues kv;
    kv.set("generator", g.name);
    kv.set("seed", std::to_string(g.seed));
    kv.set("h", grid.h());
    kv.set("t_abs", grid.t_abs());
    kv.set("n_history", std::to_string(grid.n_history()));
    kv.set("n_estimation", std::to_string(grid.n_estimation()));
    kv.set("cycle_length", std::to_string(g.cycle_length));
    kv.set("a", std::vector<double>(g.truth.coeffs().begin(), g.truth.coeffs().end()));
    kv.set("b", g.truth.gain());
    kv.set("alpha", g.truth.alphas());
    std::string iv;
    for (std::size_t i = 0; i < g.structure.intervals.size(); ++i) {
        if (i) iv += ", ";
        iv += std::to_string(g.structure.intervals[i].lower) + ":" + std::to_string(g.structure.intervals[i].upper);
    }
    kv.set("intervals", iv);
    return kv;
}

inline std::vector<OrderInterval> parse_intervals(const std::string& s) {
    std::vector<OrderInterval> out;
    for (const auto& item : split(s, ',')) {
        const auto parts = split(item, ':');
        if (parts.size() != 2) throw IoError("interval '" + item + "' is not lower:upper");
        out.push_back({static_cast<int>(parse_integer(parts[0])), static_cast<int>(parse_integer(parts[1]))});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Aberration: D^0.5 y = u from t_abs = 0 under three pre-initial inputs
// ---------------------------------------------------------------------------

/// Solves h^{-alpha} sum_j C_j y_{k-j} = u_k forward in k (no y term).
inline std::vector<double> simulate_pure_order(double alpha, std::span<const double> u, double h) {
    const BinomialTable table(alpha, u.size());
    const auto c = table.c();
    const double ha = std::pow(h, alpha);
    std::vector<double> y(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) {
        double s = 0.0;
        for (std::size_t j = 1; j <= k; ++j) s += c[j] * y[k - j];
        y[k] = ha * u[k] - s;
    }
    return y;
}

inline double aberration_input(int which, double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 5.0) return 1.0;
    switch (which) {
        case 0: return 0.0;
        case 1: return t;
        default: return 0.25 * t * t * t * t;
    }
}

struct AberrationResult {
    std::vector<double> t;
    std::vector<double> y0, y1, y2;
    double t_in = 5.0;

    /// sup_{(t_in, t_end]} |y1 - y2| / sup_{(t_in, t_end]} |y1|.
    double divergence() const {
        double num = 0.0;
        double den = 0.0;
        for (std::size_t k = 0; k < t.size(); ++k) {
            if (t[k] <= t_in + 1e-12) continue;
            num = std::max(num, std::abs(y1[k] - y2[k]));
            den = std::max(den, std::abs(y1[k]));
        }
        return den > 0.0 ? num / den : 0.0;
    }
};

/// Rows run from t = -1 (pre-birth, all zero) to t_end in steps of h.
inline AberrationResult aberration_demo(double t_end, double h) {
    if (!(t_end > 5.0)) throw std::invalid_argument("aberration_demo: t_end must exceed 5");
    if (!(h > 0.0)) throw std::invalid_argument("aberration_demo: h must be positive");
    const auto n_pre = static_cast<std::size_t>(std::llround(1.0 / h));
    const auto n = static_cast<std::size_t>(std::floor(t_end / h + 1e-9)) + 1;
    AberrationResult r;
    std::vector<double>* outs[3] = {&r.y0, &r.y1, &r.y2};
    for (int which = 0; which < 3; ++which) {
        std::vector<double> u(n);
        for (std::size_t k = 0; k < n; ++k) u[k] = aberration_input(which, static_cast<double>(k) * h);
        const auto y = simulate_pure_order(0.5, u, h);
        outs[which]->assign(n_pre, 0.0);
        outs[which]->insert(outs[which]->end(), y.begin(), y.end());
    }
    for (std::size_t k = 0; k < n_pre + n; ++k) {
        r.t.push_back((static_cast<double>(k) - static_cast<double>(n_pre)) * h);
    }
    return r;
}

inline CsvTable aberration_table(const AberrationResult& r) {
    CsvTable t;
    t.header = {"t", "Y0", "Y1", "Y2"};
    t.columns = {r.t, r.y0, r.y1, r.y2};
    return t;
}

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

struct GeneratedExample {
    Dataset data;
    KeyValues truth;
};

inline GeneratedExample gen_example(const std::string& name, std::uint64_t seed = default_seed) {
    if (name == "aberration") {
        const double h = 0.01;
        const std::size_t n = 1001;  // t in [0, 10]
        std::vector<double> u(n);
        for (std::size_t k = 0; k < n; ++k) u[k] = aberration_input(1, static_cast<double>(k) * h);
        auto y = simulate_pure_order(0.5, u, h);
        const SamplingGrid grid(h, 0.0, 0, n);
        KeyValues kv;
        kv.set("generator", name);
        kv.set("seed", std::to_string(seed));
        kv.set("model", "D^alpha y = u");
        kv.set("h", h);
        kv.set("t_abs", 0.0);
        kv.set("n_history", "0");
        kv.set("n_estimation", std::to_string(n));
        kv.set("alpha", std::vector<double>{0.5});
        return {Dataset(grid, SampledSignal(0.0, h, std::move(u)), SampledSignal(0.0, h, std::move(y))), kv};
    }
    const auto g = make_generator(name, seed);
    const auto rec = simulate_cycles(g, g.default_cycles);
    auto split = split_record(rec, 0, g.default_cycles);
    auto kv = truth_record(g, split.data.grid());
    return {std::move(split.data), std::move(kv)};
}

}  // namespace fracinit::harness
