#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "fracinit/harness/config.hpp"
#include "fracinit/harness/experiment.hpp"
#include "fracinit/harness/generators.hpp"
#include "fracinit/harness/history.hpp"
#include "fracinit/harness/io.hpp"
#include "fracinit/harness/metrics.hpp"
#include "oracles.hpp"

namespace fracinit::harness {
namespace {

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "fracinit_harness_test";
    std::filesystem::create_directories(dir);
    return dir / name;
}

TEST(DuplicateHistory, SmallCases) {
    const std::vector<double> y{1, 2, 3, 4, 5, 6};
    EXPECT_EQ(build_duplicate_history(y, 2, 0).size(), 0u);
    const auto h = build_duplicate_history(y, 2, 2);
    EXPECT_EQ(std::vector<double>(h.values().begin(), h.values().end()), (std::vector<double>{1, 2, 1, 2}));
    EXPECT_THROW(build_duplicate_history(y, 7, 1), std::invalid_argument);
}

TEST(DuplicateHistory, PeriodicSignalContinuesBackwards) {
    const std::size_t L = 17;
    auto f = [&](long k) { return std::sin(2.0 * std::numbers::pi * static_cast<double>(k) / L) + 0.3; };
    std::vector<double> y(3 * L);
    for (std::size_t k = 0; k < y.size(); ++k) y[k] = f(static_cast<long>(k));
    const auto h = build_duplicate_history(y, L, 4);
    const long n3 = static_cast<long>(h.size());
    for (long m = 0; m < n3; ++m) EXPECT_NEAR(h.values()[static_cast<std::size_t>(m)], f(m - n3), 1e-12);
}

TEST(HistorySpec, DuplicateModeNeedsWholeCycles) {
    HistorySpec s{HistoryMode::duplicate_cycles, 2, 10, ""};
    EXPECT_NO_THROW(s.validate(30));
    EXPECT_THROW(s.validate(35), std::invalid_argument);
    s.cycle_length = 0;
    EXPECT_THROW(s.validate(30), std::invalid_argument);
    EXPECT_EQ(parse_history_mode("duplicate"), HistoryMode::duplicate_cycles);
    EXPECT_THROW(parse_history_mode("mirror"), std::invalid_argument);
}

TEST(Metrics, ParamError) {
    EXPECT_NEAR(relative_error_param(1.0, 1.1), 10.0, 1e-12);
    EXPECT_EQ(relative_error_param(0.5, 0.5), 0.0);
    EXPECT_THROW(relative_error_param(0.0, 1.0), std::invalid_argument);
}

TEST(Metrics, SignalError) {
    const std::vector<double> y{1.0, -2.0, 0.5}, y2{2.0, -4.0, 1.0};
    EXPECT_EQ(relative_error_signal(y, y), 0.0);
    EXPECT_NEAR(relative_error_signal(y, y2), 100.0, 1e-12);
    EXPECT_THROW(relative_error_signal(y, std::vector<double>{1.0}), std::invalid_argument);
    EXPECT_THROW(relative_error_signal(std::vector<double>{0.0, 0.0}, std::vector<double>{1.0, 0.0}),
                 std::invalid_argument);
}

TEST(Generators, InputExamples) {
    EXPECT_EQ(make_generator("ex2-sinc").input_cycle[0], 10.0);
    EXPECT_NEAR(make_generator("neuro").input_cycle[50], 1.0, 1e-15);
    const auto pulse = make_generator("ex1-pulse").input_cycle;
    ASSERT_EQ(pulse.size(), 84u);
    for (std::size_t i = 0; i < 84; ++i) EXPECT_EQ(pulse[i], i * 0.01 < 0.2268 ? 350.0 : 0.0) << i;
    const auto square = make_generator("ex2-square").input_cycle;
    EXPECT_EQ(square[199], 0.0);
    EXPECT_EQ(square[200], 1.0);
    EXPECT_EQ(square[699], 1.0);
    EXPECT_EQ(square[700], 0.0);
    EXPECT_THROW(make_generator("ex3"), std::invalid_argument);
}

TEST(Generators, RandomInputFollowsSeed) {
    const auto a = make_generator("ex1-random", 42).input_cycle;
    const auto b = make_generator("ex1-random", 42).input_cycle;
    const auto c = make_generator("ex1-random", 43).input_cycle;
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
    for (double v : a) {
        EXPECT_GE(v, 0.0);
        EXPECT_LT(v, 100.0);
    }
}

TEST(Generators, GenExampleWritesTruth) {
    for (const auto& name : generator_names()) {
        const auto ex = gen_example(name, 7);
        EXPECT_EQ(ex.truth.get("generator"), name);
        EXPECT_EQ(ex.truth.get("seed"), "7");
        EXPECT_EQ(ex.data.u().size(), ex.data.y().size());
    }
    const auto sinc = gen_example("ex2-sinc");
    EXPECT_EQ(sinc.data.u().size(), 101u);
    EXPECT_EQ(sinc.truth.reals("alpha"), (std::vector<double>{1.5, 0.5}));
    EXPECT_EQ(parse_intervals(sinc.truth.get("intervals")).size(), 2u);
}

TEST(Generators, SplitRecordKeepsContiguousSamples) {
    const auto g = make_generator("ex1-pulse");
    const auto rec = simulate_cycles(g, 5);
    const auto s = split_record(rec, 2, 2);
    EXPECT_EQ(s.true_history.size(), 168u);
    EXPECT_NEAR(s.data.grid().t_abs(), 0.84, 1e-12);
    EXPECT_NEAR(s.data.grid().t_in(), 2.52, 1e-12);
    for (std::size_t k = 0; k < 168; ++k) {
        EXPECT_EQ(s.true_history.values()[k], rec.y[84 + k]);
        EXPECT_EQ(s.data.y()[k], rec.y[252 + k]);
    }
    EXPECT_THROW(split_record(rec, 4, 2), std::invalid_argument);
}

TEST(Aberration, OutputsAgreeBeforeTheSwitchAndSplitAfter) {
    const auto r = aberration_demo(10.0, 0.01);
    for (std::size_t k = 0; k < r.t.size(); ++k) {
        if (r.t[k] < 0.0) {
            EXPECT_EQ(r.y0[k], 0.0);
            EXPECT_EQ(r.y1[k], 0.0);
            EXPECT_EQ(r.y2[k], 0.0);
        } else if (r.t[k] < 5.0 - 1e-9) {
            EXPECT_EQ(r.y0[k], 0.0);
        }
    }
    EXPECT_GE(r.divergence(), 0.01);
    EXPECT_THROW(aberration_demo(5.0, 0.01), std::invalid_argument);
}

TEST(Aberration, PureOrderRouteMatchesGlOfInput) {
    // D^0.5 y = u from rest means y is the GL half-integral of u.
    std::mt19937_64 rng(12);
    const auto u = oracle::random_vector(rng, 80);
    const auto y = simulate_pure_order(0.5, u, 0.05);
    for (std::size_t k = 0; k < u.size(); ++k) EXPECT_NEAR(y[k], gl_full(u, -0.5, 0.05, k), 1e-12);
}

TEST(NeuroMap, Examples) {
    const std::vector<double> p{0.65 / 0.41, 1.0 / 0.41, 1.0 / 0.41};
    const std::vector<double> a{0.6, 1.7};
    const auto n = neuro_param_map(p, a);
    EXPECT_NEAR(n.k, 0.65, 1e-12);
    EXPECT_NEAR(n.gamma, 0.41, 1e-12);
    EXPECT_EQ(n.alpha2, 0.6);
    EXPECT_EQ(n.alpha1, 1.7);
    const auto z = neuro_param_map(std::vector<double>{0.0, 1.0, 1.0}, a);
    EXPECT_EQ(z.k, 0.0);
    EXPECT_EQ(z.gamma, 1.0);
    EXPECT_THROW(neuro_param_map(std::vector<double>{1.0, 1.0, 0.0}, a), std::invalid_argument);
}

TEST(NeuroMap, RoundTrip) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> d(0.05, 5.0);
    for (int i = 0; i < 100; ++i) {
        const NeuroParams in{d(rng), d(rng), 1.3, 0.4};
        const auto p = neuro_linear_params(in);
        const auto out = neuro_param_map(p, std::vector<double>{in.alpha2, in.alpha1});
        EXPECT_NEAR(out.k, in.k, 1e-12 * in.k);
        EXPECT_NEAR(out.gamma, in.gamma, 1e-12 * in.gamma);
    }
}

TEST(Io, DatasetRoundTripIsBitExact) {
    std::mt19937_64 rng(14);
    std::normal_distribution<double> d(0.0, 1e3);
    std::vector<double> u(200), y(200);
    for (auto& v : u) v = d(rng);
    for (auto& v : y) v = d(rng) * 1e-7;
    const auto g = make_grid(0.01, 0.0, 0, 200);
    const Dataset data(g, SampledSignal(0.0, 0.01, u), SampledSignal(0.0, 0.01, y));
    const auto path = scratch("round_trip.csv").string();
    write_dataset_csv(path, data);
    const auto back = read_dataset_csv(path);
    EXPECT_EQ(back.grid().h(), 0.01);
    for (std::size_t k = 0; k < 200; ++k) {
        EXPECT_EQ(back.u()[k], u[k]);
        EXPECT_EQ(back.y()[k], y[k]);
    }
}

TEST(Io, HistoryRoundTripAndBadFiles) {
    const auto g = make_grid(0.1, -0.5, 5, 3);
    const HistorySegment h(std::vector<double>{0.1, 1.0 / 3.0, -2.5e-300, 7.0, 1e300});
    const auto path = scratch("history.csv").string();
    write_history_csv(path, h, g);
    const auto back = read_history_csv(path);
    EXPECT_EQ(std::vector<double>(back.values().begin(), back.values().end()),
              std::vector<double>(h.values().begin(), h.values().end()));
    EXPECT_THROW(read_dataset_csv(path), IoError);
    EXPECT_THROW(read_csv(scratch("missing.csv").string()), IoError);
    std::istringstream ragged("t,u,y\n0,1\n");
    EXPECT_THROW(read_csv(ragged), IoError);
    EXPECT_THROW(uniform_step({0.0, 0.1, 0.3}), IoError);
}

TEST(Config, ParsesKnownKeys) {
    std::istringstream in(
        "# run\nalpha0 = 1.4, 0.6\nintervals = 1:2, 0:1\nepsilon = 1e-9\nmax_iter = 20\n"
        "n_cycles = 3\nn_output_cycles = 2\nstep_halving = true\nhistory_mode = duplicate\n");
    const auto c = parse_run_config(KeyValues::parse(in));
    EXPECT_EQ(c.estimation.alpha0, (std::vector<double>{1.4, 0.6}));
    EXPECT_EQ(c.structure.intervals.size(), 2u);
    EXPECT_EQ(c.structure.intervals[0].lower, 1);
    EXPECT_EQ(c.estimation.epsilon, 1e-9);
    EXPECT_EQ(c.estimation.max_iter, 20);
    EXPECT_EQ(c.n_cycles, 3u);
    EXPECT_EQ(c.n_output_cycles, 2u);
    EXPECT_TRUE(c.estimation.step_halving);
    EXPECT_EQ(c.history_mode, HistoryMode::duplicate_cycles);
    EXPECT_EQ(c.seed, default_seed);
}

TEST(Config, DefaultsAndErrors) {
    std::istringstream in("alpha0 = 0.7\n");
    const auto c = parse_run_config(KeyValues::parse(in));
    EXPECT_EQ(c.structure.intervals[0].lower, 0);
    EXPECT_EQ(c.structure.intervals[0].upper, 1);
    EXPECT_EQ(c.estimation.rank_tol, 1e-10);
    std::istringstream bad("alpha0 = 0.7\ntolerance = 3\n");
    EXPECT_THROW(parse_run_config(KeyValues::parse(bad)), IoError);
    std::istringstream garbled("alpha0 0.7\n");
    EXPECT_THROW(KeyValues::parse(garbled), IoError);
}

TEST(Sweep, ParsesAlphaLists) {
    EXPECT_EQ(parse_alpha0_list("0.4, 0.5", 1).size(), 2u);
    EXPECT_EQ(parse_alpha0_list("1.4, 0.6", 2), (std::vector<std::vector<double>>{{1.4, 0.6}}));
    EXPECT_EQ(parse_alpha0_list("1.4,0.6;1.3,0.7", 2).size(), 2u);
    EXPECT_THROW(parse_alpha0_list("1.4,0.6;1.3", 2), std::invalid_argument);
}

TEST(Sweep, SingleCellMatchesDirectEstimate) {
    SweepGrid grid{{2}, {1}, {{0.6}}};
    const auto rep = run_sweep("ex1-pulse", grid, EstimationConfig{});
    ASSERT_EQ(rep.rows.size(), 1u);
    EstimationConfig cfg;
    cfg.alpha0 = {0.6};
    const auto direct = paper_mode_experiment("ex1-pulse", 2, 1, cfg);
    EXPECT_EQ(rep.rows[0].output_re, direct.output_re);
    EXPECT_EQ(rep.rows[0].order_re, direct.order_re);
    EXPECT_EQ(rep.rows[0].iterations, direct.result.iterations);
    EXPECT_EQ(rep.rows[0].status, "ok");
}

TEST(Sweep, GridRowsOrderAndDeterminism) {
    SweepGrid grid{{0, 1, 2, 3, 4, 5}, {1, 2, 3, 4}, {}};
    EstimationConfig base;
    base.max_iter = 5;
    const auto a = run_sweep("ex1-pulse", grid, base, HistoryPolicy::paper_mode, default_seed, 1);
    const auto b = run_sweep("ex1-pulse", grid, base, HistoryPolicy::paper_mode, default_seed, 3);
    ASSERT_EQ(a.rows.size(), 24u);
    for (std::size_t i = 0; i < 24; ++i) {
        EXPECT_EQ(a.rows[i].n_cycles, i / 4);
        EXPECT_EQ(a.rows[i].n_output_cycles, i % 4 + 1);
        for (double v : a.rows[i].order_re) EXPECT_GE(v, 0.0);
    }
    std::ostringstream sa, sb;
    write_sweep_csv(sa, a);
    write_sweep_csv(sb, b);
    EXPECT_EQ(sa.str(), sb.str());
}

TEST(Sweep, InfeasibleCellIsRecordedNotThrown) {
    const auto g = make_generator("ex1-pulse");
    const auto rec = simulate_cycles(g, 2);
    const Record r{0.0, g.h, rec.u, rec.y};
    SweepGrid grid{{1}, {1, 3}, {{0.6}}};
    const auto rep = run_sweep(r, 84, g.structure, grid, EstimationConfig{}, g.truth);
    ASSERT_EQ(rep.rows.size(), 2u);
    EXPECT_EQ(rep.rows[0].status, "ok");
    EXPECT_NE(rep.rows[1].status.find("failed"), std::string::npos);
}

TEST(DuplicateHistoryMode, PeriodicOutputWithDuplicateHistoryIsExact) {
    // Pick an exactly L-periodic y and solve the model for the input that
    // produces it under the duplicated history; estimation must then be exact.
    const std::size_t L = 101;
    const double h = 0.1;
    const FosModel m({3.0, 2.0}, 1.0, {OrderValue(1.5, {1, 2}), OrderValue(0.5, {0, 1})});
    const auto grid = make_grid(h, 0.0, 3 * L, L);
    std::vector<double> yv(L);
    for (std::size_t k = 0; k < L; ++k) {
        const double x = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(L);
        yv[k] = std::sin(x) + 0.4 * std::cos(3.0 * x) + 0.2;
    }
    const SampledSignal y(grid.t_in(), h, yv);
    const auto hist = build_duplicate_history(y, L, 3);
    std::vector<double> uv = yv;
    for (std::size_t i = 0; i < 2; ++i) {
        const auto d = gl_initialized(y, hist, m.orders()[i].alpha(), grid);
        for (std::size_t k = 0; k < L; ++k) uv[k] += m.coeffs()[i] * d[k];
    }
    const Dataset data(grid, SampledSignal(grid.t_in(), h, uv), y);
    EstimationConfig cfg;
    cfg.alpha0 = {1.4, 0.6};
    const auto r = estimate(data, hist, ModelStructure{{{1, 2}, {0, 1}}}, cfg);
    EXPECT_NEAR(r.alpha_hat[0], 1.5, 1e-4);
    EXPECT_NEAR(r.alpha_hat[1], 0.5, 1e-4);
    EXPECT_NEAR(r.p_hat(0), 3.0, 3e-4);
    EXPECT_NEAR(r.p_hat(1), 2.0, 2e-4);
    EXPECT_NEAR(r.p_hat(2), 1.0, 1e-4);
}

TEST(DuplicateHistoryMode, ReportRecordCarriesResult) {
    const auto rep = paper_mode_experiment("ex1-pulse", 1, 1);
    const auto kv = report_record(rep);
    EXPECT_EQ(kv.get("generator"), "ex1-pulse");
    EXPECT_EQ(kv.reals("residual_history").size(), static_cast<std::size_t>(rep.result.iterations) + 1);
    EXPECT_TRUE(kv.has("re_output_percent"));
}

}  // namespace
}  // namespace fracinit::harness
