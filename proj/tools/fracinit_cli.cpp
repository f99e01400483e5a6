// fracinit: data generation, simulation, estimation and sweeps from the
// command line. Exit status is 0 whenever the command ran, converged or not.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "fracinit/fracinit.hpp"
#include "fracinit/harness/config.hpp"
#include "fracinit/harness/experiment.hpp"
#include "fracinit/harness/generators.hpp"
#include "fracinit/harness/history.hpp"
#include "fracinit/harness/io.hpp"

namespace fh = fracinit::harness;
using namespace fracinit;

namespace {

std::vector<std::size_t> parse_counts(const std::string& s) {
    std::vector<std::size_t> out;
    for (const auto& item : fh::split(s, ',')) {
        const auto v = fh::parse_integer(item);
        if (v < 0) throw std::invalid_argument("negative cycle count '" + item + "'");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

void write_or_print(const fh::KeyValues& kv, const std::string& out) {
    if (out.empty() || out == "-") {
        kv.write(std::cout);
    } else {
        kv.write(out);
    }
}

void summarize(const EstimationResult& r) {
    std::fprintf(stderr, "%s after %d iterations, alpha = %s, output error %.3g%%\n",
                 r.converged ? "converged" : "not converged", r.iterations, fh::join_reals(r.alpha_hat).c_str(),
                 r.final_output_error * 100.0);
}

fh::RunConfig load_config(const std::string& path) {
    return path.empty() ? fh::RunConfig{} : fh::parse_run_config(fh::KeyValues::read(path));
}

// ---------------------------------------------------------------------------

int cmd_gen(const std::string& name, std::uint64_t seed, const std::string& prefix) {
    const auto ex = fh::gen_example(name, seed);
    fh::write_dataset_csv(prefix + ".csv", ex.data);
    ex.truth.write(prefix + ".truth");
    std::fprintf(stderr, "wrote %s.csv (%zu samples) and %s.truth\n", prefix.c_str(), ex.data.u().size(),
                 prefix.c_str());
    return 0;
}

int cmd_simulate(const std::string& model_path, const std::string& input_path, const std::string& history_path,
                 double h_opt, const std::string& out) {
    const auto model = fh::read_model(fh::KeyValues::read(model_path));
    const auto table = fh::read_csv(input_path);
    const auto& t = table.column("t");
    const auto& u = table.column("u");
    const double h = h_opt > 0.0 ? h_opt : fh::uniform_step(t);
    const HistorySegment history = history_path.empty() ? HistorySegment{} : fh::read_history_csv(history_path);
    const double t0 = t.front();
    const SamplingGrid grid(h, t0 - static_cast<double>(history.size()) * h, history.size(), u.size());
    const auto y = simulate_fos(model, SampledSignal(t0, h, u), history, grid);
    fh::write_dataset_csv(out, Dataset(grid, SampledSignal(t0, h, u), y));
    return 0;
}

int cmd_estimate(const std::string& data_path, const std::string& config_path, const std::string& history_path,
                 const std::string& truth_path, const std::string& out) {
    auto cfg = load_config(config_path);
    if (cfg.estimation.alpha0.empty()) throw std::invalid_argument("config must set alpha0");
    if (!history_path.empty()) {
        cfg.history_mode = fh::HistoryMode::file;
        cfg.history_file = history_path;
    }
    const auto rec = fh::read_record_csv(data_path, cfg.h);

    std::size_t L = cfg.cycle_length;
    std::size_t n0 = cfg.n_output_cycles;
    if (L == 0) L = n0 > 0 ? rec.y.size() / n0 : rec.y.size();
    if (L == 0) throw std::invalid_argument("cycle length is zero");
    if (n0 == 0) n0 = rec.y.size() / L;
    const std::size_t K = n0 * L;
    if (K == 0 || K > rec.y.size()) throw std::invalid_argument("N_0 cycles of length L exceed the record");

    const SampledSignal u(rec.t0, rec.h, {rec.u.begin(), rec.u.begin() + static_cast<long>(K)});
    const SampledSignal y(rec.t0, rec.h, {rec.y.begin(), rec.y.begin() + static_cast<long>(K)});
    HistorySegment history;
    switch (cfg.history_mode) {
        case fh::HistoryMode::zero: break;
        case fh::HistoryMode::duplicate_cycles: {
            const fh::HistorySpec spec{cfg.history_mode, cfg.n_cycles, L, ""};
            spec.validate(K);
            history = fh::build_duplicate_history(y, L, cfg.n_cycles);
            break;
        }
        case fh::HistoryMode::file:
            if (cfg.history_file.empty()) throw std::invalid_argument("history_mode = file needs history_file");
            history = fh::read_history_csv(cfg.history_file);
            break;
    }
    const SamplingGrid grid(rec.h, rec.t0 - static_cast<double>(history.size()) * rec.h, history.size(), K);

    fh::ExperimentReport rep;
    rep.n_cycles = history.size() / L;
    rep.n_output_cycles = n0;
    rep.alpha0 = cfg.estimation.alpha0;
    rep.result = estimate(Dataset(grid, u, y), history, cfg.structure, cfg.estimation);
    rep.output_re = rep.result.final_output_error * 100.0;
    if (!truth_path.empty()) fh::score(rep, fh::read_model(fh::KeyValues::read(truth_path)));
    write_or_print(fh::report_record(rep), out);
    summarize(rep.result);
    return 0;
}

struct SweepArgs {
    std::string data, gen, nc_list = "0", n0_list = "1", alpha0_list, config, truth, policy = "paper", out;
    std::size_t cycle_length = 0;
    std::uint64_t seed = fh::default_seed;
    unsigned threads = 1;
};

int cmd_sweep(const SweepArgs& a) {
    if (a.data.empty() == a.gen.empty()) throw std::invalid_argument("sweep needs exactly one of --data and --gen");
    const auto cfg = load_config(a.config);
    fh::SweepGrid grid;
    grid.n_cycles = parse_counts(a.nc_list);
    grid.n_output_cycles = parse_counts(a.n0_list);
    if (grid.n_cycles.empty() || grid.n_output_cycles.empty()) throw std::invalid_argument("empty sweep grid");

    fh::SweepReport report;
    if (!a.gen.empty()) {
        fh::HistoryPolicy policy;
        if (a.policy == "paper") {
            policy = fh::HistoryPolicy::paper_mode;
        } else if (a.policy == "inverse-crime") {
            policy = fh::HistoryPolicy::inverse_crime;
        } else {
            throw std::invalid_argument("unknown policy '" + a.policy + "'");
        }
        const auto g = fh::make_generator(a.gen, a.seed);
        grid.alpha0 = fh::parse_alpha0_list(a.alpha0_list, g.structure.order_count());
        report = fh::run_sweep(a.gen, grid, cfg.estimation, policy, a.seed, a.threads);
    } else {
        const auto rec = fh::read_record_csv(a.data, cfg.h);
        const std::size_t L = a.cycle_length > 0 ? a.cycle_length : cfg.cycle_length;
        if (L == 0) throw std::invalid_argument("sweep --data needs --cycle-length or cycle_length in the config");
        auto structure = cfg.structure;
        grid.alpha0 = fh::parse_alpha0_list(a.alpha0_list, structure.intervals.empty() ? 1 : structure.order_count());
        if (structure.intervals.empty()) {
            if (grid.alpha0.empty()) throw std::invalid_argument("sweep --data needs alpha0 or intervals");
            structure = ModelStructure::from_initial_orders(grid.alpha0.front());
        }
        if (grid.alpha0.empty() && cfg.estimation.alpha0.empty()) {
            throw std::invalid_argument("sweep --data needs --alpha0-list or alpha0 in the config");
        }
        std::optional<FosModel> truth;
        if (!a.truth.empty()) truth = fh::read_model(fh::KeyValues::read(a.truth));
        report = fh::run_sweep(rec, L, structure, grid, cfg.estimation, truth, a.threads);
    }
    if (a.out.empty() || a.out == "-") {
        fh::write_sweep_csv(std::cout, report);
    } else {
        std::ofstream os(a.out);
        if (!os) throw fh::IoError("cannot write " + a.out);
        fh::write_sweep_csv(os, report);
    }
    std::size_t failed = 0;
    for (const auto& row : report.rows) failed += row.status != "ok";
    std::fprintf(stderr, "%zu cells, %zu failed\n", report.rows.size(), failed);
    return 0;
}

int cmd_aberration(double t_end, double h, const std::string& out) {
    const auto r = fh::aberration_demo(t_end, h);
    fh::write_csv(out, fh::aberration_table(r));
    std::fprintf(stderr, "normalized sup |Y1 - Y2| after t = 5: %.4g\n", r.divergence());
    return 0;
}

int cmd_paper_mode(const std::string& name, std::size_t nc, std::size_t n0, const std::string& config_path,
                   std::uint64_t seed, const std::string& out) {
    const auto cfg = load_config(config_path);
    const auto rep = fh::paper_mode_experiment(name, nc, n0, cfg.estimation, seed);
    write_or_print(fh::report_record(rep), out);
    summarize(rep.result);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fractional-order system identification with output-dependent history"};
    app.require_subcommand(1);
    // --h is the sampling step, so help is long-form only.
    app.set_help_flag("--help", "Print this help message and exit");

    std::string name, out, prefix;
    std::uint64_t seed = fh::default_seed;

    auto* gen = app.add_subcommand("gen", "Generate an example dataset and its truth file");
    gen->add_option("name", name, "ex1-random, ex1-pulse, ex2-sinc, ex2-square, windkessel, neuro or aberration")
        ->required();
    gen->add_option("--seed", seed, "Random seed");
    gen->add_option("--out", prefix, "Output prefix; writes <prefix>.csv and <prefix>.truth")->required();

    std::string model, input, history;
    double h = 0.0;
    auto* sim = app.add_subcommand("simulate", "Simulate a model from an input CSV");
    sim->set_help_flag("--help", "Print this help message and exit");
    sim->add_option("--model", model, "Model file with a, b, alpha and optional intervals")->required();
    sim->add_option("--input", input, "CSV with columns t and u")->required();
    sim->add_option("--history", history, "History CSV (t,f) placed before the first input sample");
    sim->add_option("--h", h, "Sampling step (default: from the t column)");
    sim->add_option("--out", out, "Output CSV (t,u,y)")->required();

    std::string data, config, truth;
    auto* est = app.add_subcommand("estimate", "Estimate parameters and orders from a dataset");
    est->add_option("--data", data, "Dataset CSV (t,u,y)")->required();
    est->add_option("--config", config, "key = value configuration")->required();
    est->add_option("--history", history, "History CSV; overrides history_mode");
    est->add_option("--truth", truth, "Truth file for relative parameter errors");
    est->add_option("--out", out, "Report file (default: stdout)");

    SweepArgs sa;
    auto* sweep = app.add_subcommand("sweep", "Estimate over a grid of N_C, N_0 and initial orders");
    sweep->add_option("--data", sa.data, "Dataset CSV");
    sweep->add_option("--gen", sa.gen, "Generator name");
    sweep->add_option("--nc-list", sa.nc_list, "Comma list of history cycle counts N_C");
    sweep->add_option("--n0-list", sa.n0_list, "Comma list of estimation cycle counts N_0");
    sweep->add_option("--alpha0-list", sa.alpha0_list, "Initial orders; ';' separates vectors");
    sweep->add_option("--config", sa.config, "Base configuration");
    sweep->add_option("--truth", sa.truth, "Truth file (with --data)");
    sweep->add_option("--cycle-length", sa.cycle_length, "Cycle length L in samples (with --data)");
    sweep->add_option("--policy", sa.policy, "History during estimation with --gen: paper or inverse-crime");
    sweep->add_option("--seed", sa.seed, "Generator seed");
    sweep->add_option("--threads", sa.threads, "Cells estimated concurrently")
        ->default_val(std::max(1u, std::thread::hardware_concurrency()));
    sweep->add_option("--out", sa.out, "Report CSV (default: stdout)");

    double t_end = 10.0;
    double step = 0.01;
    auto* ab = app.add_subcommand("aberration", "Three pre-initial inputs, same input after t = 5");
    ab->set_help_flag("--help", "Print this help message and exit");
    ab->add_option("--tend", t_end, "End time (> 5)");
    ab->add_option("--h", step, "Sampling step");
    ab->add_option("--out", out, "Output CSV (t,Y0,Y1,Y2)")->required();

    std::size_t nc = 10, n0 = 1;
    auto* pm = app.add_subcommand("paper-mode", "Generate N_C + N_0 cycles, estimate on the last N_0 with duplicated history");
    pm->add_option("name", name, "Generator name")->required();
    pm->add_option("--nc", nc, "History cycles N_C");
    pm->add_option("--n0", n0, "Estimation cycles N_0");
    pm->add_option("--config", config, "Estimation configuration");
    pm->add_option("--seed", seed, "Generator seed");
    pm->add_option("--out", out, "Report file (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen(name, seed, prefix);
        if (sim->parsed()) return cmd_simulate(model, input, history, h, out);
        if (est->parsed()) return cmd_estimate(data, config, history, truth, out);
        if (sweep->parsed()) return cmd_sweep(sa);
        if (ab->parsed()) return cmd_aberration(t_end, step, out);
        if (pm->parsed()) return cmd_paper_mode(name, nc, n0, config, seed, out);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
