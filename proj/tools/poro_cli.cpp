// Experiment driver for the poroelastic time-integration library.
//
// Subcommands: convergence, stability, lemmas, runtime, run. Every command
// reads an optional flat key=value config file and applies targeted
// command-line overrides on top. Exit codes: 0 success, 1 on any failed
// check or diverged run, 2 on configuration errors.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "poro/harness.hpp"

namespace {

struct CommonArgs {
    std::string config;
    std::vector<std::string> schemes;
    std::vector<poro::Index> K;
    std::vector<std::string> taus;
    double omega = std::numeric_limits<double>::quiet_NaN();
    std::string out;
    std::string problem;
    poro::Index n = -1;
    double T = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t seed = 0;
    bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config, "flat key = value config file");
    cmd->add_option("--scheme", args.schemes, "scheme selection (repeatable)");
    cmd->add_option("--K", args.K, "inner iteration counts (repeatable)");
    cmd->add_option("--tau", args.taus, "step sizes, decimals or 2^-k (repeatable)");
    cmd->add_option("--omega", args.omega, "coupling parameter");
    cmd->add_option("--out", args.out, "output CSV path");
    cmd->add_option("--problem", args.problem, "model | unit_square | external");
    cmd->add_option("--n", args.n, "unit-square mesh resolution");
    cmd->add_option("--T", args.T, "time horizon");
    cmd->add_option("--seed", args.seed, "harness PRNG seed")->each([&](const std::string&) {
        args.seed_set = true;
    });
}

poro::RunConfig resolve(const CommonArgs& args) {
    poro::RunConfig cfg;
    if (!args.config.empty()) cfg = poro::parse_config_file(args.config);
    if (!args.schemes.empty()) cfg.schemes = args.schemes;
    if (!args.K.empty()) cfg.K_list = args.K;
    if (!args.taus.empty()) {
        std::string joined;
        for (const auto& t : args.taus) joined += (joined.empty() ? "" : ",") + t;
        poro::apply_config_line(cfg, "taus", joined);
    }
    if (std::isfinite(args.omega)) cfg.omega = args.omega;
    if (!args.out.empty()) cfg.out = args.out;
    if (!args.problem.empty()) cfg.problem = args.problem;
    if (args.n >= 0) cfg.n = args.n;
    if (std::isfinite(args.T)) cfg.horizon = args.T;
    if (args.seed_set) cfg.seed = args.seed;
    return cfg;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::invalid_argument("cannot open output file " + path);
    return os;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"poroelastic time integration experiments"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string dump_path;

    CLI::App* convergence = app.add_subcommand("convergence", "EOC study against a midpoint reference");
    CLI::App* stability = app.add_subcommand("stability", "critical-coupling sweep per K");
    CLI::App* lemmas = app.add_subcommand("lemmas", "seeded spectral property suites");
    CLI::App* runtime = app.add_subcommand("runtime", "wall-clock and solve-count comparison");
    CLI::App* run = app.add_subcommand("run", "single integration with trajectory export");
    for (CLI::App* cmd : {convergence, stability, lemmas, runtime, run}) add_common(cmd, args);
    run->add_option("--dump", dump_path, "binary trajectory dump path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const poro::RunConfig cfg = resolve(args);

        if (convergence->parsed()) {
            const poro::ExperimentReport report = poro::run_convergence(cfg);
            auto os = open_out(cfg.out);
            poro::write_report_csv(os, report);
            poro::write_report_csv(std::cout, report);
            for (const auto& row : report.rows)
                if (row.diverged) return 1;
            return 0;
        }
        if (stability->parsed()) {
            const poro::StabilityReport report = poro::run_stability(cfg);
            auto os = open_out(cfg.out);
            poro::write_stability_csv(os, report);
            const std::string theory_path = cfg.out + ".theory.csv";
            auto ts = open_out(theory_path);
            poro::write_theory_curve_csv(ts, report);
            poro::write_stability_csv(std::cout, report);
            for (const auto& row : report.rows)
                if (row.bracket_failed) return 1;
            return 0;
        }
        if (lemmas->parsed()) {
            const poro::LemmaReport report = poro::run_lemma_checks(cfg.seed);
            poro::write_lemma_report(std::cout, report);
            return report.all_pass() ? 0 : 1;
        }
        if (runtime->parsed()) {
            const poro::RuntimeReport report = poro::run_runtime_comparison(cfg);
            auto os = open_out(cfg.out);
            poro::write_runtime_csv(os, report);
            poro::write_runtime_csv(std::cout, report);
            return 0;
        }
        if (run->parsed()) {
            if (cfg.taus.size() != 1)
                throw std::invalid_argument("run: exactly one --tau is required");
            if (cfg.schemes.size() != 1)
                throw std::invalid_argument("run: exactly one --scheme is required");
            poro::ProblemInstance problem = poro::make_problem(cfg);
            const double tau = cfg.taus.front();
            const poro::TimeGrid grid(tau, static_cast<poro::Index>(std::llround(cfg.horizon / tau)));
            poro::Trajectory traj;
            if (cfg.schemes.front() == "midpoint") {
                traj = poro::integrate_midpoint(problem.sys, grid, problem.initial);
            } else {
                poro::SchemeConfig sc;
                sc.scheme = poro::parse_scheme(cfg.schemes.front());
                sc.K = cfg.K_list.empty() ? 1 : cfg.K_list.front();
                sc.gamma = cfg.gamma_override >= 0.0 ? cfg.gamma_override
                                                     : poro::relaxation_gamma(cfg.omega);
                sc.tol = cfg.fs_tol_scale * tau * tau * tau;
                sc.L = cfg.fs_L;
                sc.init.substeps = cfg.init_substeps;
                traj = poro::integrate(problem.sys, grid, sc, problem.initial);
            }
            auto os = open_out(cfg.out);
            poro::write_trajectory_csv(os, problem.sys, traj);
            if (!dump_path.empty()) {
                std::ofstream dump(dump_path, std::ios::binary);
                if (!dump) throw std::invalid_argument("cannot open dump file " + dump_path);
                poro::write_trajectory_binary(dump, traj);
            }
            if (traj.diverged) {
                std::cerr << "trajectory diverged at step " << traj.divergence_step << "\n";
                return 1;
            }
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
