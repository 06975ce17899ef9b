#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "poro/integrators.hpp"
#include "poro/problems.hpp"

namespace poro {

struct RunConfig {
    std::string problem = "model";  // model | unit_square | external
    double omega = 1.0;             // family parameter (coupling label)
    Index n = 8;                    // unit-square mesh resolution
    std::string external_path;

    std::vector<std::string> schemes = {"novel_iterative"};  // schemes + "midpoint"
    std::vector<Index> K_list = {1};
    std::vector<double> taus;  // halving chain when EOC is requested
    double horizon = 1.0;
    double gamma_override = -1.0;  // < 0 selects 2/(2+omega)
    Index init_substeps = 1;
    Index ref_factor = 8;          // reference runs at tau_min / ref_factor
    double fs_tol_scale = 1.0;     // fixed-stress TOL = scale * tau^3
    double fs_L = -1.0;            // < 0 selects the default stabilization

    double omega_lo = 0.05, omega_hi = 12.0;  // stability bracket
    Index sweep_steps = 1 << 10;

    std::vector<Index> runtime_n = {16, 32};

    std::string out = "report.csv";
    std::uint64_t seed = 42;
};

/// Flat key = value file with '#' comments; lists are comma separated and
/// tau entries accept both decimals and 2^-k notation.
RunConfig parse_config_file(const std::filesystem::path& path);
void apply_config_line(RunConfig& cfg, const std::string& key, const std::string& value);

struct ReportRow {
    double tau = 0.0;
    std::string scheme;
    Index K = 0;
    double error_l2_time = 0.0;
    double error_final_A = 0.0;
    double error_final_C = 0.0;
    double eoc = std::numeric_limits<double>::quiet_NaN();  // blank on first row
    double runtime_seconds = 0.0;
    bool diverged = false;
};

struct ExperimentReport {
    std::vector<ReportRow> rows;
};

/// EOC between two errors one halving apart: log2(coarse / fine).
double eoc_value(double coarse_error, double fine_error);

void write_report_csv(std::ostream& os, const ExperimentReport& report);

/// Convergence study: every (scheme, K, tau) against a midpoint reference at
/// tau_min / ref_factor, errors as a discrete L2 average in time of the
/// combined A/C-norm, normalized by the reference's own value, plus
/// final-time norms. Divergence is recorded per row, not fatal.
ExperimentReport run_convergence(const RunConfig& cfg);

struct StabilityRow {
    Index K = 0;
    double omega_critical = 0.0;  // measured coupling strength at the edge
    double omega_parameter = 0.0; // family parameter at the edge
    double omega_theory = 0.0;    // largest omega with 3 w^K < (2+w)^{K-1}
    double ratio = 0.0;           // critical / theory
    bool bracket_failed = false;
};

struct StabilityReport {
    std::vector<StabilityRow> rows;
    std::vector<std::pair<double, double>> theory_curve;  // (omega, K(omega))
};

/// Required inner iterations as a function of the coupling strength,
/// K(w) = 1 + (log w + log 3) / (log(w+2) - log w).
double theory_iterations(double omega);

StabilityReport run_stability(const RunConfig& cfg);
void write_stability_csv(std::ostream& os, const StabilityReport& report);
void write_theory_curve_csv(std::ostream& os, const StabilityReport& report);

struct LemmaReport {
    std::vector<std::pair<std::string, bool>> checks;
    bool all_pass() const {
        for (const auto& [name, ok] : checks)
            if (!ok) return false;
        return true;
    }
};

/// Seeded property suites: the four iteration-matrix norm bounds, the BDF-2
/// polarization identity, and the recursion-matrix contraction under the
/// iteration bound. All randomness flows from the seed through SplitMix64.
LemmaReport run_lemma_checks(std::uint64_t seed);
void write_lemma_report(std::ostream& os, const LemmaReport& report);

struct RuntimeRow {
    std::string scheme;
    Index K = 0;
    Index n = 0;
    double tau = 0.0;
    Index steps = 0;
    double error_l2_time = 0.0;
    double wall_seconds = 0.0;  // median of 3, monotonic clock
    Index spd_solves = 0;       // decoupled solves in the main loop
    Index coupled_solves = 0;   // Schur solves in the main loop
};

struct RuntimeReport {
    std::vector<RuntimeRow> rows;
};

/// Wall-clock comparison on the unit-square problem; initial-data
/// computation is excluded from the timed region.
RuntimeReport run_runtime_comparison(const RunConfig& cfg);
void write_runtime_csv(std::ostream& os, const RuntimeReport& report);

/// Problem selection shared by the drivers.
struct ProblemInstance {
    PoroSystem sys;
    State initial;
    std::string name;
};
ProblemInstance make_problem(const RunConfig& cfg);
ProblemFamily make_family(const RunConfig& cfg);

}  // namespace poro
