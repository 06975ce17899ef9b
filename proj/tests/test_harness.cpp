#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "poro/harness.hpp"

using namespace poro;

TEST_CASE("eoc of an exact quadratic error sequence is exactly 2") {
    // e(tau) = c * tau^2 with tau halving: the ratio is exactly 4 in floating
    // point, so the reported order is exactly 2.
    const double c = 0.7318;
    double tau = 0.25;
    for (int i = 0; i < 6; ++i) {
        const double coarse = c * tau * tau;
        const double fine = c * (tau / 2.0) * (tau / 2.0);
        CHECK(eoc_value(coarse, fine) == 2.0);
        tau /= 2.0;
    }
}

TEST_CASE("theory curve value at the single-sweep boundary") {
    CHECK(theory_iterations(1.0 / 3.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(theory_iterations(1.0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(theory_iterations(2.8) > 4.9);
    CHECK_THROWS_AS(theory_iterations(0.0), std::invalid_argument);
}

TEST_CASE("config file parsing") {
    const auto path = std::filesystem::temp_directory_path() / "poro_config.txt";
    {
        std::ofstream os(path);
        os << "# convergence study\n";
        os << "problem = model\n";
        os << "omega = 0.3\n";
        os << "schemes = implicit_bdf2, novel_iterative\n";
        os << "K = 1, 3\n";
        os << "taus = 2^-4, 2^-5, 0.015625\n";
        os << "T = 1.0\n";
        os << "ref_factor = 4\n";
        os << "seed = 99\n";
        os << "out = somewhere.csv\n";
    }
    RunConfig cfg = parse_config_file(path);
    CHECK(cfg.problem == "model");
    CHECK(cfg.omega == 0.3);
    REQUIRE(cfg.schemes.size() == 2);
    CHECK(cfg.schemes[1] == "novel_iterative");
    REQUIRE(cfg.K_list.size() == 2);
    CHECK(cfg.K_list[1] == 3);
    REQUIRE(cfg.taus.size() == 3);
    CHECK(cfg.taus[0] == doctest::Approx(0.0625).epsilon(1e-16));
    CHECK(cfg.taus[2] == doctest::Approx(0.015625).epsilon(1e-16));
    CHECK(cfg.ref_factor == 4);
    CHECK(cfg.seed == 99);
    CHECK(cfg.out == "somewhere.csv");
    std::filesystem::remove(path);

    RunConfig bad;
    CHECK_THROWS_AS(apply_config_line(bad, "no_such_key", "1"), std::invalid_argument);
}

TEST_CASE("convergence report is deterministic apart from runtime columns") {
    RunConfig cfg;
    cfg.problem = "model";
    cfg.omega = 0.3;
    cfg.schemes = {"novel_iterative"};
    cfg.K_list = {1};
    cfg.taus = {1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0};
    cfg.ref_factor = 2;

    auto render = [&] {
        ExperimentReport rep = run_convergence(cfg);
        for (auto& row : rep.rows) row.runtime_seconds = 0.0;  // the only varying column
        std::stringstream ss;
        write_report_csv(ss, rep);
        return ss.str();
    };
    const std::string first = render();
    const std::string second = render();
    CHECK(first == second);
    CHECK(first.rfind("tau,scheme,K,error_l2_time,error_final_A,error_final_C,eoc,"
                      "runtime_seconds,diverged\n",
                      0) == 0);
}

TEST_CASE("self comparison against the reference is exact") {
    RunConfig cfg;
    cfg.problem = "model";
    cfg.omega = 0.3;
    cfg.schemes = {"midpoint"};
    cfg.taus = {1.0 / 32.0};
    cfg.ref_factor = 1;  // reference grid equals the scheme grid
    ExperimentReport rep = run_convergence(cfg);
    REQUIRE(rep.rows.size() == 1);
    CHECK(rep.rows[0].error_l2_time == 0.0);
    CHECK(rep.rows[0].error_final_A == 0.0);
    CHECK(rep.rows[0].error_final_C == 0.0);
}

TEST_CASE("naive splitting with one sweep is first order at moderate coupling") {
    RunConfig cfg;
    cfg.problem = "model";
    cfg.omega = 1.0;
    cfg.schemes = {"naive_iterative"};
    cfg.K_list = {1};
    cfg.taus = {1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0};
    cfg.ref_factor = 4;
    ExperimentReport rep = run_convergence(cfg);
    double terminal = 0.0;
    for (const auto& row : rep.rows)
        if (std::isfinite(row.eoc)) terminal = row.eoc;
    CHECK(terminal >= 0.8);
    CHECK(terminal <= 1.2);
}

TEST_CASE("divergence is recorded per row, not fatal") {
    RunConfig cfg;
    cfg.problem = "model";
    cfg.omega = 1.0;  // semi-explicit is unstable here
    cfg.schemes = {"semi_explicit_bdf2"};
    cfg.taus = {1.0 / 256.0};
    cfg.ref_factor = 2;
    ExperimentReport rep = run_convergence(cfg);
    REQUIRE(rep.rows.size() == 1);
    CHECK(rep.rows[0].diverged);
}

TEST_CASE("lemma suite passes on the default seed") {
    LemmaReport report = run_lemma_checks(42);
    for (const auto& [name, ok] : report.checks) {
        INFO(name);
        CHECK(ok);
    }
    CHECK(report.all_pass());
    std::stringstream ss;
    write_lemma_report(ss, report);
    CHECK(ss.str().find("PASS") != std::string::npos);
}

TEST_CASE("stability report emits the contract columns") {
    RunConfig cfg;
    cfg.problem = "model";
    cfg.K_list = {1};
    cfg.omega_lo = 0.05;
    cfg.omega_hi = 1.0;
    StabilityReport rep = run_stability(cfg);
    REQUIRE(rep.rows.size() == 1);
    CHECK_FALSE(rep.rows[0].bracket_failed);
    CHECK(rep.rows[0].omega_theory == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
    CHECK(rep.rows[0].ratio >= 1.0);
    std::stringstream ss;
    write_stability_csv(ss, rep);
    std::string header;
    std::getline(ss, header);
    CHECK(header == "K,omega_critical,omega_theory,ratio");
    std::stringstream ts;
    write_theory_curve_csv(ts, rep);
    std::getline(ts, header);
    CHECK(header == "omega,K_required");
    CHECK_FALSE(rep.theory_curve.empty());
}

TEST_CASE("bracket failure is recorded per K") {
    RunConfig cfg;
    cfg.problem = "model";
    cfg.K_list = {1};
    cfg.omega_lo = 0.05;
    cfg.omega_hi = 0.1;  // both stable: no transition
    StabilityReport rep = run_stability(cfg);
    REQUIRE(rep.rows.size() == 1);
    CHECK(rep.rows[0].bracket_failed);
}

TEST_CASE("runtime comparison counts solves exactly") {
    RunConfig cfg;
    cfg.problem = "unit_square";
    cfg.omega = 1.0;
    cfg.runtime_n = {8};
    cfg.schemes = {"novel_iterative", "implicit_bdf2", "semi_explicit_bdf2"};
    cfg.K_list = {2};
    cfg.taus = {1.0 / 8.0, 1.0 / 16.0};
    cfg.ref_factor = 2;
    RuntimeReport rep = run_runtime_comparison(cfg);
    REQUIRE(rep.rows.size() == 6);
    for (const RuntimeRow& row : rep.rows) {
        if (row.scheme == "novel_iterative") {
            CHECK(row.spd_solves == 2 * row.K * row.steps);
            CHECK(row.coupled_solves == 0);
        }
        if (row.scheme == "implicit_bdf2") CHECK(row.coupled_solves == row.steps);
        if (row.scheme == "semi_explicit_bdf2") CHECK(row.spd_solves == 2 * row.steps);
        CHECK(row.wall_seconds > 0.0);
        CHECK(std::isfinite(row.error_l2_time));
    }
    std::stringstream ss;
    write_runtime_csv(ss, rep);
    std::string header;
    std::getline(ss, header);
    CHECK(header == "scheme,K,n,tau,steps,error_l2_time,wall_seconds,spd_solves,coupled_solves");
}
