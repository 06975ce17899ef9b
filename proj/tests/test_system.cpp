#include <doctest.h>

#include <cmath>

#include "poro/kernels.hpp"
#include "poro/problems.hpp"
#include "poro/rng.hpp"
#include "poro/solve.hpp"
#include "poro/system.hpp"

using namespace poro;

namespace {

PoroSystem scalar_system(double a, double b, double c, double d,
                         PoroSystem::RhsFn f = nullptr, PoroSystem::RhsFn g = nullptr) {
    DenseMatrix A(1, 1), B(1, 1), C(1, 1), D(1, 1);
    A(0, 0) = a;
    B(0, 0) = b;
    C(0, 0) = c;
    D(0, 0) = d;
    if (!f) f = [](double) { return Vector{0.0}; };
    if (!g) g = [](double) { return Vector{0.0}; };
    return PoroSystem(std::move(A), std::move(B), std::move(C), std::move(D), f, g,
                      Validation::relaxed);
}

constexpr double kModelCoupling = 13.0 * (2.0 - 1.4142135623730951) / 9.0;

}  // namespace

TEST_CASE("assemble_Ctau") {
    PoroSystem sys = scalar_system(1.0, 1.0, 1.0, 0.5);
    CHECK(assemble_Ctau(sys, 3.0)(0, 0) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(assemble_Ctau(sys, 0.0)(0, 0) == 1.0);
    const double tau = std::pow(2.0, -10.0);
    CHECK(assemble_Ctau(sys, tau)(0, 0) ==
          doctest::Approx(1.0 + 2.0 / 3.0 * tau).epsilon(1e-16));
    CHECK_THROWS(assemble_Ctau(sys, -1.0));
}

TEST_CASE("model problem spectral constants and stiffness eigenvalues") {
    PoroSystem sys = model_problem(1.0);
    SpectralConstants sc = sys.spectral_constants();
    CHECK(sc.c_A == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sc.c_C == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sc.C_D == doctest::Approx(1.0).epsilon(1e-12));
    const double root2 = std::sqrt(2.0);
    CHECK(sc.C_A == doctest::Approx((2.0 + root2) / (2.0 - root2)).epsilon(1e-12));

    PoroSystem sys4 = model_problem(4.0);
    SpectralConstants sc4 = sys4.spectral_constants();
    CHECK(sc4.C_D == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(coupling_bound(sc4) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(coupling_bound(sc) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("coupling strength: closed form, linearity, monotonicity") {
    CHECK(coupling_strength(model_problem(1.0), 0.0) ==
          doctest::Approx(kModelCoupling).epsilon(1e-10));
    CHECK(coupling_strength_dense(model_problem(1.0), 0.0) ==
          doctest::Approx(kModelCoupling).epsilon(1e-13));
    CHECK(coupling_strength(model_problem(2.0), 0.0) ==
          doctest::Approx(2.0 * kModelCoupling).epsilon(1e-10));

    // decoupled system
    PoroSystem dec = scalar_system(2.0, 1.0, 1.0, 0.0);
    CHECK(coupling_strength(dec, 0.0) == 0.0);

    // non-increasing in tau
    PoroSystem sys = model_problem(1.0);
    const double w0 = coupling_strength_dense(sys, 0.0);
    const double w1 = coupling_strength_dense(sys, 1e-3);
    const double w2 = coupling_strength_dense(sys, 1e-1);
    CHECK(w0 >= w1);
    CHECK(w1 >= w2);
}

TEST_CASE("coupling strength stays below its bound") {
    for (double omega : {0.3, 1.0, 4.0}) {
        PoroSystem sys = model_problem(omega);
        CHECK(coupling_strength_dense(sys, 0.0) <= coupling_bound(sys) + 1e-10);
    }
    PoroSystem dec = scalar_system(2.0, 1.0, 1.0, 0.0);
    CHECK(coupling_bound(dec) == 0.0);
}

TEST_CASE("relaxation gamma") {
    CHECK(relaxation_gamma(0.0) == 1.0);
    CHECK(relaxation_gamma(2.0) == doctest::Approx(0.5).epsilon(1e-16));
    CHECK(relaxation_gamma(1.0 / 3.0) == doctest::Approx(6.0 / 7.0).epsilon(1e-15));
    CHECK_THROWS_AS(relaxation_gamma(-0.1), std::invalid_argument);
}

TEST_CASE("min_inner_iterations") {
    CHECK(min_inner_iterations(0.3) == 1);
    CHECK(min_inner_iterations(1.0 / 3.0) == 2);
    CHECK(min_inner_iterations(1.0) == 3);
    CHECK(min_inner_iterations(2.8) == 5);
    CHECK_THROWS_AS(min_inner_iterations(0.0), std::invalid_argument);

    // K = 1 exactly for omega < 1/3
    SplitMix64 rng(3);
    for (int i = 0; i < 200; ++i) {
        const double omega = rng.uniform(1e-6, 3.0);
        const bool is_one = min_inner_iterations(omega) == 1;
        CHECK(is_one == (omega < 1.0 / 3.0));
    }
}

TEST_CASE("max_stable_coupling inverts the iteration bound") {
    CHECK(max_stable_coupling(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
    CHECK(max_stable_coupling(2) == doctest::Approx(1.0).epsilon(1e-10));
    for (Index k : {1, 2, 3, 4, 5}) {
        const double w = max_stable_coupling(k);
        CHECK(min_inner_iterations(w * 0.999) <= k);
        CHECK(min_inner_iterations(w * 1.001) > k);
    }
}

TEST_CASE("check_consistency and solve_static") {
    PoroSystem sys = model_problem(1.0);
    State s = model_problem_initial(sys);
    CHECK(check_consistency(sys, s) <= 1e-12);

    PoroSystem zero_sys = scalar_system(2.0, 1.0, 1.0, 0.3);
    State z{0.0, Vector{0.0}, Vector{0.0}};
    CHECK(check_consistency(zero_sys, z) == 0.0);

    State st = solve_static(zero_sys, 0.0);
    CHECK(st.u[0] == 0.0);
    CHECK(st.p[0] == 0.0);

    // B = I, g = e1 constant: p = e1 and u = A^{-1} D^T e1
    SplitMix64 rng(17);
    DenseMatrix a = random_spd(rng, 4);
    DenseMatrix d = random_matrix(rng, 2, 4);
    auto f = [](double) { return Vector(4); };
    auto g = [](double) { return Vector{1.0, 0.0}; };
    PoroSystem sys2(a, DenseMatrix::identity(2), DenseMatrix::identity(2), d, f, g);
    State st2 = solve_static(sys2, 0.0);
    CHECK(st2.p[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(st2.p[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
    Vector expected_u = solve_spd(a, kernels::matvec_transposed(d, st2.p));
    for (Index i = 0; i < 4; ++i) CHECK(st2.u[i] == doctest::Approx(expected_u[i]).epsilon(1e-12));
    CHECK(check_consistency(sys2, st2) <= 1e-10);
}

TEST_CASE("validation rejects broken systems") {
    DenseMatrix a = DenseMatrix::identity(3);
    a(0, 1) += 1e-6;  // asymmetric
    DenseMatrix b = DenseMatrix::identity(1), c = DenseMatrix::identity(1);
    DenseMatrix d(1, 3);
    d(0, 0) = 1.0;
    auto f = [](double) { return Vector(3); };
    auto g = [](double) { return Vector(1); };
    CHECK_THROWS_WITH_AS(PoroSystem(a, b, c, d, f, g), doctest::Contains("A"),
                         std::runtime_error);

    // zero D fails the strict rank check but passes relaxed
    DenseMatrix d0(1, 3);
    CHECK_THROWS_WITH_AS(PoroSystem(DenseMatrix::identity(3), b, c, d0, f, g),
                         doctest::Contains("rank"), std::runtime_error);
    CHECK_NOTHROW(PoroSystem(DenseMatrix::identity(3), b, c, d0, f, g, Validation::relaxed));

    // more pressure rows than displacement columns can never be full rank
    DenseMatrix dwide(4, 3, 1.0);
    CHECK_THROWS_AS(PoroSystem(DenseMatrix::identity(3), DenseMatrix::identity(4),
                               DenseMatrix::identity(4), dwide, f,
                               [](double) { return Vector(4); }),
                    std::runtime_error);
}

TEST_CASE("rank report flags deficiency") {
    PoroSystem dec = scalar_system(1.0, 1.0, 1.0, 0.0);
    RankReport r = coupling_rank_report(dec);
    CHECK_FALSE(r.full_row_rank);
    PoroSystem sys = model_problem(1.0);
    RankReport r2 = coupling_rank_report(sys);
    CHECK(r2.full_row_rank);
    CHECK(r2.sigma_max == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("scheme name round trip and config validation") {
    for (Scheme s : {Scheme::implicit_bdf2, Scheme::semi_explicit_bdf2, Scheme::fixed_stress_bdf2,
                     Scheme::naive_iterative, Scheme::novel_iterative})
        CHECK(parse_scheme(scheme_name(s)) == s);
    CHECK_THROWS_AS(parse_scheme("unknown"), std::invalid_argument);

    SchemeConfig cfg;
    cfg.K = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.K = 1;
    cfg.gamma = 1.5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.gamma = 1.0;
    CHECK_NOTHROW(cfg.validate());
    cfg.scheme = Scheme::fixed_stress_bdf2;
    cfg.tol = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("time grid invariants") {
    CHECK_THROWS_AS(TimeGrid(0.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(TimeGrid(0.1, 1), std::invalid_argument);
    TimeGrid grid = TimeGrid::from_horizon(1.0, 8);
    CHECK(grid.tau == doctest::Approx(0.125).epsilon(1e-16));
    CHECK(grid.node(3) == doctest::Approx(0.375).epsilon(1e-16));
}
