#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "poro/kernels.hpp"
#include "poro/matrix_market.hpp"
#include "poro/problems.hpp"
#include "poro/solve.hpp"

using namespace poro;

TEST_CASE("model problem matrices and normalization") {
    PoroSystem sys = model_problem(2.0);
    CHECK(sys.n_u() == 3);
    CHECK(sys.n_p() == 1);
    const double s = 1.0 / (2.0 - std::sqrt(2.0));
    CHECK(sys.A()(0, 0) == doctest::Approx(2.0 * s).epsilon(1e-15));
    CHECK(sys.A()(0, 1) == doctest::Approx(-s).epsilon(1e-15));
    CHECK(sys.B()(0, 0) == 1.0);
    CHECK(sys.C()(0, 0) == 1.0);
    const double rw = std::sqrt(2.0);
    CHECK(sys.D()(0, 0) == doctest::Approx(rw * 2.0 / 3.0).epsilon(1e-15));
    CHECK(sys.D()(0, 1) == doctest::Approx(rw / 3.0).epsilon(1e-15));
    Vector f = sys.f(0.3);
    for (Index i = 0; i < 3; ++i) CHECK(f[i] == 1.0);
    CHECK(sys.g(0.7)[0] == doctest::Approx(std::sin(0.7)).epsilon(1e-16));
}

TEST_CASE("model problem coupling scales linearly in the parameter") {
    const double base = coupling_strength_dense(model_problem(1.0), 0.0);
    CHECK(base == doctest::Approx(13.0 * (2.0 - std::sqrt(2.0)) / 9.0).epsilon(1e-12));
    for (double omega : {0.25, 2.0, 5.0})
        CHECK(coupling_strength_dense(model_problem(omega), 0.0) ==
              doctest::Approx(omega * base).epsilon(1e-11));
}

TEST_CASE("model initial state is consistent with p0 = 1") {
    PoroSystem sys = model_problem(1.0);
    State s = model_problem_initial(sys);
    CHECK(s.p[0] == 1.0);
    CHECK(check_consistency(sys, s) <= 1e-12);
}

TEST_CASE("material parameter validation") {
    MaterialParams mat;
    CHECK_NOTHROW(mat.validate());
    mat.kappa = 0.0;
    CHECK_THROWS_AS(mat.validate(), std::invalid_argument);
}

TEST_CASE("fem patch test: stiffness annihilates constants") {
    fem::StructuredMesh2D mesh(6);
    DenseMatrix b = fem::pressure_stiffness(mesh);
    Vector ones(mesh.node_count(), 1.0);
    Vector r = kernels::matvec(b, ones);
    for (Index i = 0; i < r.size(); ++i) CHECK(std::abs(r[i]) <= 1e-13);
}

TEST_CASE("fem mass matrix quadrature identities") {
    fem::StructuredMesh2D mesh(8);
    DenseMatrix c = fem::pressure_mass(mesh);
    Vector areas = fem::nodal_areas(mesh);
    double total = 0.0;
    for (Index i = 0; i < c.rows(); ++i) {
        double row = 0.0;
        for (Index j = 0; j < c.cols(); ++j) row += c(i, j);
        CHECK(row == doctest::Approx(areas[i]).epsilon(1e-12));
        total += row;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("fem coupling columns sum to zero over all pressure nodes") {
    // \int div(v) = 0 for v vanishing on the boundary
    fem::StructuredMesh2D mesh(5);
    DenseMatrix d = fem::coupling_divergence(mesh);
    for (Index j = 0; j < d.cols(); ++j) {
        double col = 0.0;
        for (Index i = 0; i < d.rows(); ++i) col += d(i, j);
        CHECK(std::abs(col) <= 1e-14);
    }
}

TEST_CASE("pinned Neumann Poisson solve converges at second order") {
    // -Lap p = f with f = cos(pi x) cos(pi y), exact p = f / (2 pi^2).
    // Zero-mean data keeps the pinned system compatible.
    auto solve_error = [](Index n) {
        fem::StructuredMesh2D mesh(n);
        DenseMatrix b_full = fem::pressure_stiffness(mesh);
        DenseMatrix c_full = fem::pressure_mass(mesh);
        Vector load = fem::scalar_load(mesh, [](double x, double y) {
            return std::cos(M_PI * x) * std::cos(M_PI * y);
        });
        // project out the tiny quadrature-induced mean
        Vector areas = fem::nodal_areas(mesh);
        double mean = 0.0;
        for (Index i = 0; i < load.size(); ++i) mean += load[i];
        for (Index i = 0; i < load.size(); ++i) load[i] -= mean * areas[i];

        const Index np = mesh.node_count() - 1;
        DenseMatrix b(np, np), c(np, np);
        Vector rhs(np);
        for (Index i = 1; i < mesh.node_count(); ++i) {
            for (Index j = 1; j < mesh.node_count(); ++j) {
                b(i - 1, j - 1) = b_full(i, j);
                c(i - 1, j - 1) = c_full(i, j);
            }
            rhs[i - 1] = load[i];
        }
        Vector p = solve_spd(b, rhs);
        // exact solution pinned to zero at the (0,0) corner
        const double shift = 1.0 / (2.0 * M_PI * M_PI);
        Vector err(np);
        for (Index i = 1; i < mesh.node_count(); ++i) {
            const auto xy = mesh.node_coords(i);
            const double exact =
                std::cos(M_PI * xy[0]) * std::cos(M_PI * xy[1]) / (2.0 * M_PI * M_PI) - shift;
            err[i - 1] = p[i - 1] - exact;
        }
        return weighted_norm(err, c);
    };
    const double e8 = solve_error(8), e16 = solve_error(16), e32 = solve_error(32);
    CHECK(std::log2(e8 / e16) == doctest::Approx(2.0).epsilon(0.25));
    CHECK(std::log2(e16 / e32) == doctest::Approx(2.0).epsilon(0.25));
}

TEST_CASE("unit square problem: structure and assumptions") {
    PoroSystem sys = unit_square_problem(1.0, 8);
    CHECK(sys.n_u() == 2 * 7 * 7);
    CHECK(sys.n_p() == 9 * 9 - 1);
    CHECK(sys.A().symmetric_to(1e-12));
    CHECK(sys.B().symmetric_to(1e-12));
    CHECK(sys.C().symmetric_to(1e-12));
    SpectralConstants sc = sys.spectral_constants();
    CHECK(sc.c_A > 0.0);
    CHECK(sc.c_B > 0.0);
    CHECK(sc.c_C > 0.0);
    CHECK(coupling_strength_dense(sys, 0.0) <= coupling_bound(sc) + 1e-10);
}

TEST_CASE("unit square coupling block carries spurious pressure modes") {
    // Equal-order P1/P1 cannot represent every discrete pressure through
    // divergence: the rank check reports the deficiency at every resolution.
    for (Index n : {8, 16}) {
        PoroSystem sys = unit_square_problem(1.0, n);
        RankReport r = coupling_rank_report(sys);
        CHECK_FALSE(r.full_row_rank);
        CHECK(r.sigma_max > 0.0);
    }
    // n = 4 has more pressure nodes than displacement dofs outright
    PoroSystem small = unit_square_problem(1.0, 4);
    CHECK(small.n_p() > small.n_u());
    CHECK_FALSE(coupling_rank_report(small).full_row_rank);
    CHECK_THROWS_AS(unit_square_problem(1.0, 3), std::invalid_argument);
}

TEST_CASE("unit square coupling strength measured against the parameter") {
    PoroSystem sys = unit_square_problem(1.0, 8);
    const double w = coupling_strength_dense(sys, 0.0);
    CHECK(w > 0.1);
    CHECK(w <= 1.0);  // conforming discretization stays below the continuum value
    // alpha = sqrt(omega) makes the measured coupling scale linearly
    PoroSystem sys4 = unit_square_problem(4.0, 8);
    CHECK(coupling_strength_dense(sys4, 0.0) == doctest::Approx(4.0 * w).epsilon(1e-9));
}

TEST_CASE("unit square static initialization is consistent") {
    PoroSystem sys = unit_square_problem(1.0, 8);
    State s = unit_square_initial(sys);
    CHECK(check_consistency(sys, s) <= 1e-10);
    // g(0) = 0 makes the static pressure vanish
    for (Index i = 0; i < s.p.size(); ++i) CHECK(std::abs(s.p[i]) <= 1e-14);
}

TEST_CASE("unit square family shares assembly and scales the coupling") {
    ProblemFamily family = unit_square_family(8);
    PoroSystem a = family.make(0.5);
    PoroSystem b = family.make(2.0);
    CHECK(b.D()(3, 7) == doctest::Approx(2.0 * a.D()(3, 7)).epsilon(1e-14));
    CHECK(a.A()(0, 0) == b.A()(0, 0));
    State init = family.initial(a);
    CHECK(check_consistency(a, init) <= 1e-10);
}

TEST_CASE("system directory round trip reproduces matrices bit-exactly") {
    const auto dir = std::filesystem::temp_directory_path() / "poro_roundtrip";
    std::filesystem::remove_all(dir);
    PoroSystem sys = model_problem(1.0);
    save_system(dir, sys, RhsSpec::constant(Vector{1.0, 1.0, 1.0}),
                RhsSpec::sin_scaled(Vector{1.0}));
    PoroSystem back = load_external_system(dir);
    for (Index i = 0; i < 3; ++i)
        for (Index j = 0; j < 3; ++j) CHECK(back.A()(i, j) == sys.A()(i, j));
    for (Index j = 0; j < 3; ++j) CHECK(back.D()(0, j) == sys.D()(0, j));
    CHECK(back.f(0.7)[1] == sys.f(0.7)[1]);
    CHECK(back.g(0.7)[0] == sys.g(0.7)[0]);
    std::filesystem::remove_all(dir);
}

TEST_CASE("missing matrix file is reported by name") {
    const auto dir = std::filesystem::temp_directory_path() / "poro_missing";
    std::filesystem::remove_all(dir);
    save_system(dir, model_problem(1.0), RhsSpec::constant(Vector{1.0, 1.0, 1.0}),
                RhsSpec::sin_scaled(Vector{1.0}));
    std::filesystem::remove(dir / "D.mtx");
    CHECK_THROWS_WITH_AS(load_external_system(dir), doctest::Contains("D.mtx"),
                         std::runtime_error);
    std::filesystem::remove_all(dir);
}

TEST_CASE("asymmetric ingested matrix is rejected with the culprit named") {
    const auto dir = std::filesystem::temp_directory_path() / "poro_badsym";
    std::filesystem::remove_all(dir);
    PoroSystem sys = model_problem(1.0);
    save_system(dir, sys, RhsSpec::constant(Vector{1.0, 1.0, 1.0}),
                RhsSpec::sin_scaled(Vector{1.0}));
    DenseMatrix a = sys.A();
    a(0, 1) += 1e-6;  // overwrite the stored stiffness with a perturbed copy
    mm::write_dense(dir / "A.mtx", a);
    CHECK_THROWS_WITH_AS(load_external_system(dir), doctest::Contains("A"), std::runtime_error);
    std::filesystem::remove_all(dir);
}

TEST_CASE("mesh export writes node and element tables") {
    const auto dir = std::filesystem::temp_directory_path() / "poro_mesh";
    std::filesystem::create_directories(dir);
    fem::StructuredMesh2D mesh(4);
    fem::export_mesh_csv(mesh, dir / "nodes.csv", dir / "elements.csv");
    CHECK(std::filesystem::file_size(dir / "nodes.csv") > 0);
    CHECK(std::filesystem::file_size(dir / "elements.csv") > 0);
    std::filesystem::remove_all(dir);
}

TEST_CASE("bubble rhs selector regenerates the unit-square load") {
    PoroSystem sys = unit_square_problem(1.0, 6);
    RhsSpec spec;
    spec.kind = RhsSpec::Kind::bubble;
    spec.bubble_n = 6;
    auto fn = make_rhs(spec, sys.n_u());
    Vector regenerated = fn(0.3);
    Vector original = sys.f(0.3);
    for (Index i = 0; i < sys.n_u(); ++i)
        CHECK(regenerated[i] == doctest::Approx(original[i]).epsilon(1e-15));
}
