#pragma once

#include <functional>
#include <optional>
#include <string>

#include "poro/types.hpp"

namespace poro {

/// Extremal spectral data of the system matrices: smallest eigenvalues c_X,
/// spectral norms C_X, and the coupling block norm C_D = ||D||_2.
struct SpectralConstants {
    double c_A = 0.0, c_B = 0.0, c_C = 0.0;
    double C_A = 0.0, C_B = 0.0, C_C = 0.0;
    double C_D = 0.0;
};

enum class Validation { strict, relaxed };

/// Semi-discrete linear poroelasticity in two-field form:
///
///     A u - D^T p = f(t)
///     D u' + C p' + B p = g(t)
///
/// A (n_u x n_u), B, C (n_p x n_p) symmetric positive definite, D (n_p x n_u).
/// Construction verifies symmetry and definiteness; strict validation also
/// requires D to have full row rank. Relaxed validation admits degenerate
/// coupling blocks (D = 0 decoupled systems used throughout the tests).
/// Immutable after construction; right-hand sides must be pure in t.
class PoroSystem {
public:
    using RhsFn = std::function<Vector(double)>;

    PoroSystem(DenseMatrix A, DenseMatrix B, DenseMatrix C, DenseMatrix D, RhsFn f, RhsFn g,
               Validation validation = Validation::strict);

    Index n_u() const { return A_.rows(); }
    Index n_p() const { return B_.rows(); }

    const DenseMatrix& A() const { return A_; }
    const DenseMatrix& B() const { return B_; }
    const DenseMatrix& C() const { return C_; }
    const DenseMatrix& D() const { return D_; }
    Vector f(double t) const;
    Vector g(double t) const;

    /// Eigenvalue extremes; dense symmetric eigensolve below `dense_threshold`.
    SpectralConstants spectral_constants(Index dense_threshold = 2000) const;

private:
    void validate(Validation validation);

    DenseMatrix A_, B_, C_, D_;
    RhsFn f_, g_;
};

struct TimeGrid {
    double tau = 0.0;
    Index steps = 0;  // N; nodes are t_n = n*tau for 0 <= n <= N

    TimeGrid() = default;
    TimeGrid(double tau_, Index steps_) : tau(tau_), steps(steps_) {
        if (!(tau > 0.0)) throw std::invalid_argument("TimeGrid: step size must be positive");
        if (steps < 2) throw std::invalid_argument("TimeGrid: two-step schemes need at least 2 steps");
    }
    static TimeGrid from_horizon(double horizon, Index steps_) {
        return TimeGrid(horizon / static_cast<double>(steps_), steps_);
    }
    double horizon() const { return tau * static_cast<double>(steps); }
    double node(Index n) const { return tau * static_cast<double>(n); }
};

struct State {
    double t = 0.0;
    Vector u;
    Vector p;
};

enum class Scheme {
    implicit_bdf2,
    semi_explicit_bdf2,
    fixed_stress_bdf2,
    naive_iterative,
    novel_iterative,
};

std::string scheme_name(Scheme s);
Scheme parse_scheme(const std::string& name);

struct InitSpec {
    enum class Kind { implicit_euler, exact };
    Kind kind = Kind::implicit_euler;
    Index substeps = 1;                  // implicit Euler sub-steps for the first node
    std::optional<State> first_state;    // provided state at t = tau for Kind::exact
};

struct SchemeConfig {
    Scheme scheme = Scheme::novel_iterative;
    Index K = 1;          // inner iterations (iterative schemes)
    double gamma = 1.0;   // relaxation factor in (0, 1]
    double L = -1.0;      // fixed-stress stabilization; < 0 selects C_D^2 / (2 c_A)
    double tol = 1e-8;    // fixed-stress stopping tolerance
    Index k_max = 500;    // fixed-stress iteration cap
    InitSpec init;

    void validate() const;
};

/// C_tau = C + (2/3) tau B, the pressure-block matrix of all BDF-2 solves.
DenseMatrix assemble_Ctau(const PoroSystem& sys, double tau);

/// Coupling strength: largest eigenvalue of the pencil (D A^{-1} D^T, C_tau).
/// tau = 0 measures against C alone (the largest, hence safest, value).
double coupling_strength(const PoroSystem& sys, double tau, double tol = 1e-10);

/// Same quantity through a dense symmetric congruence eigensolve; exact at
/// desk scale and the cross-check oracle for the power-iteration route.
double coupling_strength_dense(const PoroSystem& sys, double tau);

/// Upper bound C_D^2 / (c_A c_C) on the coupling strength.
double coupling_bound(const PoroSystem& sys);
double coupling_bound(const SpectralConstants& sc);

/// Optimal pressure relaxation factor 2 / (2 + omega).
double relaxation_gamma(double omega);

/// Smallest K >= 1 with 3 omega^K < (2 + omega)^{K-1}; equals 1 for omega < 1/3.
Index min_inner_iterations(double omega);

/// Largest omega for which K inner iterations satisfy the bound above.
double max_stable_coupling(Index K);

/// Rank diagnostic of the coupling block against the threshold
/// sigma_min > 1e-10 * ||D||_2 used by strict validation.
struct RankReport {
    double sigma_min = 0.0;
    double sigma_max = 0.0;
    bool full_row_rank = false;
};
RankReport coupling_rank_report(const PoroSystem& sys);

/// Relative residual of the algebraic constraint A u = f(t) + D^T p.
double check_consistency(const PoroSystem& sys, const State& s);

/// Static (equilibrium) solve: B p = g(t), then A u = f(t) + D^T p.
State solve_static(const PoroSystem& sys, double t);

}  // namespace poro
