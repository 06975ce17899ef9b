#pragma once

#include <iosfwd>
#include <memory>

#include "poro/solve.hpp"
#include "poro/system.hpp"

namespace poro {

struct StepDiagnostics {
    Index inner_iterations = 0;
    double residual = 0.0;  // last inner increment norm; 0 for direct schemes
    std::vector<double> inner_increments;  // ||p_hat_{k+1} - p_k||_{C_tau} per sweep
};

struct Trajectory {
    TimeGrid grid;
    std::vector<State> states;                // one per node while stable
    std::vector<StepDiagnostics> diagnostics; // one per computed step (from node 2 on)
    bool diverged = false;
    Index divergence_step = -1;
};

struct SolveCounts {
    Index a_solves = 0;        // triangular solves against A
    Index ctau_solves = 0;     // solves against C_tau (or its fixed-stress shift)
    Index coupled_solves = 0;  // Schur-complement solves of the coupled system
    Index spd_solves() const { return a_solves + ctau_solves; }
};

/// tau-independent factorizations shared across step sizes: the Cholesky
/// factor of A and the coupling block G = D A^{-1} D^T.
class SystemFactors {
public:
    explicit SystemFactors(const PoroSystem& sys);
    const PoroSystem& system() const { return *sys_; }
    const CholeskyFactor& chol_A() const { return chol_a_; }
    const DenseMatrix& gram() const { return gram_; }

private:
    const PoroSystem* sys_;
    CholeskyFactor chol_a_;
    DenseMatrix gram_;
};

/// Per-(system, tau) solver state. A and C_tau are factorized once and every
/// step of every scheme reuses them; this is the whole performance case for
/// the decoupled schemes. Confine one workspace to one worker thread.
class StepWorkspace {
public:
    StepWorkspace(std::shared_ptr<const SystemFactors> base, double tau);
    StepWorkspace(const PoroSystem& sys, double tau);

    const PoroSystem& system() const { return base_->system(); }
    std::shared_ptr<const SystemFactors> base() const { return base_; }
    double tau() const { return tau_; }
    const DenseMatrix& Ctau() const { return ctau_; }

    State bdf2_implicit(const State& prev2, const State& prev1) const;
    State bdf2_semi_explicit(const State& prev2, const State& prev1) const;
    State fixed_stress(const State& prev2, const State& prev1, double L, double tol, Index k_max,
                       StepDiagnostics* diag = nullptr) const;
    State naive_iterative(const State& prev2, const State& prev1, Index K) const;
    State novel_iterative(const State& prev2, const State& prev1, Index K, double gamma,
                          StepDiagnostics* diag = nullptr) const;
    State increment_form(const State& prev2, const State& prev1, Index K, double gamma) const;
    State implicit_euler(const State& prev) const;
    State midpoint(const State& prev) const;

    State step(const SchemeConfig& cfg, const State& prev2, const State& prev1,
               StepDiagnostics* diag = nullptr) const;

    const SolveCounts& counts() const { return counts_; }
    void reset_counts() const { counts_ = {}; }

private:
    Vector solve_A(Vector rhs) const;
    Vector solve_Ctau(Vector rhs) const;
    Vector solve_schur(const CholeskyFactor& schur, Vector rhs) const;
    const CholeskyFactor& schur_bdf2() const;
    const CholeskyFactor& schur_euler() const;
    const CholeskyFactor& schur_midpoint() const;
    const CholeskyFactor& fixed_stress_factor(double L) const;
    Vector flow_rhs_bdf2(const State& prev2, const State& prev1, double t_new) const;

    std::shared_ptr<const SystemFactors> base_;
    double tau_;
    DenseMatrix ctau_;
    CholeskyFactor chol_ctau_;
    mutable std::unique_ptr<CholeskyFactor> schur_bdf2_, schur_euler_, schur_midpoint_;
    mutable std::unique_ptr<CholeskyFactor> fixed_stress_;
    mutable double fixed_stress_l_ = -1.0;
    mutable SolveCounts counts_;
};

// One-shot step operations (each builds a transient workspace).
State implicit_euler_step(const PoroSystem& sys, double tau, const State& s);
State bdf2_implicit_step(const PoroSystem& sys, double tau, const State& prev2, const State& prev1);
State bdf2_semi_explicit_step(const PoroSystem& sys, double tau, const State& prev2,
                              const State& prev1);
std::pair<State, Index> fixed_stress_bdf2_step(const PoroSystem& sys, double tau, const State& prev2,
                                               const State& prev1, double L, double tol,
                                               Index k_max);
State naive_iterative_step(const PoroSystem& sys, double tau, const State& prev2, const State& prev1,
                           Index K);
State novel_scheme_step(const PoroSystem& sys, double tau, const State& prev2, const State& prev1,
                        Index K, double gamma, StepDiagnostics* diag = nullptr);
State increment_scheme_step(const PoroSystem& sys, double tau, const State& prev2,
                            const State& prev1, Index K, double gamma);
State midpoint_reference_step(const PoroSystem& sys, double tau, const State& prev1);

/// Default fixed-stress stabilization C_D^2 / (2 c_A).
double default_fixed_stress_L(const PoroSystem& sys);

/// ||u||_A + ||p||_C, the quantity the divergence guard watches.
double state_energy_norm(const PoroSystem& sys, const State& s);

inline constexpr double kDivergenceFactor = 1e6;
inline constexpr double kConsistencyTol = 1e-8;

/// Drive a two-step scheme over the grid. The first state comes from the
/// configured initialization (implicit Euler sub-steps by default). Aborts
/// early with the diverged flag once ||u||_A + ||p||_C exceeds
/// 1e6 * (1 + initial value).
Trajectory integrate(const PoroSystem& sys, const TimeGrid& grid, const SchemeConfig& cfg,
                     const State& initial, const StepWorkspace* shared_workspace = nullptr,
                     SolveCounts* counts = nullptr);

/// Midpoint (trapezoidal flow, constraint collocated at the new node)
/// reference integrator; one-step, second order.
Trajectory integrate_midpoint(const PoroSystem& sys, const TimeGrid& grid, const State& initial,
                              const StepWorkspace* shared_workspace = nullptr);

/// CSV export: t, ||u||_A, ||p||_C, inner_iterations, residual.
void write_trajectory_csv(std::ostream& os, const PoroSystem& sys, const Trajectory& traj);

// Fixed-width little-endian trajectory dump for reference caching:
//   "POROTRAJ" (8 bytes), version u64, n_u u64, n_p u64, node count u64,
//   tau f64, then per node t f64, u f64[n_u], p f64[n_p], then diverged u64.
void write_trajectory_binary(std::ostream& os, const Trajectory& traj);
Trajectory read_trajectory_binary(std::istream& is);

}  // namespace poro
