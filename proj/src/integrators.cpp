#include "poro/integrators.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#include "poro/kernels.hpp"

namespace poro {

using kernels::matvec;
using kernels::matvec_transposed;

SystemFactors::SystemFactors(const PoroSystem& sys)
    : sys_(&sys), chol_a_(sys.A()), gram_(sys.n_p(), sys.n_p()) {
    const Index np = sys.n_p(), nu = sys.n_u();
    // G = D A^{-1} D^T, built column by column from solves against A.
#pragma omp parallel for schedule(dynamic) if (np > 8 && nu > 256)
    for (Index j = 0; j < np; ++j) {
        Vector col(nu);
        for (Index i = 0; i < nu; ++i) col[i] = sys.D()(j, i);
        chol_a_.solve_in_place(col.span());
        for (Index i = 0; i < np; ++i) {
            double s = 0.0;
            for (Index k = 0; k < nu; ++k) s += sys.D()(i, k) * col[k];
            gram_(i, j) = s;
        }
    }
    for (Index i = 0; i < np; ++i)
        for (Index j = i + 1; j < np; ++j) {
            const double avg = 0.5 * (gram_(i, j) + gram_(j, i));
            gram_(i, j) = gram_(j, i) = avg;
        }
}

StepWorkspace::StepWorkspace(std::shared_ptr<const SystemFactors> base, double tau)
    : base_(std::move(base)), tau_(tau), ctau_(assemble_Ctau(base_->system(), tau)),
      chol_ctau_(ctau_) {
    if (!(tau > 0.0)) throw std::invalid_argument("StepWorkspace: step size must be positive");
}

StepWorkspace::StepWorkspace(const PoroSystem& sys, double tau)
    : StepWorkspace(std::make_shared<SystemFactors>(sys), tau) {}

Vector StepWorkspace::solve_A(Vector rhs) const {
    base_->chol_A().solve_in_place(rhs.span());
    ++counts_.a_solves;
    return rhs;
}

Vector StepWorkspace::solve_Ctau(Vector rhs) const {
    chol_ctau_.solve_in_place(rhs.span());
    ++counts_.ctau_solves;
    return rhs;
}

Vector StepWorkspace::solve_schur(const CholeskyFactor& schur, Vector rhs) const {
    schur.solve_in_place(rhs.span());
    ++counts_.coupled_solves;
    return rhs;
}

namespace {
DenseMatrix shifted_pressure_block(const PoroSystem& sys, const DenseMatrix& gram, double b_weight) {
    DenseMatrix m = gram;
    const DenseMatrix& c = sys.C();
    const DenseMatrix& b = sys.B();
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) m(i, j) += c(i, j) + b_weight * b(i, j);
    return m;
}
}  // namespace

const CholeskyFactor& StepWorkspace::schur_bdf2() const {
    if (!schur_bdf2_)
        schur_bdf2_ = std::make_unique<CholeskyFactor>(
            shifted_pressure_block(system(), base_->gram(), (2.0 / 3.0) * tau_));
    return *schur_bdf2_;
}

const CholeskyFactor& StepWorkspace::schur_euler() const {
    if (!schur_euler_)
        schur_euler_ = std::make_unique<CholeskyFactor>(
            shifted_pressure_block(system(), base_->gram(), tau_));
    return *schur_euler_;
}

const CholeskyFactor& StepWorkspace::schur_midpoint() const {
    if (!schur_midpoint_)
        schur_midpoint_ = std::make_unique<CholeskyFactor>(
            shifted_pressure_block(system(), base_->gram(), 0.5 * tau_));
    return *schur_midpoint_;
}

const CholeskyFactor& StepWorkspace::fixed_stress_factor(double L) const {
    if (!fixed_stress_ || fixed_stress_l_ != L) {
        DenseMatrix m = ctau_;
        for (Index i = 0; i < m.rows(); ++i) m(i, i) += L;
        fixed_stress_ = std::make_unique<CholeskyFactor>(m);
        fixed_stress_l_ = L;
    }
    return *fixed_stress_;
}

/// (2 tau g(t_new) + D (4 u1 - u0) + C (4 p1 - p0)) / 3 — the pressure-row
/// right-hand side shared by every BDF-2 variant, already scaled by 1/3.
Vector StepWorkspace::flow_rhs_bdf2(const State& prev2, const State& prev1, double t_new) const {
    const PoroSystem& sys = system();
    Vector du(sys.n_u());
    for (Index i = 0; i < sys.n_u(); ++i) du[i] = 4.0 * prev1.u[i] - prev2.u[i];
    Vector dp(sys.n_p());
    for (Index i = 0; i < sys.n_p(); ++i) dp[i] = 4.0 * prev1.p[i] - prev2.p[i];
    Vector rhs = matvec(sys.D(), du);
    Vector cp = matvec(sys.C(), dp);
    Vector gt = sys.g(t_new);
    for (Index i = 0; i < sys.n_p(); ++i) rhs[i] = (rhs[i] + cp[i] + 2.0 * tau_ * gt[i]) / 3.0;
    return rhs;
}

State StepWorkspace::bdf2_implicit(const State& prev2, const State& prev1) const {
    const PoroSystem& sys = system();
    const double t_new = prev1.t + tau_;
    const Vector ft = sys.f(t_new);
    Vector rhs = flow_rhs_bdf2(prev2, prev1, t_new);
    // Schur reduction of the coupled block system: eliminate u = A^{-1}(f + D^T p).
    Vector y = solve_A(ft);
    Vector dy = matvec(sys.D(), y);
    for (Index i = 0; i < sys.n_p(); ++i) rhs[i] -= dy[i];
    State out;
    out.t = t_new;
    out.p = solve_schur(schur_bdf2(), std::move(rhs));
    Vector urhs = matvec_transposed(sys.D(), out.p);
    kernels::axpy(1.0, ft.span(), urhs.span());
    out.u = solve_A(std::move(urhs));
    return out;
}

namespace {
/// One decoupled sweep of the splitting: u against A with the given pressure,
/// then p against 3 C_tau with the fresh u. Both iterative schemes and the
/// semi-explicit step are this exact arithmetic.
struct SweepResult {
    Vector u, p;
};
}  // namespace

State StepWorkspace::bdf2_semi_explicit(const State& prev2, const State& prev1) const {
    const PoroSystem& sys = system();
    const double t_new = prev1.t + tau_;
    Vector p_extrap(sys.n_p());
    for (Index i = 0; i < sys.n_p(); ++i) p_extrap[i] = 2.0 * prev1.p[i] - prev2.p[i];
    Vector urhs = matvec_transposed(sys.D(), p_extrap);
    Vector ft = sys.f(t_new);
    kernels::axpy(1.0, ft.span(), urhs.span());
    State out;
    out.t = t_new;
    out.u = solve_A(std::move(urhs));
    Vector rhs = flow_rhs_bdf2(prev2, prev1, t_new);
    Vector du = matvec(sys.D(), out.u);
    kernels::axpy(-1.0, du.span(), rhs.span());
    out.p = solve_Ctau(std::move(rhs));
    return out;
}

State StepWorkspace::novel_iterative(const State& prev2, const State& prev1, Index K, double gamma,
                                     StepDiagnostics* diag) const {
    if (K < 1) throw std::invalid_argument("novel_iterative: K must be >= 1");
    if (!(gamma > 0.0) || gamma > 1.0)
        throw std::invalid_argument("novel_iterative: gamma must lie in (0, 1]");
    const PoroSystem& sys = system();
    const double t_new = prev1.t + tau_;
    const Vector ft = sys.f(t_new);
    const Vector flow_rhs = flow_rhs_bdf2(prev2, prev1, t_new);

    // Extrapolated initialization of the inner iteration.
    Vector p_k(sys.n_p());
    for (Index i = 0; i < sys.n_p(); ++i) p_k[i] = 2.0 * prev1.p[i] - prev2.p[i];

    State out;
    out.t = t_new;
    for (Index k = 0; k < K; ++k) {
        Vector urhs = matvec_transposed(sys.D(), p_k);
        kernels::axpy(1.0, ft.span(), urhs.span());
        Vector u_hat = solve_A(std::move(urhs));
        Vector prhs = flow_rhs;
        Vector du = matvec(sys.D(), u_hat);
        kernels::axpy(-1.0, du.span(), prhs.span());
        Vector p_hat = solve_Ctau(std::move(prhs));
        if (diag) {
            Vector incr = kernels::sub(p_hat, p_k);
            diag->inner_increments.push_back(weighted_norm(incr, ctau_));
        }
        if (k < K - 1) {
            // Pressure damping; the displacement iterate passes through.
            for (Index i = 0; i < sys.n_p(); ++i)
                p_k[i] = gamma * p_hat[i] + (1.0 - gamma) * p_k[i];
        } else {
            out.u = std::move(u_hat);
            out.p = std::move(p_hat);
        }
    }
    if (diag) {
        diag->inner_iterations = K;
        diag->residual = diag->inner_increments.back();
    }
    return out;
}

State StepWorkspace::naive_iterative(const State& prev2, const State& prev1, Index K) const {
    if (K < 1) throw std::invalid_argument("naive_iterative: K must be >= 1");
    const PoroSystem& sys = system();
    const double t_new = prev1.t + tau_;
    const Vector ft = sys.f(t_new);
    const Vector flow_rhs = flow_rhs_bdf2(prev2, prev1, t_new);
    // Initialization at the previous time step; no extrapolation, no damping.
    Vector p_k = prev1.p;
    State out;
    out.t = t_new;
    for (Index k = 0; k < K; ++k) {
        Vector urhs = matvec_transposed(sys.D(), p_k);
        kernels::axpy(1.0, ft.span(), urhs.span());
        Vector u_next = solve_A(std::move(urhs));
        Vector prhs = flow_rhs;
        Vector du = matvec(sys.D(), u_next);
        kernels::axpy(-1.0, du.span(), prhs.span());
        p_k = solve_Ctau(std::move(prhs));
        out.u = std::move(u_next);
    }
    out.p = std::move(p_k);
    return out;
}

State StepWorkspace::increment_form(const State& prev2, const State& prev1, Index K,
                                    double gamma) const {
    if (K < 1) throw std::invalid_argument("increment_form: K must be >= 1");
    if (!(gamma > 0.0) || gamma > 1.0)
        throw std::invalid_argument("increment_form: gamma must lie in (0, 1]");
    const PoroSystem& sys = system();
    const double t_new = prev1.t + tau_;
    const Index nu = sys.n_u(), np = sys.n_p();

    // Residual-style right-hand sides of the increment formulation.
    Vector ru = sys.f(t_new);
    {
        Vector au = matvec(sys.A(), prev1.u);
        Vector dtp = matvec_transposed(sys.D(), prev1.p);
        for (Index i = 0; i < nu; ++i) ru[i] += dtp[i] - au[i];
    }
    Vector rp(np);
    {
        Vector gt = sys.g(t_new);
        Vector bp = matvec(sys.B(), prev1.p);
        Vector du(nu), dp(np);
        for (Index i = 0; i < nu; ++i) du[i] = prev1.u[i] - prev2.u[i];
        for (Index i = 0; i < np; ++i) dp[i] = prev1.p[i] - prev2.p[i];
        Vector ddu = matvec(sys.D(), du);
        Vector cdp = matvec(sys.C(), dp);
        for (Index i = 0; i < np; ++i)
            rp[i] = (2.0 * tau_ * (gt[i] - bp[i]) + ddu[i] + cdp[i]) / 3.0;
    }

    Vector dp_k(np);
    for (Index i = 0; i < np; ++i) dp_k[i] = prev1.p[i] - prev2.p[i];
    Vector du_hat, dp_hat;
    for (Index k = 0; k < K; ++k) {
        Vector urhs = matvec_transposed(sys.D(), dp_k);
        kernels::axpy(1.0, ru.span(), urhs.span());
        du_hat = solve_A(std::move(urhs));
        Vector prhs = rp;
        Vector ddu = matvec(sys.D(), du_hat);
        kernels::axpy(-1.0, ddu.span(), prhs.span());
        dp_hat = solve_Ctau(std::move(prhs));
        if (k < K - 1)
            for (Index i = 0; i < np; ++i) dp_k[i] = gamma * dp_hat[i] + (1.0 - gamma) * dp_k[i];
    }
    State out;
    out.t = t_new;
    out.u = Vector(nu);
    out.p = Vector(np);
    for (Index i = 0; i < nu; ++i) out.u[i] = prev1.u[i] + du_hat[i];
    for (Index i = 0; i < np; ++i) out.p[i] = prev1.p[i] + dp_hat[i];
    return out;
}

State StepWorkspace::fixed_stress(const State& prev2, const State& prev1, double L, double tol,
                                  Index k_max, StepDiagnostics* diag) const {
    if (L < 0.0) throw std::invalid_argument("fixed_stress: L must be nonnegative");
    if (!(tol > 0.0)) throw std::invalid_argument("fixed_stress: tolerance must be positive");
    const PoroSystem& sys = system();
    const double t_new = prev1.t + tau_;
    const Vector ft = sys.f(t_new);
    const Vector flow_rhs = flow_rhs_bdf2(prev2, prev1, t_new);
    const CholeskyFactor& factor = fixed_stress_factor(L);

    // Initial guess: the previous time step. Sequential sweep: u against the
    // lagged pressure, then the L-stabilized pressure solve.
    Vector u_k = prev1.u;
    Vector p_k = prev1.p;
    double residual = 0.0;
    for (Index it = 1; it <= k_max; ++it) {
        Vector urhs = matvec_transposed(sys.D(), p_k);
        kernels::axpy(1.0, ft.span(), urhs.span());
        Vector u_next = solve_A(std::move(urhs));
        Vector p_next = flow_rhs;
        Vector du = matvec(sys.D(), u_next);
        for (Index i = 0; i < sys.n_p(); ++i) p_next[i] += L * p_k[i] - du[i];
        factor.solve_in_place(p_next.span());
        ++counts_.ctau_solves;
        Vector du_incr = kernels::sub(u_next, u_k);
        Vector dp_incr = kernels::sub(p_next, p_k);
        const double ru = weighted_norm(du_incr, sys.A());
        const double rp = weighted_norm(dp_incr, sys.C());
        residual = std::sqrt(ru * ru + rp * rp);
        if (diag) diag->inner_increments.push_back(residual);
        u_k = std::move(u_next);
        p_k = std::move(p_next);
        if (residual <= tol) {
            if (diag) {
                diag->inner_iterations = it;
                diag->residual = residual;
            }
            State out;
            out.t = t_new;
            out.u = std::move(u_k);
            out.p = std::move(p_k);
            return out;
        }
    }
    throw SolveFailure("fixed_stress: no convergence within k_max = " + std::to_string(k_max) +
                           " iterations (last increment " + std::to_string(residual) + ")",
                       k_max, residual);
}

State StepWorkspace::implicit_euler(const State& prev) const {
    const PoroSystem& sys = system();
    const double t_new = prev.t + tau_;
    const Vector ft = sys.f(t_new);
    Vector y = solve_A(ft);
    Vector rhs = sys.g(t_new);
    kernels::scale(tau_, rhs.span());
    {
        Vector du = matvec(sys.D(), prev.u);
        Vector cp = matvec(sys.C(), prev.p);
        Vector dy = matvec(sys.D(), y);
        for (Index i = 0; i < sys.n_p(); ++i) rhs[i] += du[i] + cp[i] - dy[i];
    }
    State out;
    out.t = t_new;
    out.p = solve_schur(schur_euler(), std::move(rhs));
    Vector urhs = matvec_transposed(sys.D(), out.p);
    kernels::axpy(1.0, ft.span(), urhs.span());
    out.u = solve_A(std::move(urhs));
    return out;
}

State StepWorkspace::midpoint(const State& prev) const {
    const PoroSystem& sys = system();
    const double t_new = prev.t + tau_;
    const Vector ft = sys.f(t_new);
    Vector y = solve_A(ft);
    // Flow equation trapezoidal with midpoint load; constraint at the new node.
    Vector rhs = sys.g(prev.t + 0.5 * tau_);
    kernels::scale(tau_, rhs.span());
    {
        Vector du = matvec(sys.D(), prev.u);
        Vector cp = matvec(sys.C(), prev.p);
        Vector bp = matvec(sys.B(), prev.p);
        Vector dy = matvec(sys.D(), y);
        for (Index i = 0; i < sys.n_p(); ++i)
            rhs[i] += du[i] + cp[i] - 0.5 * tau_ * bp[i] - dy[i];
    }
    State out;
    out.t = t_new;
    out.p = solve_schur(schur_midpoint(), std::move(rhs));
    Vector urhs = matvec_transposed(sys.D(), out.p);
    kernels::axpy(1.0, ft.span(), urhs.span());
    out.u = solve_A(std::move(urhs));
    return out;
}

State StepWorkspace::step(const SchemeConfig& cfg, const State& prev2, const State& prev1,
                          StepDiagnostics* diag) const {
    switch (cfg.scheme) {
        case Scheme::implicit_bdf2:
            return bdf2_implicit(prev2, prev1);
        case Scheme::semi_explicit_bdf2:
            return bdf2_semi_explicit(prev2, prev1);
        case Scheme::fixed_stress_bdf2: {
            const double L = cfg.L >= 0.0 ? cfg.L : default_fixed_stress_L(system());
            return fixed_stress(prev2, prev1, L, cfg.tol, cfg.k_max, diag);
        }
        case Scheme::naive_iterative:
            return naive_iterative(prev2, prev1, cfg.K);
        case Scheme::novel_iterative:
            return novel_iterative(prev2, prev1, cfg.K, cfg.gamma, diag);
    }
    throw std::logic_error("step: unknown scheme");
}

State implicit_euler_step(const PoroSystem& sys, double tau, const State& s) {
    if (check_consistency(sys, s) > kConsistencyTol)
        throw std::invalid_argument("implicit_euler_step: initial state inconsistent");
    return StepWorkspace(sys, tau).implicit_euler(s);
}

State bdf2_implicit_step(const PoroSystem& sys, double tau, const State& prev2, const State& prev1) {
    return StepWorkspace(sys, tau).bdf2_implicit(prev2, prev1);
}

State bdf2_semi_explicit_step(const PoroSystem& sys, double tau, const State& prev2,
                              const State& prev1) {
    return StepWorkspace(sys, tau).bdf2_semi_explicit(prev2, prev1);
}

std::pair<State, Index> fixed_stress_bdf2_step(const PoroSystem& sys, double tau, const State& prev2,
                                               const State& prev1, double L, double tol,
                                               Index k_max) {
    StepDiagnostics diag;
    State s = StepWorkspace(sys, tau).fixed_stress(prev2, prev1, L, tol, k_max, &diag);
    return {std::move(s), diag.inner_iterations};
}

State naive_iterative_step(const PoroSystem& sys, double tau, const State& prev2, const State& prev1,
                           Index K) {
    return StepWorkspace(sys, tau).naive_iterative(prev2, prev1, K);
}

State novel_scheme_step(const PoroSystem& sys, double tau, const State& prev2, const State& prev1,
                        Index K, double gamma, StepDiagnostics* diag) {
    return StepWorkspace(sys, tau).novel_iterative(prev2, prev1, K, gamma, diag);
}

State increment_scheme_step(const PoroSystem& sys, double tau, const State& prev2,
                            const State& prev1, Index K, double gamma) {
    return StepWorkspace(sys, tau).increment_form(prev2, prev1, K, gamma);
}

State midpoint_reference_step(const PoroSystem& sys, double tau, const State& prev1) {
    return StepWorkspace(sys, tau).midpoint(prev1);
}

double default_fixed_stress_L(const PoroSystem& sys) {
    const SpectralConstants sc = sys.spectral_constants();
    return sc.C_D * sc.C_D / (2.0 * sc.c_A);
}

double state_energy_norm(const PoroSystem& sys, const State& s) {
    return weighted_norm(s.u, sys.A()) + weighted_norm(s.p, sys.C());
}

namespace {

State initial_second_state(const PoroSystem& sys, const TimeGrid& grid, const SchemeConfig& cfg,
                           const State& initial, const StepWorkspace& main_ws) {
    if (cfg.init.kind == InitSpec::Kind::exact) {
        const State& s1 = *cfg.init.first_state;
        if (s1.u.size() != sys.n_u() || s1.p.size() != sys.n_p())
            throw std::invalid_argument("integrate: provided first state has wrong dimensions");
        return s1;
    }
    const Index m = cfg.init.substeps;
    State s = initial;
    if (m == 1) {
        s = main_ws.implicit_euler(s);
    } else {
        StepWorkspace euler_ws(main_ws.base(), grid.tau / static_cast<double>(m));
        for (Index i = 0; i < m; ++i) s = euler_ws.implicit_euler(s);
    }
    s.t = initial.t + grid.tau;  // avoid substep roundoff drift in the node time
    return s;
}

}  // namespace

Trajectory integrate(const PoroSystem& sys, const TimeGrid& grid, const SchemeConfig& cfg,
                     const State& initial, const StepWorkspace* shared_workspace,
                     SolveCounts* counts) {
    cfg.validate();
    if (check_consistency(sys, initial) > kConsistencyTol)
        throw std::invalid_argument("integrate: initial state violates the algebraic constraint");

    const StepWorkspace* ws = shared_workspace;
    std::unique_ptr<StepWorkspace> owned;
    if (ws == nullptr || ws->tau() != grid.tau) {
        owned = std::make_unique<StepWorkspace>(sys, grid.tau);
        ws = owned.get();
    }

    Trajectory traj;
    traj.grid = grid;
    traj.states.reserve(static_cast<size_t>(grid.steps + 1));
    traj.states.push_back(initial);
    traj.states.push_back(initial_second_state(sys, grid, cfg, initial, *ws));

    const double base_norm = state_energy_norm(sys, initial);
    const double threshold = kDivergenceFactor * (1.0 + base_norm);

    ws->reset_counts();
    for (Index n = 2; n <= grid.steps; ++n) {
        StepDiagnostics diag;
        State next = ws->step(cfg, traj.states[static_cast<size_t>(n) - 2],
                              traj.states[static_cast<size_t>(n) - 1], &diag);
        traj.diagnostics.push_back(std::move(diag));
        const double norm = state_energy_norm(sys, next);
        traj.states.push_back(std::move(next));
        if (!(norm <= threshold) || !std::isfinite(norm)) {
            traj.diverged = true;
            traj.divergence_step = n;
            break;
        }
    }
    if (counts) *counts = ws->counts();
    return traj;
}

Trajectory integrate_midpoint(const PoroSystem& sys, const TimeGrid& grid, const State& initial,
                              const StepWorkspace* shared_workspace) {
    if (check_consistency(sys, initial) > kConsistencyTol)
        throw std::invalid_argument("integrate_midpoint: initial state inconsistent");
    const StepWorkspace* ws = shared_workspace;
    std::unique_ptr<StepWorkspace> owned;
    if (ws == nullptr || ws->tau() != grid.tau) {
        owned = std::make_unique<StepWorkspace>(sys, grid.tau);
        ws = owned.get();
    }
    Trajectory traj;
    traj.grid = grid;
    traj.states.reserve(static_cast<size_t>(grid.steps + 1));
    traj.states.push_back(initial);
    const double threshold = kDivergenceFactor * (1.0 + state_energy_norm(sys, initial));
    for (Index n = 1; n <= grid.steps; ++n) {
        State next = ws->midpoint(traj.states.back());
        const double norm = state_energy_norm(sys, next);
        traj.states.push_back(std::move(next));
        if (!(norm <= threshold) || !std::isfinite(norm)) {
            traj.diverged = true;
            traj.divergence_step = n;
            break;
        }
    }
    return traj;
}

void write_trajectory_csv(std::ostream& os, const PoroSystem& sys, const Trajectory& traj) {
    os << "t,u_norm_A,p_norm_C,inner_iterations,residual\n";
    char buf[64];
    for (size_t n = 0; n < traj.states.size(); ++n) {
        const State& s = traj.states[n];
        Index inner = 0;
        double residual = 0.0;
        if (n >= 2 && n - 2 < traj.diagnostics.size()) {
            inner = traj.diagnostics[n - 2].inner_iterations;
            residual = traj.diagnostics[n - 2].residual;
        }
        std::snprintf(buf, sizeof(buf), "%.17g", s.t);
        os << buf << ",";
        std::snprintf(buf, sizeof(buf), "%.17g", weighted_norm(s.u, sys.A()));
        os << buf << ",";
        std::snprintf(buf, sizeof(buf), "%.17g", weighted_norm(s.p, sys.C()));
        os << buf << "," << inner << ",";
        std::snprintf(buf, sizeof(buf), "%.17g", residual);
        os << buf << "\n";
    }
}

namespace {
constexpr char kTrajMagic[8] = {'P', 'O', 'R', 'O', 'T', 'R', 'A', 'J'};

void put_u64(std::ostream& os, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b, 8);
}
void put_f64(std::ostream& os, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(os, bits);
}
std::uint64_t get_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    if (!is) throw std::runtime_error("trajectory read: truncated file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}
double get_f64(std::istream& is) {
    const std::uint64_t bits = get_u64(is);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}
}  // namespace

void write_trajectory_binary(std::ostream& os, const Trajectory& traj) {
    os.write(kTrajMagic, 8);
    put_u64(os, 1);  // version
    const Index nu = traj.states.empty() ? 0 : traj.states.front().u.size();
    const Index np = traj.states.empty() ? 0 : traj.states.front().p.size();
    put_u64(os, static_cast<std::uint64_t>(nu));
    put_u64(os, static_cast<std::uint64_t>(np));
    put_u64(os, traj.states.size());
    put_f64(os, traj.grid.tau);
    for (const State& s : traj.states) {
        put_f64(os, s.t);
        for (Index i = 0; i < nu; ++i) put_f64(os, s.u[i]);
        for (Index i = 0; i < np; ++i) put_f64(os, s.p[i]);
    }
    put_u64(os, traj.diverged ? 1 : 0);
}

Trajectory read_trajectory_binary(std::istream& is) {
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kTrajMagic, 8) != 0)
        throw std::runtime_error("trajectory read: bad magic");
    if (get_u64(is) != 1) throw std::runtime_error("trajectory read: unsupported version");
    const Index nu = static_cast<Index>(get_u64(is));
    const Index np = static_cast<Index>(get_u64(is));
    const std::uint64_t count = get_u64(is);
    const double tau = get_f64(is);
    Trajectory traj;
    if (count >= 3) traj.grid = TimeGrid(tau, static_cast<Index>(count) - 1);
    traj.states.reserve(count);
    for (std::uint64_t n = 0; n < count; ++n) {
        State s;
        s.t = get_f64(is);
        s.u = Vector(nu);
        for (Index i = 0; i < nu; ++i) s.u[i] = get_f64(is);
        s.p = Vector(np);
        for (Index i = 0; i < np; ++i) s.p[i] = get_f64(is);
        traj.states.push_back(std::move(s));
    }
    traj.diverged = get_u64(is) != 0;
    return traj;
}

}  // namespace poro
