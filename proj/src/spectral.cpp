#include "poro/spectral.hpp"

#include <cmath>
#include <complex>

#include "poro/integrators.hpp"
#include "poro/kernels.hpp"
#include "poro/solve.hpp"

namespace poro {

IterationMatrices build_iteration_matrices(const PoroSystem& sys, double tau, double gamma, Index K) {
    if (!(gamma > 0.0) || !(gamma < 1.0))
        throw std::invalid_argument("build_iteration_matrices: gamma must lie in (0, 1)");
    if (K < 1) throw std::invalid_argument("build_iteration_matrices: K must be >= 1");
    const Index np = sys.n_p();
    if (np > kMaxDenseIterationMatrices)
        throw std::invalid_argument("build_iteration_matrices: n_p too large for dense assembly");

    IterationMatrices m;
    m.gamma = gamma;
    m.K = K;
    m.Ctau = assemble_Ctau(sys, tau);

    // T = -C_tau^{-1} D A^{-1} D^T, column by column.
    CholeskyFactor chol_a(sys.A());
    CholeskyFactor chol_ct(m.Ctau);
    DenseMatrix gram(np, np);
    for (Index j = 0; j < np; ++j) {
        Vector col(sys.n_u());
        for (Index i = 0; i < sys.n_u(); ++i) col[i] = sys.D()(j, i);
        chol_a.solve_in_place(col.span());
        for (Index i = 0; i < np; ++i) {
            double s = 0.0;
            for (Index k = 0; k < sys.n_u(); ++k) s += sys.D()(i, k) * col[k];
            gram(i, j) = s;
        }
    }
    m.T = DenseMatrix(np, np);
    for (Index j = 0; j < np; ++j) {
        Vector col(np);
        for (Index i = 0; i < np; ++i) col[i] = gram(i, j);
        chol_ct.solve_in_place(col.span());
        for (Index i = 0; i < np; ++i) m.T(i, j) = -col[i];
    }

    m.S = DenseMatrix(np, np);
    for (Index i = 0; i < np; ++i)
        for (Index j = 0; j < np; ++j) m.S(i, j) = gamma * m.T(i, j) + (i == j ? 1.0 - gamma : 0.0);

    // S_tilde = S^{K-1} + gamma * sum_{k=0}^{K-2} S^k.
    DenseMatrix s_power = DenseMatrix::identity(np);  // S^0
    DenseMatrix sum(np, np);                          // sum of S^k, k = 0..K-2
    for (Index k = 0; k + 1 < K; ++k) {
        for (Index i = 0; i < np; ++i)
            for (Index j = 0; j < np; ++j) sum(i, j) += s_power(i, j);
        s_power = kernels::matmul(s_power, m.S);
    }
    m.S_tilde = s_power;  // S^{K-1}
    for (Index i = 0; i < np; ++i)
        for (Index j = 0; j < np; ++j) m.S_tilde(i, j) += gamma * sum(i, j);

    // Block recursion matrix, with T S^{K-1} in the first block row.
    DenseMatrix ts = kernels::matmul(m.T, s_power);
    m.recursion = DenseMatrix(3 * np, 3 * np);
    for (Index i = 0; i < np; ++i) {
        for (Index j = 0; j < np; ++j) {
            m.recursion(i, j) = 2.0 * ts(i, j) + (i == j ? 1.0 / 3.0 : 0.0);
            m.recursion(i, np + j) = -(5.0 / 3.0) * ts(i, j);
            m.recursion(i, 2 * np + j) = (1.0 / 3.0) * ts(i, j);
        }
        m.recursion(np + i, i) = 1.0;
        m.recursion(2 * np + i, np + i) = 1.0;
    }
    return m;
}

NormBoundReport verify_norm_bounds(const PoroSystem& sys, const IterationMatrices& m, double omega,
                                   double gamma) {
    const Index np = m.Ctau.rows();
    const SymSqrt w = sym_sqrt(m.Ctau);

    // C_tau^{-1} C assembled like T above.
    CholeskyFactor chol_ct(m.Ctau);
    DenseMatrix cinvc(np, np);
    for (Index j = 0; j < np; ++j) {
        Vector col(np);
        for (Index i = 0; i < np; ++i) col[i] = sys.C()(i, j);
        chol_ct.solve_in_place(col.span());
        for (Index i = 0; i < np; ++i) cinvc(i, j) = col[i];
    }

    constexpr double kSlack = 1e-10;
    NormBoundReport r;
    r.norm_CinvC = weighted_operator_norm(cinvc, w);
    r.norm_T = weighted_operator_norm(m.T, w);
    r.norm_S = weighted_operator_norm(m.S, w);
    r.norm_S_tilde = weighted_operator_norm(m.S_tilde, w);
    r.CinvC_ok = r.norm_CinvC <= 1.0 + kSlack;
    r.T_ok = r.norm_T <= omega + kSlack;
    r.S_ok = r.norm_S <= (1.0 - gamma) + kSlack;
    r.S_tilde_ok = r.norm_S_tilde <= 1.0 + kSlack;
    return r;
}

namespace {

/// |lambda +- sqrt(lambda^2 - lambda)| with the complex pair handled exactly:
/// for lambda in (0, 1) the pair has modulus sqrt(lambda).
double companion_eigenvalue_modulus(double lambda) {
    const double disc = lambda * lambda - lambda;
    if (disc < 0.0) return std::sqrt(lambda);
    const double root = std::sqrt(disc);
    return std::max(std::abs(lambda + root), std::abs(lambda - root));
}

}  // namespace

RecursionNormResult recursion_norm(const IterationMatrices& m) {
    const Index np = m.Ctau.rows();
    const SymSqrt w = sym_sqrt(m.Ctau);

    // Similarity by diag(C_tau^{1/2}) blocks; the growth factor is the
    // spectral radius of the transformed block matrix.
    DenseMatrix transformed(3 * np, 3 * np);
    {
        DenseMatrix w3(3 * np, 3 * np), w3i(3 * np, 3 * np);
        for (Index b = 0; b < 3; ++b)
            for (Index i = 0; i < np; ++i)
                for (Index j = 0; j < np; ++j) {
                    w3(b * np + i, b * np + j) = w.sqrt(i, j);
                    w3i(b * np + i, b * np + j) = w.inv_sqrt(i, j);
                }
        transformed = kernels::matmul(w3, kernels::matmul(m.recursion, w3i));
    }
    const SpectrumInfo direct = general_spectrum(transformed);

    RecursionNormResult out;
    out.value = direct.spectral_radius;
    out.eigenvector_condition = direct.eigenvector_condition;

    // Closed-form route: eigenvalues of T S^{K-1} through the scalar map.
    // The C_tau^{1/2} similarity of T S^{K-1} is symmetric, so its
    // eigenvalues are those of the symmetrized congruence.
    DenseMatrix ts(np, np);
    for (Index i = 0; i < np; ++i)
        for (Index j = 0; j < np; ++j) ts(i, j) = m.recursion(i, 2 * np + j) * 3.0;
    DenseMatrix ts_sym = kernels::matmul(w.sqrt, kernels::matmul(ts, w.inv_sqrt));
    for (Index i = 0; i < np; ++i)
        for (Index j = i + 1; j < np; ++j) {
            const double avg = 0.5 * (ts_sym(i, j) + ts_sym(j, i));
            ts_sym(i, j) = ts_sym(j, i) = avg;
        }
    const Vector lambdas = sym_eigenvalues(ts_sym);
    double mapped = 1.0 / 3.0;
    for (Index i = 0; i < np; ++i)
        mapped = std::max(mapped, companion_eigenvalue_modulus(lambdas[i]));
    out.eigenvalue_map = mapped;

    if (direct.eigenvector_condition <= 1e6) {
        out.cross_check_done = true;
        if (std::abs(out.value - out.eigenvalue_map) > 1e-8 * std::max(1.0, out.eigenvalue_map))
            throw std::runtime_error(
                "recursion_norm: direct spectral radius and eigenvalue map disagree (" +
                std::to_string(out.value) + " vs " + std::to_string(out.eigenvalue_map) + ")");
    }
    return out;
}

double scriptS_norm(const IterationMatrices& m) { return recursion_norm(m).value; }

StabilityVerdict classify_stability(const ProblemFamily& family, double omega, Index K,
                                    const SweepOptions& opts) {
    PoroSystem sys = family.make(omega);
    State initial = family.initial(sys);
    SchemeConfig cfg;
    cfg.scheme = Scheme::novel_iterative;
    cfg.K = K;
    cfg.gamma = relaxation_gamma(omega);
    cfg.init.kind = InitSpec::Kind::implicit_euler;
    cfg.init.substeps = opts.init_substeps;
    const TimeGrid grid = TimeGrid::from_horizon(opts.horizon, opts.steps);
    Trajectory traj = integrate(sys, grid, cfg, initial);

    StabilityVerdict v;
    v.omega = omega;
    v.K = K;
    v.stable = !traj.diverged;
    for (const State& s : traj.states)
        v.max_trajectory_norm = std::max(v.max_trajectory_norm, state_energy_norm(sys, s));
    return v;
}

SweepResult stability_sweep(const ProblemFamily& family, Index K, double omega_lo, double omega_hi,
                            const SweepOptions& opts) {
    if (!(omega_lo > 0.0) || !(omega_hi > omega_lo))
        throw std::invalid_argument("stability_sweep: bad bracket");
    SweepResult result;
    result.K = K;

    StabilityVerdict lo = classify_stability(family, omega_lo, K, opts);
    StabilityVerdict hi = classify_stability(family, omega_hi, K, opts);
    result.probes.push_back(lo);
    result.probes.push_back(hi);
    if (!lo.stable || hi.stable)
        throw std::runtime_error("stability_sweep: no stability transition inside bracket [" +
                                 std::to_string(omega_lo) + ", " + std::to_string(omega_hi) +
                                 "] for K = " + std::to_string(K));

    double a = omega_lo, b = omega_hi;
    while (b - a > opts.resolution) {
        const double mid = 0.5 * (a + b);
        StabilityVerdict v = classify_stability(family, mid, K, opts);
        result.probes.push_back(v);
        (v.stable ? a : b) = mid;
    }
    result.critical_parameter = a;  // largest parameter observed stable
    result.critical_coupling = coupling_strength(family.make(a), 0.0);
    return result;
}

}  // namespace poro
