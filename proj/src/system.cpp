#include "poro/system.hpp"

#include <cmath>

#include "poro/eig.hpp"
#include "poro/kernels.hpp"
#include "poro/solve.hpp"

namespace poro {

PoroSystem::PoroSystem(DenseMatrix A, DenseMatrix B, DenseMatrix C, DenseMatrix D, RhsFn f, RhsFn g,
                       Validation validation)
    : A_(std::move(A)), B_(std::move(B)), C_(std::move(C)), D_(std::move(D)), f_(std::move(f)),
      g_(std::move(g)) {
    validate(validation);
}

void PoroSystem::validate(Validation validation) {
    auto check_spd = [](const DenseMatrix& m, const char* name) {
        if (!m.is_square()) throw std::runtime_error(std::string(name) + ": not square");
        if (!m.symmetric_to(1e-12))
            throw std::runtime_error(std::string(name) + ": not symmetric to 1e-12 relative");
        try {
            CholeskyFactor factor(m);
        } catch (const std::exception&) {
            throw std::runtime_error(std::string(name) + ": not positive definite");
        }
    };
    check_spd(A_, "A");
    check_spd(B_, "B");
    check_spd(C_, "C");
    if (B_.rows() != C_.rows()) throw std::runtime_error("B and C dimensions differ");
    if (D_.rows() != n_p() || D_.cols() != n_u())
        throw std::runtime_error("D: expected shape n_p x n_u");
    if (!f_ || !g_) throw std::runtime_error("right-hand sides not set");
    if (validation == Validation::strict) {
        if (n_p() > n_u())
            throw std::runtime_error("D: rank deficient (n_p = " + std::to_string(n_p()) +
                                     " rows exceed n_u = " + std::to_string(n_u()) + " columns)");
        const double norm_d = spectral_norm(D_);
        const double sigma_min = smallest_singular_value(D_);
        if (!(sigma_min > 1e-10 * norm_d))
            throw std::runtime_error("D: rank deficient (smallest singular value " +
                                     std::to_string(sigma_min) + ")");
    }
}

Vector PoroSystem::f(double t) const {
    Vector v = f_(t);
    if (v.size() != n_u()) throw std::runtime_error("f(t): wrong dimension");
    v.require_finite("f(t)");
    return v;
}

Vector PoroSystem::g(double t) const {
    Vector v = g_(t);
    if (v.size() != n_p()) throw std::runtime_error("g(t): wrong dimension");
    v.require_finite("g(t)");
    return v;
}

SpectralConstants PoroSystem::spectral_constants(Index dense_threshold) const {
    SpectralConstants sc;
    const auto ea = sym_extremal_eigenvalues(A_, dense_threshold);
    const auto eb = sym_extremal_eigenvalues(B_, dense_threshold);
    const auto ec = sym_extremal_eigenvalues(C_, dense_threshold);
    sc.c_A = ea.smallest;
    sc.C_A = ea.largest;
    sc.c_B = eb.smallest;
    sc.C_B = eb.largest;
    sc.c_C = ec.smallest;
    sc.C_C = ec.largest;
    sc.C_D = spectral_norm(D_);
    return sc;
}

std::string scheme_name(Scheme s) {
    switch (s) {
        case Scheme::implicit_bdf2: return "implicit_bdf2";
        case Scheme::semi_explicit_bdf2: return "semi_explicit_bdf2";
        case Scheme::fixed_stress_bdf2: return "fixed_stress_bdf2";
        case Scheme::naive_iterative: return "naive_iterative";
        case Scheme::novel_iterative: return "novel_iterative";
    }
    throw std::logic_error("scheme_name: unknown scheme");
}

Scheme parse_scheme(const std::string& name) {
    if (name == "implicit_bdf2") return Scheme::implicit_bdf2;
    if (name == "semi_explicit_bdf2") return Scheme::semi_explicit_bdf2;
    if (name == "fixed_stress_bdf2") return Scheme::fixed_stress_bdf2;
    if (name == "naive_iterative") return Scheme::naive_iterative;
    if (name == "novel_iterative") return Scheme::novel_iterative;
    throw std::invalid_argument("unknown scheme '" + name + "'");
}

void SchemeConfig::validate() const {
    if (K < 1) throw std::invalid_argument("SchemeConfig: K must be >= 1");
    if (!(gamma > 0.0) || gamma > 1.0)
        throw std::invalid_argument("SchemeConfig: gamma must lie in (0, 1]");
    if (scheme == Scheme::fixed_stress_bdf2 && !(tol > 0.0))
        throw std::invalid_argument("SchemeConfig: fixed-stress tolerance must be positive");
    if (init.kind == InitSpec::Kind::implicit_euler && init.substeps < 1)
        throw std::invalid_argument("SchemeConfig: init substeps must be >= 1");
    if (init.kind == InitSpec::Kind::exact && !init.first_state.has_value())
        throw std::invalid_argument("SchemeConfig: exact init requires the first state");
}

DenseMatrix assemble_Ctau(const PoroSystem& sys, double tau) {
    if (tau < 0.0) throw std::invalid_argument("assemble_Ctau: negative step size");
    DenseMatrix ct = sys.C();
    const DenseMatrix& b = sys.B();
    const double w = (2.0 / 3.0) * tau;
    for (Index i = 0; i < ct.rows(); ++i)
        for (Index j = 0; j < ct.cols(); ++j) ct(i, j) += w * b(i, j);
    return ct;
}

namespace {

/// G = D A^{-1} D^T, the coupling Schur block (n_p x n_p, symmetric PSD).
DenseMatrix coupling_gram(const PoroSystem& sys) {
    const Index np = sys.n_p(), nu = sys.n_u();
    CholeskyFactor a(sys.A());
    DenseMatrix g(np, np);
    Vector col(nu);
    for (Index j = 0; j < np; ++j) {
        for (Index i = 0; i < nu; ++i) col[i] = sys.D()(j, i);
        a.solve_in_place(col.span());
        for (Index i = 0; i < np; ++i) {
            double s = 0.0;
            for (Index k = 0; k < nu; ++k) s += sys.D()(i, k) * col[k];
            g(i, j) = s;
        }
    }
    // Symmetrize away the roundoff from the columnwise solves.
    for (Index i = 0; i < np; ++i)
        for (Index j = i + 1; j < np; ++j) {
            const double avg = 0.5 * (g(i, j) + g(j, i));
            g(i, j) = g(j, i) = avg;
        }
    return g;
}

}  // namespace

double coupling_strength(const PoroSystem& sys, double tau, double tol) {
    if (tau < 0.0) throw std::invalid_argument("coupling_strength: negative step size");
    const DenseMatrix gram = coupling_gram(sys);
    const DenseMatrix ctau = assemble_Ctau(sys, tau);
    return max_generalized_eigenvalue(gram, ctau, tol);
}

double coupling_strength_dense(const PoroSystem& sys, double tau) {
    if (tau < 0.0) throw std::invalid_argument("coupling_strength_dense: negative step size");
    const DenseMatrix gram = coupling_gram(sys);
    const SymSqrt w = sym_sqrt(assemble_Ctau(sys, tau));
    DenseMatrix m = kernels::matmul(w.inv_sqrt, kernels::matmul(gram, w.inv_sqrt));
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = i + 1; j < m.cols(); ++j) {
            const double avg = 0.5 * (m(i, j) + m(j, i));
            m(i, j) = m(j, i) = avg;
        }
    const Vector ev = sym_eigenvalues(m);
    return std::max(0.0, ev[ev.size() - 1]);
}

double coupling_bound(const SpectralConstants& sc) { return sc.C_D * sc.C_D / (sc.c_A * sc.c_C); }

double coupling_bound(const PoroSystem& sys) { return coupling_bound(sys.spectral_constants()); }

double relaxation_gamma(double omega) {
    if (omega < 0.0) throw std::invalid_argument("relaxation_gamma: omega must be nonnegative");
    return 2.0 / (2.0 + omega);
}

namespace {
bool iteration_bound_holds(double omega, Index k) {
    // 3 omega^K < (2 + omega)^{K-1}, evaluated in log space.
    return std::log(3.0) + static_cast<double>(k) * std::log(omega) <
           static_cast<double>(k - 1) * std::log(2.0 + omega);
}
}  // namespace

Index min_inner_iterations(double omega) {
    if (!(omega > 0.0)) throw std::invalid_argument("min_inner_iterations: omega must be positive");
    for (Index k = 1; k <= 10000; ++k)
        if (iteration_bound_holds(omega, k)) return k;
    throw std::runtime_error("min_inner_iterations: no K <= 10000 satisfies the bound");
}

double max_stable_coupling(Index K) {
    if (K < 1) throw std::invalid_argument("max_stable_coupling: K must be >= 1");
    double lo = 1e-8, hi = 1e8;
    if (!iteration_bound_holds(lo, K)) throw std::runtime_error("max_stable_coupling: bad bracket");
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (iteration_bound_holds(mid, K) ? lo : hi) = mid;
    }
    return lo;
}

RankReport coupling_rank_report(const PoroSystem& sys) {
    RankReport r;
    r.sigma_max = spectral_norm(sys.D());
    r.sigma_min = sys.n_p() <= sys.n_u() ? smallest_singular_value(sys.D()) : 0.0;
    r.full_row_rank = r.sigma_min > 1e-10 * r.sigma_max;
    return r;
}

double check_consistency(const PoroSystem& sys, const State& s) {
    Vector residual = kernels::matvec(sys.A(), s.u);
    Vector dtp = kernels::matvec_transposed(sys.D(), s.p);
    Vector ft = sys.f(s.t);
    for (Index i = 0; i < residual.size(); ++i) residual[i] -= dtp[i] + ft[i];
    return kernels::norm2(residual.span()) / std::max(1.0, kernels::norm2(ft.span()));
}

State solve_static(const PoroSystem& sys, double t) {
    State s;
    s.t = t;
    s.p = solve_spd(sys.B(), sys.g(t));
    Vector rhs = sys.f(t);
    Vector dtp = kernels::matvec_transposed(sys.D(), s.p);
    kernels::axpy(1.0, dtp.span(), rhs.span());
    s.u = solve_spd(sys.A(), rhs);
    return s;
}

}  // namespace poro
