#include "poro/solve.hpp"

#include <cmath>

#include "poro/kernels.hpp"

namespace poro {

CholeskyFactor::CholeskyFactor(const DenseMatrix& m) {
    if (!m.is_square()) throw std::invalid_argument("cholesky: matrix not square");
    const Index n = m.rows();
    l_ = m;
    double* a = l_.data();
    // Right-looking LL^T; the trailing update is the data-parallel part.
    for (Index k = 0; k < n; ++k) {
        double d = a[k * n + k];
        if (!(d > 0.0) || !std::isfinite(d))
            throw std::runtime_error("cholesky: matrix not positive definite (pivot " +
                                     std::to_string(k) + ")");
        d = std::sqrt(d);
        a[k * n + k] = d;
        const double inv_d = 1.0 / d;
        for (Index i = k + 1; i < n; ++i) a[i * n + k] *= inv_d;
#pragma omp parallel for schedule(static) if ((n - k) * (n - k) > (1 << 14))
        for (Index i = k + 1; i < n; ++i) {
            const double lik = a[i * n + k];
            if (lik == 0.0) continue;
            for (Index j = k + 1; j <= i; ++j) a[i * n + j] -= lik * a[j * n + k];
        }
    }
    // Zero the strict upper triangle so the factor is unambiguous.
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j) a[i * n + j] = 0.0;
}

void CholeskyFactor::solve_in_place(std::span<double> x) const {
    const Index n = dim();
    if (static_cast<Index>(x.size()) != n) throw std::invalid_argument("cholesky solve: size mismatch");
    const double* a = l_.data();
    // forward L y = b
    for (Index i = 0; i < n; ++i) {
        double s = x[static_cast<size_t>(i)];
        for (Index j = 0; j < i; ++j) s -= a[i * n + j] * x[static_cast<size_t>(j)];
        x[static_cast<size_t>(i)] = s / a[i * n + i];
    }
    // backward L^T x = y
    for (Index i = n - 1; i >= 0; --i) {
        double s = x[static_cast<size_t>(i)];
        for (Index j = i + 1; j < n; ++j) s -= a[j * n + i] * x[static_cast<size_t>(j)];
        x[static_cast<size_t>(i)] = s / a[i * n + i];
    }
}

Vector CholeskyFactor::solve(const Vector& b) const {
    Vector x = b;
    solve_in_place(x.span());
    x.require_finite("cholesky solve");
    return x;
}

double CholeskyFactor::log_det() const {
    double s = 0.0;
    for (Index i = 0; i < dim(); ++i) s += std::log(l_(i, i));
    return 2.0 * s;
}

CgResult conjugate_gradient(const std::function<void(std::span<const double>, std::span<double>)>& apply,
                            const Vector& b, const Vector& jacobi_inverse_diagonal, double tol,
                            Index max_iterations) {
    const Index n = b.size();
    const bool preconditioned = jacobi_inverse_diagonal.size() == n;
    const double bnorm = kernels::norm2(b.span());
    CgResult res;
    res.x = Vector(n);
    if (bnorm == 0.0) return res;

    Vector r = b;
    Vector z(n), p(n), q(n);
    auto precond = [&](const Vector& in, Vector& out) {
        if (preconditioned)
            for (Index i = 0; i < n; ++i) out[i] = jacobi_inverse_diagonal[i] * in[i];
        else
            out = in;
    };
    precond(r, z);
    p = z;
    double rz = kernels::dot(r.span(), z.span());
    for (Index it = 1; it <= max_iterations; ++it) {
        apply(p.span(), q.span());
        const double pq = kernels::dot(p.span(), q.span());
        if (!(pq > 0.0))
            throw std::runtime_error("cg: operator not positive definite (p^T A p <= 0)");
        const double alpha = rz / pq;
        kernels::axpy(alpha, p.span(), res.x.span());
        kernels::axpy(-alpha, q.span(), r.span());
        res.residual = kernels::norm2(r.span()) / bnorm;
        res.iterations = it;
        if (res.residual <= tol) {
            res.x.require_finite("cg");
            return res;
        }
        precond(r, z);
        const double rz_next = kernels::dot(r.span(), z.span());
        const double beta = rz_next / rz;
        rz = rz_next;
        for (Index i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    throw SolveFailure("cg: no convergence after " + std::to_string(max_iterations) +
                           " iterations (relative residual " + std::to_string(res.residual) + ")",
                       res.iterations, res.residual);
}

namespace {

Index default_cap(Index n, Index requested) {
    if (requested > 0) return requested;
    return std::max<Index>(20 * n, 2000);
}

Vector jacobi_diag(const DenseMatrix& m) {
    Vector d(m.rows());
    for (Index i = 0; i < m.rows(); ++i) {
        const double v = m(i, i);
        if (!(v > 0.0)) throw std::runtime_error("jacobi preconditioner: non-positive diagonal");
        d[i] = 1.0 / v;
    }
    return d;
}

Vector jacobi_diag(const SparseMatrix& m) {
    Vector d(m.rows(), 0.0);
    const auto& off = m.row_offsets();
    const auto& col = m.col_indices();
    const auto& val = m.values();
    for (Index i = 0; i < m.rows(); ++i)
        for (Index k = off[static_cast<size_t>(i)]; k < off[static_cast<size_t>(i) + 1]; ++k)
            if (col[static_cast<size_t>(k)] == i) d[i] = val[static_cast<size_t>(k)];
    for (Index i = 0; i < m.rows(); ++i) {
        if (!(d[i] > 0.0)) throw std::runtime_error("jacobi preconditioner: non-positive diagonal");
        d[i] = 1.0 / d[i];
    }
    return d;
}

}  // namespace

Vector solve_spd(const DenseMatrix& m, const Vector& b, const SpdOptions& opts) {
    if (!m.is_square() || m.rows() != b.size())
        throw std::invalid_argument("solve_spd: dimension mismatch");
    SpdMethod method = opts.method;
    if (method == SpdMethod::automatic)
        method = m.rows() <= opts.direct_threshold ? SpdMethod::direct : SpdMethod::cg;
    if (method == SpdMethod::direct) return CholeskyFactor(m).solve(b);
    Vector diag = opts.precond == Preconditioner::jacobi ? jacobi_diag(m) : Vector();
    auto apply = [&m](std::span<const double> x, std::span<double> y) { kernels::matvec(m, x, y); };
    return conjugate_gradient(apply, b, diag, opts.tol, default_cap(m.rows(), opts.max_iterations)).x;
}

Vector solve_spd(const SparseMatrix& m, const Vector& b, const SpdOptions& opts) {
    if (m.rows() != m.cols() || m.rows() != b.size())
        throw std::invalid_argument("solve_spd: dimension mismatch");
    SpdMethod method = opts.method;
    if (method == SpdMethod::automatic)
        method = m.rows() <= opts.direct_threshold ? SpdMethod::direct : SpdMethod::cg;
    if (method == SpdMethod::direct) return CholeskyFactor(m.to_dense()).solve(b);
    Vector diag = opts.precond == Preconditioner::jacobi ? jacobi_diag(m) : Vector();
    auto apply = [&m](std::span<const double> x, std::span<double> y) { kernels::matvec(m, x, y); };
    return conjugate_gradient(apply, b, diag, opts.tol, default_cap(m.rows(), opts.max_iterations)).x;
}

double weighted_inner(const Vector& x, const DenseMatrix& m, const Vector& y) {
    if (m.rows() != m.cols() || x.size() != m.rows() || y.size() != m.rows())
        throw std::invalid_argument("weighted_inner: dimension mismatch");
    Vector my = kernels::matvec(m, y);
    return kernels::dot(x.span(), my.span());
}

double weighted_norm(const Vector& x, const DenseMatrix& m) {
    if (!m.is_square() || x.size() != m.rows())
        throw std::invalid_argument("weighted_norm: dimension mismatch");
    if (!m.symmetric_to(1e-10)) throw std::invalid_argument("weighted_norm: matrix not symmetric");
    const double q = weighted_inner(x, m, x);
    const double xx = kernels::dot(x.span(), x.span());
    if (q < -1e-12 * xx * std::max(1e-300, m.max_abs()))
        throw std::runtime_error("weighted_norm: matrix indefinite (x^T M x = " + std::to_string(q) + ")");
    return std::sqrt(std::max(0.0, q));
}

}  // namespace poro
