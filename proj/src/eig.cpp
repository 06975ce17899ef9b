#include "poro/eig.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "poro/kernels.hpp"
#include "poro/solve.hpp"

namespace poro {

namespace {

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const EMat> as_eigen(const DenseMatrix& m) {
    return {m.data(), m.rows(), m.cols()};
}

DenseMatrix from_eigen(const EMat& e) {
    DenseMatrix m(e.rows(), e.cols());
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) m(i, j) = e(i, j);
    return m;
}

}  // namespace

SymEigen sym_eigen(const DenseMatrix& m) {
    if (!m.is_square()) throw std::invalid_argument("sym_eigen: matrix not square");
    Eigen::SelfAdjointEigenSolver<EMat> es(as_eigen(m));
    if (es.info() != Eigen::Success) throw std::runtime_error("sym_eigen: eigensolver failed");
    SymEigen out;
    out.values = Vector(m.rows());
    for (Index i = 0; i < m.rows(); ++i) out.values[i] = es.eigenvalues()(i);
    out.vectors = from_eigen(es.eigenvectors());
    return out;
}

Vector sym_eigenvalues(const DenseMatrix& m) {
    if (!m.is_square()) throw std::invalid_argument("sym_eigenvalues: matrix not square");
    Eigen::SelfAdjointEigenSolver<EMat> es(as_eigen(m), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw std::runtime_error("sym_eigenvalues: eigensolver failed");
    Vector v(m.rows());
    for (Index i = 0; i < m.rows(); ++i) v[i] = es.eigenvalues()(i);
    return v;
}

namespace {

// Plain power iteration for the largest |eigenvalue| of a symmetric matrix.
double sym_dominant(const DenseMatrix& m, double tol, Index cap) {
    const Index n = m.rows();
    Vector x(n, 1.0);
    double lambda = 0.0;
    Vector y(n);
    for (Index it = 0; it < cap; ++it) {
        kernels::matvec(m, x.span(), y.span());
        const double ynorm = kernels::norm2(y.span());
        if (ynorm == 0.0) return 0.0;
        kernels::scale(1.0 / ynorm, y.span());
        const double next = weighted_inner(y, m, y);
        if (it > 0 && std::abs(next - lambda) <= tol * std::max(1.0, std::abs(next))) return next;
        lambda = next;
        std::swap(x, y);
    }
    return lambda;
}

}  // namespace

ExtremalEigenvalues sym_extremal_eigenvalues(const DenseMatrix& m, Index dense_threshold, double tol) {
    if (!m.is_square()) throw std::invalid_argument("sym_extremal_eigenvalues: matrix not square");
    ExtremalEigenvalues out;
    if (m.rows() <= dense_threshold) {
        Vector ev = sym_eigenvalues(m);
        out.smallest = ev[0];
        out.largest = ev[ev.size() - 1];
        return out;
    }
    // Above the dense threshold: power iteration for the largest magnitude,
    // then a shifted iteration to resolve the opposite end of the spectrum.
    const double dominant = sym_dominant(m, tol, 20000);
    DenseMatrix shifted = m;
    for (Index i = 0; i < m.rows(); ++i) shifted(i, i) -= dominant;
    const double opposite = sym_dominant(shifted, tol, 20000) + dominant;
    out.smallest = std::min(dominant, opposite);
    out.largest = std::max(dominant, opposite);
    return out;
}

double max_generalized_eigenvalue(const DenseMatrix& num, const DenseMatrix& den, double tol) {
    PowerIterationOptions opts;
    opts.tol = tol;
    return max_generalized_eigenvalue(num, den, opts);
}

double max_generalized_eigenvalue(const DenseMatrix& num, const DenseMatrix& den,
                                  const PowerIterationOptions& opts) {
    if (!num.is_square() || !den.is_square() || num.rows() != den.rows())
        throw std::invalid_argument("max_generalized_eigenvalue: dimension mismatch");
    const Index n = num.rows();
    CholeskyFactor den_factor(den);

    // Deterministic starts: all ones, then a sign-alternating restart that is
    // far from the constant direction if the first stagnates in a nullspace.
    auto start_vector = [n](int attempt) {
        Vector x(n, 1.0);
        if (attempt == 1)
            for (Index i = 0; i < n; ++i) x[i] = (i % 2 == 0) ? 1.0 : -1.0;
        if (attempt == 2)
            for (Index i = 0; i < n; ++i) x[i] = static_cast<double>(i + 1);
        return x;
    };

    for (int attempt = 0; attempt < 3; ++attempt) {
        Vector x = start_vector(attempt);
        {
            const double wn = std::sqrt(std::max(0.0, weighted_inner(x, den, x)));
            kernels::scale(1.0 / wn, x.span());
        }
        double lambda = 0.0;
        bool stagnant_zero = false;
        for (Index it = 1; it <= opts.max_iterations; ++it) {
            Vector mx = kernels::matvec(num, x);
            const double rayleigh = kernels::dot(x.span(), mx.span());  // x^T Mnum x, x normalized in Mden
            Vector y = den_factor.solve(mx);
            const double ynorm = std::sqrt(std::max(0.0, weighted_inner(y, den, y)));
            if (ynorm <= 1e-150) {
                // Mnum annihilates this direction; try the next start.
                stagnant_zero = true;
                break;
            }
            kernels::scale(1.0 / ynorm, y.span());
            if (it > 1 && std::abs(rayleigh - lambda) <= opts.tol * std::max(std::abs(rayleigh), 1e-300))
                return std::max(0.0, rayleigh);
            lambda = rayleigh;
            x = std::move(y);
        }
        if (!stagnant_zero)
            throw SolveFailure("max_generalized_eigenvalue: no convergence", opts.max_iterations,
                               lambda);
    }
    return 0.0;  // every probe direction lies in the nullspace of Mnum
}

SpectrumInfo general_spectrum(const DenseMatrix& m) {
    if (!m.is_square()) throw std::invalid_argument("general_spectrum: matrix not square");
    Eigen::EigenSolver<EMat> es(as_eigen(m), /*computeEigenvectors=*/true);
    if (es.info() != Eigen::Success) throw std::runtime_error("general_spectrum: eigensolver failed");
    SpectrumInfo out;
    const auto& vals = es.eigenvalues();
    for (Index i = 0; i < m.rows(); ++i) {
        out.eigenvalues_re.push_back(vals(i).real());
        out.eigenvalues_im.push_back(vals(i).imag());
        out.spectral_radius = std::max(out.spectral_radius, std::abs(vals(i)));
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(es.eigenvectors());
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    out.eigenvector_condition = smin > 0.0 ? svd.singularValues()(0) / smin
                                           : std::numeric_limits<double>::infinity();
    return out;
}

SymSqrt sym_sqrt(const DenseMatrix& w) {
    SymEigen es = sym_eigen(w);
    const Index n = w.rows();
    for (Index i = 0; i < n; ++i)
        if (!(es.values[i] > 0.0))
            throw std::runtime_error("sym_sqrt: matrix not positive definite");
    SymSqrt out;
    out.sqrt = DenseMatrix(n, n);
    out.inv_sqrt = DenseMatrix(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
            double s = 0.0, si = 0.0;
            for (Index k = 0; k < n; ++k) {
                const double r = std::sqrt(es.values[k]);
                const double vv = es.vectors(i, k) * es.vectors(j, k);
                s += r * vv;
                si += vv / r;
            }
            out.sqrt(i, j) = s;
            out.inv_sqrt(i, j) = si;
        }
    return out;
}

double spectral_norm(const DenseMatrix& m) {
    // ||M||_2^2 = lambda_max(M^T M); the Gram matrix keeps everything symmetric.
    const DenseMatrix mt = m.transposed();
    DenseMatrix gram = kernels::matmul(mt, m);
    Vector ev = sym_eigenvalues(gram);
    return std::sqrt(std::max(0.0, ev[ev.size() - 1]));
}

double smallest_singular_value(const DenseMatrix& m) {
    const bool wide = m.cols() >= m.rows();
    const DenseMatrix mt = m.transposed();
    DenseMatrix gram = wide ? kernels::matmul(m, mt) : kernels::matmul(mt, m);
    Vector ev = sym_eigenvalues(gram);
    return std::sqrt(std::max(0.0, ev[0]));
}

double weighted_operator_norm(const DenseMatrix& m, const SymSqrt& w) {
    DenseMatrix t = kernels::matmul(w.sqrt, kernels::matmul(m, w.inv_sqrt));
    // The congruence of every matrix we measure here is symmetric up to
    // roundoff; symmetrize and use the cheap symmetric route when it is.
    if (t.symmetric_to(1e-8)) {
        for (Index i = 0; i < t.rows(); ++i)
            for (Index j = i + 1; j < t.cols(); ++j) {
                const double avg = 0.5 * (t(i, j) + t(j, i));
                t(i, j) = t(j, i) = avg;
            }
        Vector ev = sym_eigenvalues(t);
        return std::max(std::abs(ev[0]), std::abs(ev[ev.size() - 1]));
    }
    return spectral_norm(t);
}

double weighted_operator_norm(const DenseMatrix& m, const DenseMatrix& w) {
    return weighted_operator_norm(m, sym_sqrt(w));
}

}  // namespace poro
