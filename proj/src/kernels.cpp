#include "poro/kernels.hpp"

#include <stdexcept>

namespace poro::kernels {

namespace {
// Below this many scalar operations the OpenMP fork/join overhead dominates.
constexpr Index kGrain = 1 << 14;

void check_size(size_t a, size_t b, const char* what) {
    if (a != b) throw std::invalid_argument(std::string(what) + ": size mismatch");
}
}  // namespace

namespace serial {

double dot(std::span<const double> x, std::span<const double> y) {
    check_size(x.size(), y.size(), "dot");
    double s = 0.0;
    for (size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

void axpy(double a, std::span<const double> x, std::span<double> y) {
    check_size(x.size(), y.size(), "axpy");
    for (size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

void scale(double a, std::span<double> x) {
    for (double& v : x) v *= a;
}

void matvec(const DenseMatrix& m, std::span<const double> x, std::span<double> y) {
    check_size(x.size(), static_cast<size_t>(m.cols()), "matvec");
    check_size(y.size(), static_cast<size_t>(m.rows()), "matvec");
    const double* a = m.data();
    const Index n = m.cols();
    for (Index i = 0; i < m.rows(); ++i) {
        double s = 0.0;
        const double* row = a + i * n;
        for (Index j = 0; j < n; ++j) s += row[j] * x[static_cast<size_t>(j)];
        y[static_cast<size_t>(i)] = s;
    }
}

void matvec_transposed(const DenseMatrix& m, std::span<const double> x, std::span<double> y) {
    check_size(x.size(), static_cast<size_t>(m.rows()), "matvec_transposed");
    check_size(y.size(), static_cast<size_t>(m.cols()), "matvec_transposed");
    for (double& v : y) v = 0.0;
    const double* a = m.data();
    const Index n = m.cols();
    for (Index i = 0; i < m.rows(); ++i) {
        const double xi = x[static_cast<size_t>(i)];
        const double* row = a + i * n;
        for (Index j = 0; j < n; ++j) y[static_cast<size_t>(j)] += row[j] * xi;
    }
}

void matvec(const SparseMatrix& m, std::span<const double> x, std::span<double> y) {
    check_size(x.size(), static_cast<size_t>(m.cols()), "matvec(csr)");
    check_size(y.size(), static_cast<size_t>(m.rows()), "matvec(csr)");
    const auto& off = m.row_offsets();
    const auto& col = m.col_indices();
    const auto& val = m.values();
    for (Index i = 0; i < m.rows(); ++i) {
        double s = 0.0;
        for (Index k = off[static_cast<size_t>(i)]; k < off[static_cast<size_t>(i) + 1]; ++k)
            s += val[static_cast<size_t>(k)] * x[static_cast<size_t>(col[static_cast<size_t>(k)])];
        y[static_cast<size_t>(i)] = s;
    }
}

void matmul(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c) {
    if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimension mismatch");
    c = DenseMatrix(a.rows(), b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (Index j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
}

}  // namespace serial

double dot(std::span<const double> x, std::span<const double> y) {
    check_size(x.size(), y.size(), "dot");
    const Index n = static_cast<Index>(x.size());
    if (n < kGrain) return serial::dot(x, y);
    double s = 0.0;
#pragma omp parallel for reduction(+ : s) schedule(static)
    for (Index i = 0; i < n; ++i) s += x[static_cast<size_t>(i)] * y[static_cast<size_t>(i)];
    return s;
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

void axpy(double a, std::span<const double> x, std::span<double> y) {
    check_size(x.size(), y.size(), "axpy");
    const Index n = static_cast<Index>(x.size());
    if (n < kGrain) return serial::axpy(a, x, y);
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < n; ++i) y[static_cast<size_t>(i)] += a * x[static_cast<size_t>(i)];
}

void scale(double a, std::span<double> x) {
    const Index n = static_cast<Index>(x.size());
    if (n < kGrain) return serial::scale(a, x);
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < n; ++i) x[static_cast<size_t>(i)] *= a;
}

void matvec(const DenseMatrix& m, std::span<const double> x, std::span<double> y) {
    check_size(x.size(), static_cast<size_t>(m.cols()), "matvec");
    check_size(y.size(), static_cast<size_t>(m.rows()), "matvec");
    if (m.rows() * m.cols() < kGrain) return serial::matvec(m, x, y);
    const double* a = m.data();
    const Index n = m.cols();
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < m.rows(); ++i) {
        double s = 0.0;
        const double* row = a + i * n;
        for (Index j = 0; j < n; ++j) s += row[j] * x[static_cast<size_t>(j)];
        y[static_cast<size_t>(i)] = s;
    }
}

void matvec_transposed(const DenseMatrix& m, std::span<const double> x, std::span<double> y) {
    check_size(x.size(), static_cast<size_t>(m.rows()), "matvec_transposed");
    check_size(y.size(), static_cast<size_t>(m.cols()), "matvec_transposed");
    if (m.rows() * m.cols() < kGrain) return serial::matvec_transposed(m, x, y);
    const double* a = m.data();
    const Index rows = m.rows(), n = m.cols();
    // Column-parallel: each thread owns a contiguous slice of y.
#pragma omp parallel for schedule(static)
    for (Index j = 0; j < n; ++j) {
        double s = 0.0;
        for (Index i = 0; i < rows; ++i) s += a[i * n + j] * x[static_cast<size_t>(i)];
        y[static_cast<size_t>(j)] = s;
    }
}

void matvec(const SparseMatrix& m, std::span<const double> x, std::span<double> y) {
    check_size(x.size(), static_cast<size_t>(m.cols()), "matvec(csr)");
    check_size(y.size(), static_cast<size_t>(m.rows()), "matvec(csr)");
    if (m.nnz() < kGrain) return serial::matvec(m, x, y);
    const auto& off = m.row_offsets();
    const auto& col = m.col_indices();
    const auto& val = m.values();
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < m.rows(); ++i) {
        double s = 0.0;
        for (Index k = off[static_cast<size_t>(i)]; k < off[static_cast<size_t>(i) + 1]; ++k)
            s += val[static_cast<size_t>(k)] * x[static_cast<size_t>(col[static_cast<size_t>(k)])];
        y[static_cast<size_t>(i)] = s;
    }
}

void matmul(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c) {
    if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimension mismatch");
    if (a.rows() * a.cols() * b.cols() < kGrain) return serial::matmul(a, b, c);
    c = DenseMatrix(a.rows(), b.cols());
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < a.rows(); ++i)
        for (Index k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (Index j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
}

Vector matvec(const DenseMatrix& m, const Vector& x) {
    Vector y(m.rows());
    matvec(m, x.span(), y.span());
    return y;
}

Vector matvec_transposed(const DenseMatrix& m, const Vector& x) {
    Vector y(m.cols());
    matvec_transposed(m, x.span(), y.span());
    return y;
}

Vector matvec(const SparseMatrix& m, const Vector& x) {
    Vector y(m.rows());
    matvec(m, x.span(), y.span());
    return y;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    DenseMatrix c;
    matmul(a, b, c);
    return c;
}

}  // namespace poro::kernels
