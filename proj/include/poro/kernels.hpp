#pragma once

#include "poro/types.hpp"

namespace poro::kernels {

// Serial reference implementations. These are the ground truth the parallel
// kernels are tested against; they also serve small problems where spawning
// threads is a net loss.
namespace serial {

double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);
void axpy(double a, std::span<const double> x, std::span<double> y);    // y += a*x
void scale(double a, std::span<double> x);                              // x *= a
void matvec(const DenseMatrix& m, std::span<const double> x, std::span<double> y);
void matvec_transposed(const DenseMatrix& m, std::span<const double> x, std::span<double> y);
void matvec(const SparseMatrix& m, std::span<const double> x, std::span<double> y);
void matmul(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c);

}  // namespace serial

// OpenMP kernels. They fall back to the serial path below a grain size.
double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);
void axpy(double a, std::span<const double> x, std::span<double> y);
void scale(double a, std::span<double> x);
void matvec(const DenseMatrix& m, std::span<const double> x, std::span<double> y);
void matvec_transposed(const DenseMatrix& m, std::span<const double> x, std::span<double> y);
void matvec(const SparseMatrix& m, std::span<const double> x, std::span<double> y);
void matmul(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c);

Vector matvec(const DenseMatrix& m, const Vector& x);
Vector matvec_transposed(const DenseMatrix& m, const Vector& x);
Vector matvec(const SparseMatrix& m, const Vector& x);
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);

inline Vector add(const Vector& x, const Vector& y) {
    Vector r = x;
    axpy(1.0, y.span(), r.span());
    return r;
}
inline Vector sub(const Vector& x, const Vector& y) {
    Vector r = x;
    axpy(-1.0, y.span(), r.span());
    return r;
}
inline Vector scaled(const Vector& x, double a) {
    Vector r = x;
    scale(a, r.span());
    return r;
}

}  // namespace poro::kernels
