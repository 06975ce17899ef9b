#pragma once

#include "poro/types.hpp"

namespace poro {

struct SymEigen {
    Vector values;        // ascending
    DenseMatrix vectors;  // columns are eigenvectors
};

/// Full symmetric eigendecomposition (dense). Desk-scale workhorse behind
/// spectral constants, matrix square roots, and weighted operator norms.
SymEigen sym_eigen(const DenseMatrix& m);
Vector sym_eigenvalues(const DenseMatrix& m);

struct ExtremalEigenvalues {
    double smallest = 0.0;
    double largest = 0.0;
};

/// Smallest and largest eigenvalue of a symmetric matrix. Uses the dense
/// eigensolver up to `dense_threshold`, power/inverse iteration above.
ExtremalEigenvalues sym_extremal_eigenvalues(const DenseMatrix& m, Index dense_threshold = 2000,
                                             double tol = 1e-10);

struct PowerIterationOptions {
    double tol = 1e-10;          // relative eigenvalue change
    Index max_iterations = 10000;
};

/// Largest eigenvalue of the pencil (Mnum, Mden): power iteration on
/// Mden^{-1} Mnum with Mden-weighted normalization. Deterministic start
/// (all ones), orthogonal restart on stagnation.
double max_generalized_eigenvalue(const DenseMatrix& num, const DenseMatrix& den, double tol = 1e-10);
double max_generalized_eigenvalue(const DenseMatrix& num, const DenseMatrix& den,
                                  const PowerIterationOptions& opts);

/// Spectral radius of a general (possibly non-normal) real matrix, together
/// with the condition number of its eigenvector matrix.
struct SpectrumInfo {
    double spectral_radius = 0.0;
    double eigenvector_condition = 0.0;
    std::vector<double> eigenvalues_re;
    std::vector<double> eigenvalues_im;
};
SpectrumInfo general_spectrum(const DenseMatrix& m);

/// Symmetric square root pair (W^{1/2}, W^{-1/2}) of an SPD matrix.
struct SymSqrt {
    DenseMatrix sqrt;
    DenseMatrix inv_sqrt;
};
SymSqrt sym_sqrt(const DenseMatrix& w);

/// Largest singular value: ||M||_2.
double spectral_norm(const DenseMatrix& m);
/// Smallest singular value, via the Gram matrix of the short side.
double smallest_singular_value(const DenseMatrix& m);

/// Weighted operator norm ||M||_W = ||W^{1/2} M W^{-1/2}||_2 for SPD W,
/// computed by symmetric congruence.
double weighted_operator_norm(const DenseMatrix& m, const SymSqrt& w);
double weighted_operator_norm(const DenseMatrix& m, const DenseMatrix& w);

}  // namespace poro
