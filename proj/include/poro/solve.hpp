#pragma once

#include <functional>
#include <optional>

#include "poro/types.hpp"

namespace poro {

/// Thrown when an iterative solver runs out of its iteration budget.
struct SolveFailure : std::runtime_error {
    SolveFailure(const std::string& msg, Index iters, double residual)
        : std::runtime_error(msg), iterations(iters), residual(residual) {}
    Index iterations;
    double residual;
};

/// Dense Cholesky factorization M = L L^T of a symmetric positive definite
/// matrix. Throws std::runtime_error on a non-positive pivot.
class CholeskyFactor {
public:
    explicit CholeskyFactor(const DenseMatrix& m);

    Index dim() const { return l_.rows(); }
    Vector solve(const Vector& b) const;
    void solve_in_place(std::span<double> x) const;
    /// log(det(M)) via the factor diagonal; occasionally useful in tests.
    double log_det() const;

private:
    DenseMatrix l_;
};

enum class SpdMethod { automatic, direct, cg };
enum class Preconditioner { none, jacobi };

struct SpdOptions {
    SpdMethod method = SpdMethod::automatic;
    Preconditioner precond = Preconditioner::jacobi;
    double tol = 1e-12;          // relative residual for CG
    Index max_iterations = 0;    // 0: pick from problem size
    Index direct_threshold = 2000;  // automatic switches to CG above this dimension
};

struct CgResult {
    Vector x;
    Index iterations = 0;
    double residual = 0.0;  // relative
};

/// Preconditioned conjugate gradients for an abstract SPD operator.
CgResult conjugate_gradient(const std::function<void(std::span<const double>, std::span<double>)>& apply,
                            const Vector& b, const Vector& jacobi_inverse_diagonal, double tol,
                            Index max_iterations);

/// Solve M x = b for SPD M. Direct dense Cholesky by default at desk scale,
/// CG with Jacobi preconditioning above the dimension threshold.
Vector solve_spd(const DenseMatrix& m, const Vector& b, const SpdOptions& opts = {});
Vector solve_spd(const SparseMatrix& m, const Vector& b, const SpdOptions& opts = {});

/// sqrt(x^T M x) for symmetric positive (semi-)definite M. Rejects dimension
/// mismatch and indefiniteness beyond roundoff (x^T M x < -1e-12 |x|^2 |M|).
double weighted_norm(const Vector& x, const DenseMatrix& m);

/// x^T M y without forming M y twice; helper shared by norms and tests.
double weighted_inner(const Vector& x, const DenseMatrix& m, const Vector& y);

}  // namespace poro
