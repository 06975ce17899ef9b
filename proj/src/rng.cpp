#include "poro/rng.hpp"

#include "poro/kernels.hpp"

namespace poro {

DenseMatrix random_matrix(SplitMix64& rng, Index rows, Index cols) {
    DenseMatrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
    return m;
}

DenseMatrix random_spd(SplitMix64& rng, Index n, double shift) {
    DenseMatrix r = random_matrix(rng, n, n);
    DenseMatrix m = kernels::matmul(r.transposed(), r);
    for (Index i = 0; i < n; ++i) m(i, i) += shift;
    // Force exact symmetry; the product picks up roundoff asymmetry.
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j) {
            const double avg = 0.5 * (m(i, j) + m(j, i));
            m(i, j) = m(j, i) = avg;
        }
    return m;
}

Vector random_vector(SplitMix64& rng, Index n, double lo, double hi) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
    return v;
}

}  // namespace poro
