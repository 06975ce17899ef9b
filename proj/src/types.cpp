#include "poro/types.hpp"

#include <algorithm>
#include <tuple>

namespace poro {

void SparseMatrix::validate() const {
    if (rows_ < 0 || cols_ < 0) throw std::invalid_argument("SparseMatrix: negative shape");
    if (static_cast<Index>(row_offsets_.size()) != rows_ + 1)
        throw std::invalid_argument("SparseMatrix: row offsets must have rows+1 entries");
    if (row_offsets_.front() != 0 || row_offsets_.back() != nnz())
        throw std::invalid_argument("SparseMatrix: bad offset bounds");
    if (col_indices_.size() != values_.size())
        throw std::invalid_argument("SparseMatrix: index/value length mismatch");
    for (Index i = 0; i < rows_; ++i) {
        const Index b = row_offsets_[static_cast<size_t>(i)];
        const Index e = row_offsets_[static_cast<size_t>(i) + 1];
        if (e < b) throw std::invalid_argument("SparseMatrix: decreasing offsets");
        for (Index k = b; k < e; ++k) {
            const Index c = col_indices_[static_cast<size_t>(k)];
            if (c < 0 || c >= cols_) throw std::invalid_argument("SparseMatrix: column out of range");
            if (k > b && c <= col_indices_[static_cast<size_t>(k) - 1])
                throw std::invalid_argument("SparseMatrix: column indices not strictly increasing");
        }
    }
}

SparseMatrix SparseMatrix::from_triplets(Index rows, Index cols,
                                         std::vector<std::tuple<Index, Index, double>> triplets) {
    std::sort(triplets.begin(), triplets.end(), [](const auto& a, const auto& b) {
        return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
    });
    std::vector<Index> off(static_cast<size_t>(rows) + 1, 0);
    std::vector<Index> col;
    std::vector<double> val;
    col.reserve(triplets.size());
    val.reserve(triplets.size());
    for (size_t k = 0; k < triplets.size();) {
        const auto [i, j, v0] = triplets[k];
        if (i < 0 || i >= rows || j < 0 || j >= cols)
            throw std::invalid_argument("SparseMatrix: triplet out of range");
        double v = v0;
        size_t k2 = k + 1;
        while (k2 < triplets.size() && std::get<0>(triplets[k2]) == i && std::get<1>(triplets[k2]) == j)
            v += std::get<2>(triplets[k2++]);
        col.push_back(j);
        val.push_back(v);
        ++off[static_cast<size_t>(i) + 1];
        k = k2;
    }
    for (size_t i = 1; i < off.size(); ++i) off[i] += off[i - 1];
    return SparseMatrix(rows, cols, std::move(off), std::move(col), std::move(val));
}

SparseMatrix SparseMatrix::from_dense(const DenseMatrix& d, double drop_tol) {
    std::vector<std::tuple<Index, Index, double>> trips;
    for (Index i = 0; i < d.rows(); ++i)
        for (Index j = 0; j < d.cols(); ++j)
            if (std::abs(d(i, j)) > drop_tol) trips.emplace_back(i, j, d(i, j));
    return from_triplets(d.rows(), d.cols(), std::move(trips));
}

}  // namespace poro
