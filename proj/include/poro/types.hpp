#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace poro {

using Index = std::ptrdiff_t;

/// Dense vector of doubles. All public constructors and every solver that
/// returns a Vector guarantee finite entries.
class Vector {
public:
    Vector() = default;
    explicit Vector(Index n, double fill = 0.0) : data_(static_cast<size_t>(n), fill) {
        if (n < 0) throw std::invalid_argument("Vector: negative size");
    }
    Vector(std::initializer_list<double> init) : data_(init) {}
    explicit Vector(std::vector<double> data) : data_(std::move(data)) {}

    Index size() const { return static_cast<Index>(data_.size()); }
    double& operator[](Index i) { return data_[static_cast<size_t>(i)]; }
    double operator[](Index i) const { return data_[static_cast<size_t>(i)]; }
    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::span<const double> span() const { return {data_.data(), data_.size()}; }
    std::span<double> span() { return {data_.data(), data_.size()}; }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }
    void require_finite(const char* what) const {
        if (!all_finite()) throw std::runtime_error(std::string(what) + ": non-finite entries");
    }

    bool operator==(const Vector&) const = default;

private:
    std::vector<double> data_;
};

/// Dense row-major matrix. The symmetric flag is advisory; set_symmetric
/// verifies exact symmetry before accepting it.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(Index rows, Index cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows * cols), fill) {
        if (rows < 0 || cols < 0) throw std::invalid_argument("DenseMatrix: negative shape");
    }

    static DenseMatrix identity(Index n) {
        DenseMatrix m(n, n);
        for (Index i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    Index rows() const { return rows_; }
    Index cols() const { return cols_; }
    double& operator()(Index i, Index j) { return data_[static_cast<size_t>(i * cols_ + j)]; }
    double operator()(Index i, Index j) const { return data_[static_cast<size_t>(i * cols_ + j)]; }
    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    bool is_square() const { return rows_ == cols_; }

    /// max_ij |M_ij - M_ji|
    double asymmetry() const {
        double worst = 0.0;
        for (Index i = 0; i < rows_; ++i)
            for (Index j = i + 1; j < cols_; ++j)
                worst = std::max(worst, std::abs((*this)(i, j) - (*this)(j, i)));
        return worst;
    }
    double max_abs() const {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::abs(v));
        return m;
    }
    bool symmetric_to(double rel_tol) const {
        if (!is_square()) return false;
        return asymmetry() <= rel_tol * std::max(1e-300, max_abs());
    }

    DenseMatrix transposed() const {
        DenseMatrix t(cols_, rows_);
        for (Index i = 0; i < rows_; ++i)
            for (Index j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

private:
    Index rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

/// Compressed-row sparse matrix. Column indices are strictly increasing
/// within each row; offsets are non-decreasing.
class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(Index rows, Index cols, std::vector<Index> row_offsets,
                 std::vector<Index> col_indices, std::vector<double> values)
        : rows_(rows), cols_(cols), row_offsets_(std::move(row_offsets)),
          col_indices_(std::move(col_indices)), values_(std::move(values)) {
        validate();
    }

    /// Build from (row, col, value) triplets; duplicate entries are summed.
    static SparseMatrix from_triplets(Index rows, Index cols,
                                      std::vector<std::tuple<Index, Index, double>> triplets);

    static SparseMatrix from_dense(const DenseMatrix& d, double drop_tol = 0.0);

    Index rows() const { return rows_; }
    Index cols() const { return cols_; }
    Index nnz() const { return static_cast<Index>(values_.size()); }
    const std::vector<Index>& row_offsets() const { return row_offsets_; }
    const std::vector<Index>& col_indices() const { return col_indices_; }
    const std::vector<double>& values() const { return values_; }

    DenseMatrix to_dense() const {
        DenseMatrix d(rows_, cols_);
        for (Index i = 0; i < rows_; ++i)
            for (Index k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
                d(i, col_indices_[k]) = values_[k];
        return d;
    }

private:
    void validate() const;

    Index rows_ = 0, cols_ = 0;
    std::vector<Index> row_offsets_{0};
    std::vector<Index> col_indices_;
    std::vector<double> values_;
};

}  // namespace poro
