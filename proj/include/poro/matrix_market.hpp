#pragma once

#include <filesystem>
#include <iosfwd>

#include "poro/types.hpp"

namespace poro::mm {

// Matrix Market exchange format, coordinate and array variants, real entries.
// Values are written with 17 significant digits so a write/read round trip
// reproduces every double bit-exactly.

void write_dense(std::ostream& os, const DenseMatrix& m);
void write_sparse(std::ostream& os, const SparseMatrix& m);
void write_vector(std::ostream& os, const Vector& v);

void write_dense(const std::filesystem::path& path, const DenseMatrix& m);
void write_sparse(const std::filesystem::path& path, const SparseMatrix& m);
void write_vector(const std::filesystem::path& path, const Vector& v);

/// Reads either variant into dense storage (symmetric files are expanded).
DenseMatrix read_dense(std::istream& is);
DenseMatrix read_dense(const std::filesystem::path& path);

SparseMatrix read_sparse(std::istream& is);
SparseMatrix read_sparse(const std::filesystem::path& path);

/// Reads an array file with a single column (or single row) as a vector.
Vector read_vector(std::istream& is);
Vector read_vector(const std::filesystem::path& path);

}  // namespace poro::mm
