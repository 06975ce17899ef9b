#include "poro/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace poro::mm {

namespace {

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct Header {
    bool coordinate = false;
    bool symmetric = false;
};

Header parse_header(std::istream& is, const char* what) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error(std::string(what) + ": empty file");
    std::istringstream head(line);
    std::string banner, object, fmt, field, symmetry;
    head >> banner >> object >> fmt >> field >> symmetry;
    if (banner != "%%MatrixMarket" || object != "matrix")
        throw std::runtime_error(std::string(what) + ": not a MatrixMarket matrix file");
    Header h;
    if (fmt == "coordinate")
        h.coordinate = true;
    else if (fmt != "array")
        throw std::runtime_error(std::string(what) + ": unsupported format '" + fmt + "'");
    if (field != "real")
        throw std::runtime_error(std::string(what) + ": unsupported field '" + field + "'");
    if (symmetry == "symmetric")
        h.symmetric = true;
    else if (symmetry != "general")
        throw std::runtime_error(std::string(what) + ": unsupported symmetry '" + symmetry + "'");
    return h;
}

std::string next_data_line(std::istream& is) {
    std::string line;
    while (std::getline(is, line)) {
        size_t i = 0;
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i == line.size() || line[i] == '%') continue;
        return line;
    }
    return {};
}

}  // namespace

void write_dense(std::ostream& os, const DenseMatrix& m) {
    os << "%%MatrixMarket matrix array real general\n";
    os << m.rows() << " " << m.cols() << "\n";
    // Array format is column-major by definition.
    for (Index j = 0; j < m.cols(); ++j)
        for (Index i = 0; i < m.rows(); ++i) os << format_value(m(i, j)) << "\n";
}

void write_sparse(std::ostream& os, const SparseMatrix& m) {
    os << "%%MatrixMarket matrix coordinate real general\n";
    os << m.rows() << " " << m.cols() << " " << m.nnz() << "\n";
    const auto& off = m.row_offsets();
    const auto& col = m.col_indices();
    const auto& val = m.values();
    for (Index i = 0; i < m.rows(); ++i)
        for (Index k = off[static_cast<size_t>(i)]; k < off[static_cast<size_t>(i) + 1]; ++k)
            os << (i + 1) << " " << (col[static_cast<size_t>(k)] + 1) << " "
               << format_value(val[static_cast<size_t>(k)]) << "\n";
}

void write_vector(std::ostream& os, const Vector& v) {
    os << "%%MatrixMarket matrix array real general\n";
    os << v.size() << " 1\n";
    for (Index i = 0; i < v.size(); ++i) os << format_value(v[i]) << "\n";
}

DenseMatrix read_dense(std::istream& is) {
    const Header h = parse_header(is, "read_dense");
    std::istringstream sizes(next_data_line(is));
    Index rows = -1, cols = -1, nnz = -1;
    if (h.coordinate) {
        if (!(sizes >> rows >> cols >> nnz)) throw std::runtime_error("read_dense: bad size line");
    } else {
        if (!(sizes >> rows >> cols)) throw std::runtime_error("read_dense: bad size line");
    }
    if (rows < 0 || cols < 0) throw std::runtime_error("read_dense: negative dimensions");
    DenseMatrix m(rows, cols);
    if (h.coordinate) {
        for (Index k = 0; k < nnz; ++k) {
            std::istringstream entry(next_data_line(is));
            Index i, j;
            double v;
            if (!(entry >> i >> j >> v)) throw std::runtime_error("read_dense: truncated entries");
            if (i < 1 || i > rows || j < 1 || j > cols)
                throw std::runtime_error("read_dense: entry out of range");
            m(i - 1, j - 1) += v;
            if (h.symmetric && i != j) m(j - 1, i - 1) += v;
        }
    } else {
        const Index upper = h.symmetric ? 0 : -1;  // symmetric array stores lower triangle
        for (Index j = 0; j < cols; ++j)
            for (Index i = (upper == 0 ? j : 0); i < rows; ++i) {
                std::istringstream entry(next_data_line(is));
                double v;
                if (!(entry >> v)) throw std::runtime_error("read_dense: truncated entries");
                m(i, j) = v;
                if (h.symmetric && i != j) m(j, i) = v;
            }
    }
    return m;
}

SparseMatrix read_sparse(std::istream& is) {
    // Round-tripping through dense is fine at the file sizes this project
    // handles; the CSR invariants are re-validated on construction.
    return SparseMatrix::from_dense(read_dense(is));
}

Vector read_vector(std::istream& is) {
    DenseMatrix m = read_dense(is);
    if (m.cols() == 1) {
        Vector v(m.rows());
        for (Index i = 0; i < m.rows(); ++i) v[i] = m(i, 0);
        return v;
    }
    if (m.rows() == 1) {
        Vector v(m.cols());
        for (Index j = 0; j < m.cols(); ++j) v[j] = m(0, j);
        return v;
    }
    throw std::runtime_error("read_vector: file is not a single row or column");
}

namespace {
std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
    return os;
}
std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open for reading: " + path.string());
    return is;
}
}  // namespace

void write_dense(const std::filesystem::path& path, const DenseMatrix& m) {
    auto os = open_out(path);
    write_dense(os, m);
}
void write_sparse(const std::filesystem::path& path, const SparseMatrix& m) {
    auto os = open_out(path);
    write_sparse(os, m);
}
void write_vector(const std::filesystem::path& path, const Vector& v) {
    auto os = open_out(path);
    write_vector(os, v);
}
DenseMatrix read_dense(const std::filesystem::path& path) {
    auto is = open_in(path);
    return read_dense(is);
}
SparseMatrix read_sparse(const std::filesystem::path& path) {
    auto is = open_in(path);
    return read_sparse(is);
}
Vector read_vector(const std::filesystem::path& path) {
    auto is = open_in(path);
    return read_vector(is);
}

}  // namespace poro::mm
