#include <doctest.h>

#include <sstream>

#include "poro/matrix_market.hpp"
#include "poro/rng.hpp"

using namespace poro;

TEST_CASE("dense array round trip is bit exact") {
    SplitMix64 rng(1);
    DenseMatrix m = random_matrix(rng, 7, 4);
    m(2, 3) = 1.0 / 3.0;
    m(0, 0) = 1e-300;
    std::stringstream ss;
    mm::write_dense(ss, m);
    DenseMatrix back = mm::read_dense(ss);
    REQUIRE(back.rows() == m.rows());
    REQUIRE(back.cols() == m.cols());
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) CHECK(back(i, j) == m(i, j));
}

TEST_CASE("coordinate round trip is bit exact") {
    SplitMix64 rng(2);
    DenseMatrix dense(20, 15);
    for (Index i = 0; i < dense.rows(); ++i)
        for (Index j = 0; j < dense.cols(); ++j)
            if (rng.next_double() < 0.2) dense(i, j) = rng.uniform(-10.0, 10.0);
    SparseMatrix m = SparseMatrix::from_dense(dense);
    std::stringstream ss;
    mm::write_sparse(ss, m);
    SparseMatrix back = mm::read_sparse(ss);
    CHECK(back.rows() == m.rows());
    CHECK(back.cols() == m.cols());
    CHECK(back.row_offsets() == m.row_offsets());
    CHECK(back.col_indices() == m.col_indices());
    CHECK(back.values() == m.values());
}

TEST_CASE("vector round trip") {
    Vector v{1.0, -2.5, 1.0 / 7.0, 1e-17};
    std::stringstream ss;
    mm::write_vector(ss, v);
    Vector back = mm::read_vector(ss);
    REQUIRE(back.size() == v.size());
    for (Index i = 0; i < v.size(); ++i) CHECK(back[i] == v[i]);
}

TEST_CASE("symmetric coordinate files are expanded") {
    std::stringstream ss;
    ss << "%%MatrixMarket matrix coordinate real symmetric\n";
    ss << "% comment line\n";
    ss << "2 2 2\n1 1 4.0\n2 1 -1.0\n";
    DenseMatrix m = mm::read_dense(ss);
    CHECK(m(0, 0) == 4.0);
    CHECK(m(0, 1) == -1.0);
    CHECK(m(1, 0) == -1.0);
    CHECK(m(1, 1) == 0.0);
}

TEST_CASE("malformed headers are rejected") {
    std::stringstream bad1("not a header\n1 1\n1.0\n");
    CHECK_THROWS(mm::read_dense(bad1));
    std::stringstream bad2("%%MatrixMarket matrix array complex general\n1 1\n1.0 0.0\n");
    CHECK_THROWS(mm::read_dense(bad2));
    std::stringstream truncated("%%MatrixMarket matrix array real general\n2 2\n1.0\n");
    CHECK_THROWS(mm::read_dense(truncated));
}
