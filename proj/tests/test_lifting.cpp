#include <doctest.h>

#include <set>
#include <sstream>

#include "blindid/complex_signal.hpp"
#include "blindid/errors.hpp"
#include "blindid/lifting.hpp"
#include "blindid/model_builder.hpp"
#include "oracles.hpp"

using namespace blindid;
using oracle::rel_err;

namespace {

IndexSet range(Index lo, Index hi) {
  IndexSet out;
  for (Index i = lo; i < hi; ++i) out.push_back(i);
  return out;
}

bool labels_unique(const std::vector<ColumnLabel>& labels) {
  std::set<std::pair<Index, Index>> seen;
  for (const auto& l : labels)
    if (!seen.insert({l.j, l.k}).second) return false;
  return true;
}

}  // namespace

TEST_CASE("rank-one lifting stacks columns of x y^T") {
  ComplexVector x(2), y(3);
  x << 1, 2;
  y << 10, 20, 30;
  ComplexVector expected(6);
  expected << 10, 20, 20, 40, 30, 60;
  CHECK((lift_rank_one(x, y) - expected).norm() == 0.0);
}

TEST_CASE("identity frames give cyclic shifts") {
  const ComplexMatrix id = ComplexMatrix::Identity(2, 2);
  const LiftedOperator op = build_lifted_operator(id, id);
  ComplexMatrix expected(2, 4);
  expected << 1, 0, 0, 1, 0, 1, 1, 0;
  CHECK((op.G() - expected).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(numerical_rank(op.G()) == 2);
}

TEST_CASE("lifted operator reproduces bilinear convolution") {
  oracle::Rng rng(40);
  for (int t = 0; t < 100; ++t) {
    const Index n = rng.index(1, 32), m1 = rng.index(1, 5), m2 = rng.index(1, 5);
    const ComplexMatrix D = rng.matrix(n, m1), E = rng.matrix(n, m2);
    const ComplexVector x = rng.vector(m1), y = rng.vector(m2);
    const LiftedOperator op = build_lifted_operator(D, E);
    REQUIRE(op.G().rows() == n);
    REQUIRE(op.G().cols() == m1 * m2);
    const ComplexVector expected = oracle::cyclic_sum(D * x, E * y);
    CHECK(rel_err(op.apply(lift_rank_one(x, y)), expected) < 1e-10);
  }
}

TEST_CASE("column order contract") {
  oracle::Rng rng(41);
  for (Index n : {3, 8, 16}) {
    const ComplexMatrix D = rng.matrix(n, 3), E = rng.matrix(n, 2);
    const LiftedOperator op = build_lifted_operator(D, E);
    for (Index k = 0; k < 2; ++k)
      for (Index j = 0; j < 3; ++j) {
        CHECK(op.column_index(j, k) == k * 3 + j);
        const ComplexVector expected = circconv_fft(D.col(j), E.col(k));
        CHECK((op.G().col(op.column_index(j, k)) - expected).norm() < 1e-12 * expected.norm());
      }
  }
}

TEST_CASE("bilinearity and scaling ambiguity") {
  oracle::Rng rng(42);
  for (int t = 0; t < 30; ++t) {
    const ComplexMatrix D = rng.matrix(12, 3), E = rng.matrix(12, 4);
    const LiftedOperator op = build_lifted_operator(D, E);
    const ComplexVector x = rng.vector(3), y = rng.vector(4);
    const Complex a = rng.gauss(), b = rng.gauss();
    const ComplexVector base = op.apply(lift_rank_one(x, y));
    CHECK(rel_err(op.apply(lift_rank_one(a * x, b * y)), a * b * base) < 1e-12);
    const Complex sigma = rng.gauss();
    CHECK(rel_err(op.apply(lift_rank_one(sigma * x, y / sigma)), base) < 1e-12);
  }
}

TEST_CASE("construction limits") {
  CHECK_THROWS_AS(build_lifted_operator(ComplexMatrix::Ones(3, 2), ComplexMatrix::Ones(4, 2)),
                  DimensionMismatch);
  CHECK_THROWS_AS(build_lifted_operator(ComplexMatrix::Ones(500, 200), ComplexMatrix::Ones(500, 200)),
                  OperatorTooLarge);
}

TEST_CASE("full column rank at and below m1 m2") {
  const StructuredPair p = kronecker_structured_pair(6, 2, 3, Seed{1});
  CHECK(full_column_rank(build_lifted_operator(p.D, p.E)));

  for (std::uint64_t s = 0; s < 200; ++s) {
    const ComplexMatrix D = sample_generic_matrix(12, 3, Seed{s});
    const ComplexMatrix E = sample_generic_matrix(12, 4, derive_seed(Seed{s}, 1));
    const LiftedOperator op = build_lifted_operator(D, E);
    CHECK(full_column_rank(op));
    CHECK(oracle::qr_rank(op.G()) == 12);
  }
  oracle::Rng rng(43);
  for (int t = 0; t < 50; ++t) {
    const Index m1 = rng.index(1, 4), m2 = rng.index(1, 4);
    if (m1 * m2 < 2) continue;
    const Index n = rng.index(1, m1 * m2 - 1);
    const LiftedOperator op = build_lifted_operator(rng.matrix(n, m1), rng.matrix(n, m2));
    CHECK(numerical_rank(op.G()) <= n);
    CHECK_FALSE(full_column_rank(op));
  }
}

TEST_CASE("support pattern bookkeeping") {
  const SupportPattern p{{0, 2}, {2, 3}, IndexSet{1}, IndexSet{0}};
  CHECK(p.s1() == 2);
  CHECK(p.t1() == 1);
  CHECK(p.s2() == 1);
  CHECK(p.t2() == 0);
  CHECK(p.to_string() == "J0={0,2};J={2,3};K0={1};K={0}");
  CHECK(SupportPattern{{1}, {0}, {}, {}}.to_string() == "J0={1};J={0}");
}

TEST_CASE("mixed block columns") {
  oracle::Rng rng(44);
  const ComplexMatrix D = rng.matrix(8, 4), E = rng.matrix(8, 2);

  const BlockColumns same = mixed_block_columns(D, E, {1, 3}, {1, 3});
  CHECK(same.columns.cols() == 4);
  const IndexSet sub{1, 3};
  const LiftedOperator restricted = build_lifted_operator(select_columns(D, sub), E);
  CHECK(numerical_rank(same.columns) == 4);
  // Same columns as G for D restricted to J0, up to relabelling.
  CHECK(subspace_sum_dimension(std::vector<SubspaceBasis>{SubspaceBasis::span_of(same.columns),
                                                          SubspaceBasis::span_of(restricted.G())}) ==
        4);

  const BlockColumns disjoint = mixed_block_columns(D, E, {0}, {2});
  CHECK(disjoint.columns.cols() == 4);
  CHECK(labels_unique(disjoint.labels));

  for (std::uint64_t s = 0; s < 20; ++s) {
    const ComplexMatrix Dg = sample_generic_matrix(8, 3, Seed{s});
    const ComplexMatrix Eg = sample_generic_matrix(8, 2, Seed{s + 100});
    const BlockColumns b = mixed_block_columns(Dg, Eg, {0, 1}, {1, 2});
    CHECK(b.columns.cols() == 6);
    CHECK(labels_unique(b.labels));
    CHECK(verify_block_independence(b.columns));
    CHECK(oracle::qr_rank(b.columns) == 6);
  }

  CHECK_THROWS_AS(mixed_block_columns(D, E, {0, 1}, {2}), BadSupportSizes);
  CHECK_THROWS_AS(mixed_block_columns(D, E, {0, 0}, {1, 2}), BadSupportSizes);
  CHECK_THROWS_AS(mixed_block_columns(D, E, {0, 9}, {1, 2}), BadSupportSizes);
}

TEST_CASE("sparsity block column count") {
  CHECK(sparsity_block_column_count(2, 2, 2, 2) == 4);
  CHECK(sparsity_block_column_count(1, 0, 1, 0) == 2);
  CHECK(sparsity_block_column_count(2, 0, 2, 0) == 8);

  oracle::Rng rng(45);
  const ComplexMatrix D = rng.matrix(10, 4), E = rng.matrix(10, 4);
  const LiftedOperator op = build_lifted_operator(D, E);
  for (Index t1 = 0; t1 <= 2; ++t1) {
    for (Index t2 = 0; t2 <= 2; ++t2) {
      const SupportPattern p{range(0, 2), [&] {
                               IndexSet j = range(0, t1);
                               for (Index i = 2; i < 4 - t1; ++i) j.push_back(i);
                               return j;
                             }(),
                             range(0, 2), [&] {
                               IndexSet k = range(0, t2);
                               for (Index i = 2; i < 4 - t2; ++i) k.push_back(i);
                               return k;
                             }()};
      REQUIRE(p.t1() == t1);
      REQUIRE(p.t2() == t2);
      const BlockColumns b = sparsity_block_columns(op, p);
      CHECK(b.columns.cols() == sparsity_block_column_count(2, t1, 2, t2));
      CHECK(labels_unique(b.labels));
    }
  }
  const BlockColumns single = sparsity_block_columns(op, {{0, 1}, {0, 1}, IndexSet{2, 3}, IndexSet{2, 3}});
  CHECK(single.columns.cols() == 4);
  CHECK_THROWS_AS(sparsity_block_columns(op, {{0}, {1}, {}, {}}), BadSupportSizes);
}

TEST_CASE("block independence") {
  oracle::Rng rng(46);
  ComplexMatrix m = rng.matrix(6, 3);
  CHECK(verify_block_independence(m));
  m.col(2) = m.col(0);
  CHECK_FALSE(verify_block_independence(m));

  const ThreeBlockWitness w = three_block_structured_frames(8, 2, 2, 0, 0, Seed{3});
  const BlockColumns b = sparsity_block_columns(w.D, w.E, {w.J0, w.J, w.K0, w.K});
  CHECK(b.columns.cols() == 8);
  CHECK(verify_block_independence(b.columns));

  for (std::uint64_t s = 0; s < 200; ++s) {
    const ComplexMatrix D = sample_generic_matrix(8, 4, Seed{s});
    const ComplexMatrix E = sample_generic_matrix(8, 4, derive_seed(Seed{s}, 1));
    const BlockColumns g = sparsity_block_columns(D, E, {{0, 1}, {2, 3}, IndexSet{0, 1}, IndexSet{2, 3}});
    CHECK(verify_block_independence(g.columns));
  }
}

TEST_CASE("block labels sidecar") {
  std::ostringstream os;
  write_block_labels(os, {{0, 1}, {2, 0}});
  CHECK(os.str() == "0 1\n2 0\n");
}
