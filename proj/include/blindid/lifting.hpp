#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "blindid/complex_signal.hpp"
#include "blindid/types.hpp"

namespace blindid {

/// vec(x y^T): columns of the outer product stacked top to bottom, so entry
/// k*m1 + j holds x[j] * y[k].
ComplexVector lift_rank_one(const ComplexVector& x, const ComplexVector& y);

/// The n x (m1*m2) matrix G_DE with G_DE vec(x y^T) = (D x) (*) (E y).
///
/// Column k*m1 + j holds D(:,j) (*) E(:,k). Construction checks this identity
/// on 20 random rank-one inputs against the direct convolution.
class LiftedOperator {
 public:
  const ComplexMatrix& G() const { return G_; }
  Index n() const { return G_.rows(); }
  Index m1() const { return m1_; }
  Index m2() const { return m2_; }
  Index column_index(Index j, Index k) const { return k * m1_ + j; }

  ComplexVector apply(const ComplexVector& vec_m) const { return G_ * vec_m; }

 private:
  friend LiftedOperator build_lifted_operator(const ComplexMatrix& D, const ComplexMatrix& E);

  ComplexMatrix G_;
  Index m1_ = 0;
  Index m2_ = 0;
};

/// Dense storage cap on n*m1*m2.
inline constexpr double kMaxLiftedEntries = 1e7;

LiftedOperator build_lifted_operator(const ComplexMatrix& D, const ComplexMatrix& E);

bool full_column_rank(const LiftedOperator& op, RankTolerance tol = {});

/// Supports of a competing pair of sparse solutions. K0/K are set only for
/// the doubly sparse case.
struct SupportPattern {
  IndexSet J0;
  IndexSet J;
  std::optional<IndexSet> K0;
  std::optional<IndexSet> K;

  Index s1() const { return static_cast<Index>(J0.size()); }
  Index t1() const;
  Index s2() const { return K0 ? static_cast<Index>(K0->size()) : 0; }
  Index t2() const;

  std::string to_string() const;
};

/// (j, k) pair behind one selected column of G_DE.
struct ColumnLabel {
  Index j;
  Index k;
  friend bool operator==(const ColumnLabel&, const ColumnLabel&) = default;
};

struct BlockColumns {
  ComplexMatrix columns;
  std::vector<ColumnLabel> labels;
};

/// [G_{D0 E}, G_{D1 E}, G_{D2 E}] with D0 = D(:, J0 n J), D1 = D(:, J0 \ J),
/// D2 = D(:, J \ J0). Throws BadSupportSizes if |J0| != |J|.
BlockColumns mixed_block_columns(const ComplexMatrix& D, const ComplexMatrix& E,
                                 const IndexSet& J0, const IndexSet& J);
BlockColumns mixed_block_columns(const LiftedOperator& op, const IndexSet& J0, const IndexSet& J);

/// The seven blocks D0E0, D1E0, D2E0, D0E1, D1E1, D0E2, D2E2 (the pairs
/// D1E2 and D2E1 never appear).
BlockColumns sparsity_block_columns(const ComplexMatrix& D, const ComplexMatrix& E,
                                    const SupportPattern& pattern);
BlockColumns sparsity_block_columns(const LiftedOperator& op, const SupportPattern& pattern);

/// (2 s1 - t1)(2 s2 - t2) - 2 (s1 - t1)(s2 - t2).
Index sparsity_block_column_count(Index s1, Index t1, Index s2, Index t2);

bool verify_block_independence(const ComplexMatrix& blocks, RankTolerance tol = {});

/// One "j k" line per column.
void write_block_labels(std::ostream& os, const std::vector<ColumnLabel>& labels);

}  // namespace blindid
