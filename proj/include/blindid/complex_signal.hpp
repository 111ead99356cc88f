#pragma once

#include <span>

#include "blindid/types.hpp"

namespace blindid {

// ---------------------------------------------------------------------------
// Normalized DFT
//
// F_n has entries exp(-2*pi*i*j*k/n) / sqrt(n) and is unitary, so
// idft(dft(x)) == x and circular convolution becomes
//   u (*) v = sqrt(n) * F_n^* (F_n u .* F_n v).
// ---------------------------------------------------------------------------

ComplexVector dft(const ComplexVector& x);
ComplexVector idft(const ComplexVector& x);

/// Column-wise transforms: dft_columns(D) == F_n * D.
ComplexMatrix dft_columns(const ComplexMatrix& m);
ComplexMatrix idft_columns(const ComplexMatrix& m);

/// Explicit n x n normalized DFT matrix.
ComplexMatrix dft_matrix(Index n);

/// z[i] = sum_j u[j] v[(i - j) mod n], by the double loop.
ComplexVector circconv_direct(const ComplexVector& u, const ComplexVector& v);

/// Same product through the DFT diagonalization.
ComplexVector circconv_fft(const ComplexVector& u, const ComplexVector& v);

/// Reciprocal of every entry whose magnitude exceeds zero_threshold; other
/// entries become exactly zero.
ComplexVector entrywise_inverse(const ComplexVector& v, double zero_threshold = 0.0);
ComplexMatrix entrywise_inverse(const ComplexMatrix& m, double zero_threshold = 0.0);

ComplexMatrix kronecker(const ComplexMatrix& a, const ComplexMatrix& b);

bool all_finite(const ComplexMatrix& m);

/// Columns of m selected by index, in the given order.
ComplexMatrix select_columns(const ComplexMatrix& m, std::span<const Index> cols);
ComplexMatrix select_rows(const ComplexMatrix& m, std::span<const Index> rows);

/// Singular values in decreasing order.
Eigen::VectorXd singular_values(const ComplexMatrix& m);

/// Number of singular values strictly above tol * sigma_max.
Index numerical_rank(const ComplexMatrix& m, RankTolerance tol = {});

// ---------------------------------------------------------------------------
// Subspaces
// ---------------------------------------------------------------------------

/// Orthonormal column basis of a subspace of C^ambient. May be empty.
class SubspaceBasis {
 public:
  /// Validates orthonormality (Gram vs identity, max abs deviation 1e-10).
  SubspaceBasis(ComplexMatrix columns, Index ambient);

  static SubspaceBasis empty(Index ambient);
  /// Orthonormal basis for the column span of m.
  static SubspaceBasis span_of(const ComplexMatrix& m, RankTolerance tol = {});

  const ComplexMatrix& columns() const { return columns_; }
  Index ambient() const { return ambient_; }
  Index dimension() const { return columns_.cols(); }

  /// Orthogonal projector onto the subspace.
  ComplexMatrix projector() const;
  /// Relative distance of v from the subspace: ||v - P v|| / ||v||.
  double distance_ratio(const ComplexVector& v) const;

 private:
  ComplexMatrix columns_;
  Index ambient_;
};

/// Orthonormal basis of {w : M w ~ 0}; dimension cols - numerical_rank(M).
SubspaceBasis nullspace_basis(const ComplexMatrix& m, RankTolerance tol = {});

/// Orthonormal basis of the column space of m.
SubspaceBasis range_basis(const ComplexMatrix& m, RankTolerance tol = {});

SubspaceBasis orthogonal_complement(const SubspaceBasis& basis, RankTolerance tol = {});

/// Numerical rank of the horizontal concatenation of all bases.
Index subspace_sum_dimension(std::span<const SubspaceBasis> bases, RankTolerance tol = {});

/// A intersect B, computed as the nullspace of [P_{A-perp}; P_{B-perp}]
/// (equivalently, the complement of A-perp + B-perp).
SubspaceBasis subspace_intersection(const SubspaceBasis& a, const SubspaceBasis& b,
                                    RankTolerance tol = {});

}  // namespace blindid
