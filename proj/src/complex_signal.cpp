#include "blindid/complex_signal.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/FFT>

#include "blindid/errors.hpp"

namespace blindid {

Seed derive_seed(Seed base, std::uint64_t stream) {
  std::uint64_t z = base.value + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return Seed{z ^ (z >> 31)};
}

RankTolerance::RankTolerance(double relative_threshold) : relative_(relative_threshold) {
  if (!(relative_threshold > 0.0 && relative_threshold < 1.0)) {
    throw InvalidArgument("rank tolerance must lie in (0, 1)");
  }
}

double RankTolerance::relative_for(Index rows, Index cols) const {
  if (!is_automatic()) return relative_;
  return static_cast<double>(std::max<Index>({rows, cols, 1})) * std::ldexp(1.0, -45);
}

// --- DFT ------------------------------------------------------------------

ComplexVector dft(const ComplexVector& x) {
  const Index n = x.size();
  if (n <= 1) return x;
  Eigen::FFT<double> fft;
  ComplexVector out(n);
  fft.fwd(out, x);
  return out / std::sqrt(static_cast<double>(n));
}

ComplexVector idft(const ComplexVector& x) {
  const Index n = x.size();
  if (n <= 1) return x;
  Eigen::FFT<double> fft;  // inverse includes the 1/n factor
  ComplexVector out(n);
  fft.inv(out, x);
  return out * std::sqrt(static_cast<double>(n));
}

ComplexMatrix dft_columns(const ComplexMatrix& m) {
  ComplexMatrix out(m.rows(), m.cols());
  for (Index c = 0; c < m.cols(); ++c) out.col(c) = dft(m.col(c));
  return out;
}

ComplexMatrix idft_columns(const ComplexMatrix& m) {
  ComplexMatrix out(m.rows(), m.cols());
  for (Index c = 0; c < m.cols(); ++c) out.col(c) = idft(m.col(c));
  return out;
}

ComplexMatrix dft_matrix(Index n) {
  return dft_columns(ComplexMatrix::Identity(n, n));
}

// --- convolution ----------------------------------------------------------

namespace {

void require_same_length(const ComplexVector& u, const ComplexVector& v) {
  if (u.size() != v.size()) {
    throw DimensionMismatch("circular convolution needs equal lengths, got " +
                            std::to_string(u.size()) + " and " + std::to_string(v.size()));
  }
}

}  // namespace

ComplexVector circconv_direct(const ComplexVector& u, const ComplexVector& v) {
  require_same_length(u, v);
  const Index n = u.size();
  ComplexVector z = ComplexVector::Zero(n);
  for (Index i = 0; i < n; ++i) {
    Complex acc{0.0, 0.0};
    for (Index j = 0; j < n; ++j) {
      acc += u[j] * v[(i - j + n) % n];
    }
    z[i] = acc;
  }
  return z;
}

ComplexVector circconv_fft(const ComplexVector& u, const ComplexVector& v) {
  require_same_length(u, v);
  const double scale = std::sqrt(static_cast<double>(u.size()));
  ComplexVector product = dft(u).cwiseProduct(dft(v));
  return scale * idft(product);
}

// --- entrywise ------------------------------------------------------------

ComplexVector entrywise_inverse(const ComplexVector& v, double zero_threshold) {
  ComplexVector out(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    out[i] = std::abs(v[i]) > zero_threshold ? Complex(1.0) / v[i] : Complex(0.0);
  }
  return out;
}

ComplexMatrix entrywise_inverse(const ComplexMatrix& m, double zero_threshold) {
  ComplexMatrix out(m.rows(), m.cols());
  for (Index c = 0; c < m.cols(); ++c) {
    out.col(c) = entrywise_inverse(ComplexVector(m.col(c)), zero_threshold);
  }
  return out;
}

ComplexMatrix kronecker(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

bool all_finite(const ComplexMatrix& m) {
  for (Index c = 0; c < m.cols(); ++c) {
    for (Index r = 0; r < m.rows(); ++r) {
      if (!std::isfinite(m(r, c).real()) || !std::isfinite(m(r, c).imag())) return false;
    }
  }
  return true;
}

ComplexMatrix select_columns(const ComplexMatrix& m, std::span<const Index> cols) {
  ComplexMatrix out(m.rows(), static_cast<Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (cols[i] < 0 || cols[i] >= m.cols()) throw InvalidArgument("column index out of range");
    out.col(static_cast<Index>(i)) = m.col(cols[i]);
  }
  return out;
}

ComplexMatrix select_rows(const ComplexMatrix& m, std::span<const Index> rows) {
  ComplexMatrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= m.rows()) throw InvalidArgument("row index out of range");
    out.row(static_cast<Index>(i)) = m.row(rows[i]);
  }
  return out;
}

// --- rank -----------------------------------------------------------------

Eigen::VectorXd singular_values(const ComplexMatrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return Eigen::VectorXd(0);
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  return svd.singularValues();
}

namespace {

Index rank_from_singular_values(const Eigen::VectorXd& sv, double relative) {
  if (sv.size() == 0 || sv[0] <= 0.0) return 0;
  const double cutoff = relative * sv[0];
  Index r = 0;
  while (r < sv.size() && sv[r] > cutoff) ++r;
  return r;
}

}  // namespace

Index numerical_rank(const ComplexMatrix& m, RankTolerance tol) {
  return rank_from_singular_values(singular_values(m), tol.relative_for(m.rows(), m.cols()));
}

// --- subspaces ------------------------------------------------------------

SubspaceBasis::SubspaceBasis(ComplexMatrix columns, Index ambient)
    : columns_(std::move(columns)), ambient_(ambient) {
  if (columns_.rows() != ambient_) {
    throw DimensionMismatch("basis rows do not match the ambient dimension");
  }
  if (columns_.cols() > 0) {
    const ComplexMatrix gram = columns_.adjoint() * columns_;
    const double dev =
        (gram - ComplexMatrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
    if (dev > 1e-10) throw InvalidArgument("basis columns are not orthonormal");
  }
}

SubspaceBasis SubspaceBasis::empty(Index ambient) {
  return SubspaceBasis(ComplexMatrix(ambient, 0), ambient);
}

SubspaceBasis SubspaceBasis::span_of(const ComplexMatrix& m, RankTolerance tol) {
  return range_basis(m, tol);
}

ComplexMatrix SubspaceBasis::projector() const {
  return columns_ * columns_.adjoint();
}

double SubspaceBasis::distance_ratio(const ComplexVector& v) const {
  const double norm = v.norm();
  if (norm == 0.0) return 0.0;
  const ComplexVector residual = v - columns_ * (columns_.adjoint() * v);
  return residual.norm() / norm;
}

SubspaceBasis nullspace_basis(const ComplexMatrix& m, RankTolerance tol) {
  const Index cols = m.cols();
  if (cols == 0) return SubspaceBasis::empty(0);
  if (m.rows() == 0) return SubspaceBasis(ComplexMatrix::Identity(cols, cols), cols);
  Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeFullV);
  const Index r =
      rank_from_singular_values(svd.singularValues(), tol.relative_for(m.rows(), cols));
  return SubspaceBasis(svd.matrixV().rightCols(cols - r), cols);
}

SubspaceBasis range_basis(const ComplexMatrix& m, RankTolerance tol) {
  const Index rows = m.rows();
  if (rows == 0 || m.cols() == 0) return SubspaceBasis::empty(rows);
  Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeThinU);
  const Index r =
      rank_from_singular_values(svd.singularValues(), tol.relative_for(rows, m.cols()));
  return SubspaceBasis(svd.matrixU().leftCols(r), rows);
}

SubspaceBasis orthogonal_complement(const SubspaceBasis& basis, RankTolerance tol) {
  const Index n = basis.ambient();
  if (basis.dimension() == 0) return SubspaceBasis(ComplexMatrix::Identity(n, n), n);
  return nullspace_basis(basis.columns().adjoint(), tol);
}

Index subspace_sum_dimension(std::span<const SubspaceBasis> bases, RankTolerance tol) {
  if (bases.empty()) return 0;
  const Index ambient = bases.front().ambient();
  Index total_cols = 0;
  for (const auto& b : bases) {
    if (b.ambient() != ambient) {
      throw DimensionMismatch("subspaces live in different ambient spaces");
    }
    total_cols += b.dimension();
  }
  ComplexMatrix stacked(ambient, total_cols);
  Index at = 0;
  for (const auto& b : bases) {
    stacked.middleCols(at, b.dimension()) = b.columns();
    at += b.dimension();
  }
  return numerical_rank(stacked, tol);
}

SubspaceBasis subspace_intersection(const SubspaceBasis& a, const SubspaceBasis& b,
                                    RankTolerance tol) {
  if (a.ambient() != b.ambient()) {
    throw DimensionMismatch("subspaces live in different ambient spaces");
  }
  const Index n = a.ambient();
  if (a.dimension() == 0 || b.dimension() == 0) return SubspaceBasis::empty(n);
  const ComplexMatrix eye = ComplexMatrix::Identity(n, n);
  ComplexMatrix stacked(2 * n, n);
  stacked.topRows(n) = eye - a.projector();
  stacked.bottomRows(n) = eye - b.projector();
  // Singular values lie in [0, sqrt 2]; the cutoff is absolute.
  Eigen::JacobiSVD<ComplexMatrix> svd(stacked, Eigen::ComputeFullV);
  const double cutoff = tol.relative_for(2 * n, n);
  Index r = 0;
  while (r < n && svd.singularValues()[r] > cutoff) ++r;
  return SubspaceBasis(svd.matrixV().rightCols(n - r), n);
}

}  // namespace blindid
