#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace blindid {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Index = Eigen::Index;

/// Sorted list of 0-based indices (rows, columns, or frequencies).
using IndexSet = std::vector<Index>;

struct Seed {
  std::uint64_t value = 0;

  friend bool operator==(const Seed&, const Seed&) = default;
};

/// Derives an independent sub-stream seed (splitmix64 finalizer).
Seed derive_seed(Seed base, std::uint64_t stream);

/// Relative singular-value threshold used for every rank decision.
///
/// The automatic rule scales with the matrix shape:
/// max(rows, cols) * 2^-45 times the largest singular value.
class RankTolerance {
 public:
  RankTolerance() = default;
  explicit RankTolerance(double relative_threshold);

  static RankTolerance automatic() { return RankTolerance(); }

  bool is_automatic() const { return relative_ == 0.0; }
  double relative_for(Index rows, Index cols) const;

 private:
  double relative_ = 0.0;
};

}  // namespace blindid
