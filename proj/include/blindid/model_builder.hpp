#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "blindid/complex_signal.hpp"
#include "blindid/types.hpp"

namespace blindid {

enum class ConstraintKind { subspace, sparse };

/// Constraint on one factor. sparsity_level is set iff kind == sparse.
struct ConstraintSpec {
  ConstraintKind kind = ConstraintKind::subspace;
  std::optional<Index> sparsity_level;

  static ConstraintSpec subspace() { return {}; }
  static ConstraintSpec sparse(Index s) { return {ConstraintKind::sparse, s}; }
};

/// One blind deconvolution problem: find (x, y) with (D x) (*) (E y) = z.
struct BDInstance {
  ComplexMatrix D;  // n x m1
  ComplexMatrix E;  // n x m2
  ConstraintSpec x_constraint;
  ConstraintSpec y_constraint;

  Index n() const { return D.rows(); }
  Index m1() const { return D.cols(); }
  Index m2() const { return E.cols(); }
};

/// Checks finiteness, shapes, sparsity levels and (for subspace factors) full
/// column rank. n < max(m1, m2) is allowed for sparse factors.
void validate_instance(const BDInstance& instance, RankTolerance tol = {});

/// Spectral magnitudes below this count as zero when detecting supports.
inline constexpr double kSupportThreshold = 1e-12;

/// Basis whose columns occupy distinct frequency sub-bands.
///
/// spectra() is F_n E with sub-threshold entries set to exactly zero;
/// supports()[k] is the support of column k and passbands()[k] the part of
/// it not shared with any other column.
class SubBandBasis {
 public:
  const ComplexMatrix& E() const { return E_; }
  const ComplexMatrix& spectra() const { return spectra_; }
  const std::vector<IndexSet>& supports() const { return supports_; }
  const std::vector<IndexSet>& passbands() const { return passbands_; }
  const std::vector<Index>& bandwidths() const { return bandwidths_; }

  Index n() const { return E_.rows(); }
  Index m2() const { return E_.cols(); }
  Index bandwidth_sum() const;
  /// Supports pairwise disjoint and covering every frequency.
  bool is_partition() const;

 private:
  friend SubBandBasis subband_basis_from_supports(Index n,
                                                  const std::vector<ComplexVector>& spectra);

  ComplexMatrix E_;
  ComplexMatrix spectra_;
  std::vector<IndexSet> supports_;
  std::vector<IndexSet> passbands_;
  std::vector<Index> bandwidths_;
};

/// i.i.d. (g1 + i g2)/sqrt(2) entries, g1, g2 standard normal.
ComplexMatrix sample_generic_matrix(Index n, Index m, Seed seed);
ComplexVector sample_generic_vector(Index n, Seed seed);

/// Generic vector with every entry of magnitude at least min_magnitude.
ComplexVector sample_nonvanishing_vector(Index n, Seed seed, double min_magnitude = 0.1);

/// Exactly s nonzeros on a uniformly random support.
ComplexVector sample_sparse_vector(Index m, Index s, Seed seed);

/// Pair (D, E) whose lifted operator is block diagonal on its first m1*m2
/// frequency rows: the leading rows of F_n E are I_{m2} (x) 1_{m1 x 1}, the
/// rest and all of F_n D are generic.
struct StructuredPair {
  ComplexMatrix D;
  ComplexMatrix E;
  ComplexMatrix D_spectrum;
  ComplexMatrix E_spectrum;
};
StructuredPair kronecker_structured_pair(Index n, Index m1, Index m2, Seed seed);

/// Frames for the seven-block independence witness with overlaps t1, t2.
///
/// D = [D0 D1 D2] has t1 + 2(s1 - t1) generic columns. E = [E0 E1 E2] has
/// t2 + 2(s2 - t2) columns whose first 2 s1 s2 spectral rows place
/// I (x) 1 patterns in three disjoint row blocks. The pattern selects
/// J0 = D0 u D1, J = D0 u D2, K0 = E0 u E1, K = E0 u E2.
struct ThreeBlockWitness {
  ComplexMatrix D;
  ComplexMatrix E;
  ComplexMatrix E_spectrum;
  IndexSet J0, J, K0, K;
};
ThreeBlockWitness three_block_structured_frames(Index n, Index s1, Index s2, Index t1, Index t2,
                                                Seed seed);

/// Builds E = F_n^{-1} [spectra...] and derives supports, passbands and
/// bandwidths. Throws ZeroColumn or EmptyPassband.
SubBandBasis subband_basis_from_supports(Index n, const std::vector<ComplexVector>& spectra);

/// Same, starting from a time-domain E (spectra computed as F_n E).
SubBandBasis subband_basis_from_matrix(const ComplexMatrix& E);

/// Contiguous disjoint bands of the given widths covering {0..n-1}, with
/// in-band spectral values of magnitude at least 0.1.
SubBandBasis partitioned_subband_basis(Index n, const std::vector<Index>& bandwidths, Seed seed);

/// Near-even split of n frequencies into m2 bands, wider bands first.
std::vector<Index> even_bandwidths(Index n, Index m2);

/// True iff every set of 2s columns has numerical rank 2s (spark(D) > 2s).
/// Exhaustive; throws EnumerationTooLarge when C(cols, 2s) > 1e6.
bool verify_spark_condition(const ComplexMatrix& D, Index s, RankTolerance tol = {});

/// C(n, k) saturating at a large value.
double binomial(Index n, Index k);

/// Lexicographic enumeration of all k-subsets of {0..n-1}.
std::vector<IndexSet> k_subsets(Index n, Index k);

// Instance directories: D.mat, E.mat, instance.cfg and optional x0.mat, y0.mat.

struct InstanceFiles {
  BDInstance instance;
  std::string y_kind;  // "subspace", "sparse" or "subband"
  Seed seed;
  std::optional<ComplexVector> x0;
  std::optional<ComplexVector> y0;
};

void save_instance(const std::filesystem::path& dir, const InstanceFiles& files);
/// Throws ParseError on malformed files.
InstanceFiles load_instance(const std::filesystem::path& dir);

}  // namespace blindid
