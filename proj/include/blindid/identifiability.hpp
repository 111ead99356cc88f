#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "blindid/complex_signal.hpp"
#include "blindid/lifting.hpp"
#include "blindid/model_builder.hpp"
#include "blindid/types.hpp"

namespace blindid {

enum class Verdict { certified, not_certified, refuted };

std::string to_string(Verdict v);

/// One sub-check: what was required, what was found.
struct CheckRecord {
  std::string pattern;
  Index required = 0;
  Index found = 0;
  bool pass = false;
};

/// Second solution (x2, y2) reproducing z = (D x0) (*) (E y0).
struct CounterexampleWitness {
  ComplexVector w0;  // entrywise inverse of y0
  ComplexVector w1;  // null vector independent of w0
  Complex alpha;
  ComplexVector x2;
  ComplexVector y2;
  double residual = 0.0;           // ||(D x2)(*)(E y2) - z|| / ||z||
  double collinearity_sine = 0.0;  // sine of the angle between y2 and y0
  double solve_residual = 0.0;     // relative residual of the x2 least-squares step
};

struct IdentifiabilityReport {
  Verdict verdict = Verdict::not_certified;
  std::string criterion;
  std::vector<CheckRecord> details;
  std::optional<CounterexampleWitness> witness;
  /// Unordered support pairs skipped because the certificate is symmetric.
  Index symmetric_patterns_skipped = 0;

  bool all_passed() const;
};

/// Turns a not-certified report into a refutation carrying `witness`.
/// Throws InvalidArgument unless the witness satisfies every witness invariant.
IdentifiabilityReport refute(IdentifiabilityReport report, CounterexampleWitness witness);

/// Whether (x, y) equals (sigma x0, y0 / sigma) for some nonzero sigma.
struct ScalingEquivalence {
  bool equivalent = false;
  std::optional<Complex> sigma;
};

/// Equivalent iff ||x y^T - x0 y0^T||_F <= tol ||x0 y0^T||_F. Throws
/// ZeroReference if x0 or y0 is zero.
ScalingEquivalence equivalent_up_to_scaling(const ComplexVector& x, const ComplexVector& y,
                                            const ComplexVector& x0, const ComplexVector& y0,
                                            double tol = 1e-8);

/// Combination caps for the support enumerations.
inline constexpr double kMaxMixedPatterns = 1e5;
inline constexpr double kMaxSparsityPatterns = 1e6;
inline constexpr double kMaxSubbandSupports = 1e5;

/// Certified iff G_DE has full column rank (every nonzero pair identifiable).
IdentifiabilityReport check_subspace(const ComplexMatrix& D, const ComplexMatrix& E,
                                     RankTolerance tol = {});

/// Certified iff every support pair (J0, J) with |J0| = |J| = s1 yields
/// independent mixed blocks.
IdentifiabilityReport check_mixed(const ComplexMatrix& D, const ComplexMatrix& E, Index s1,
                                  RankTolerance tol = {});

/// Certified iff every (J0, J, K0, K) yields independent sparsity blocks.
IdentifiabilityReport check_sparsity(const ComplexMatrix& D, const ComplexMatrix& E, Index s1,
                                     Index s2, RankTolerance tol = {});

struct SubbandCertificate {
  Index bandwidth_sum = 0;
  Index threshold = 0;
  Index condition2_rank = 0;
  std::vector<Index> subspace_dims;  // dim V_k
  Index total_sum_dim = 0;           // dim(span(x0) + sum V_k)
  Index ambient = 0;                 // m1

  bool valid(Index m2) const;
};

struct SubbandResult {
  IdentifiabilityReport report;
  SubbandCertificate certificate;
};

/// Sub-band certificate for one (x0, y0): bandwidth sum, rank of
/// diag(F D x0) F E, and span(x0) + sum_k V_k = C^m1 with
/// V_k = range((F D)(passband_k, :)^*) n x0-perp.
/// Throws PreconditionViolated for zero x0 or a vanishing y0.
SubbandResult check_subband(const ComplexMatrix& D, const SubBandBasis& basis,
                            const ComplexVector& x0, const ComplexVector& y0,
                            RankTolerance tol = {});

/// Sparse-x0 variant: the sum certificate must hold on columns K0 u K for
/// every support K of size s1 (K0 = support of x0).
IdentifiabilityReport check_subband_mixed(const ComplexMatrix& D, const SubBandBasis& basis,
                                          const ComplexVector& x0, Index s1,
                                          const ComplexVector& y0, RankTolerance tol = {});

/// Explicit second solution for a partitioned sub-band basis below the
/// sample-complexity bound n < m1 + m2 - 1.
///
/// Steps: annihilate range(F D), build the (n - m1) x m2 map
/// w -> Dperp^* diag(Einv w) diag(F E y0) F D x0, pick a null vector w1
/// independent of w0 = 1 / y0, set y2 = 1 / (w0 + alpha w1) and solve
/// F D x2 = diag(Einv (w0 + alpha w1)) diag(F E y0) F D x0.
CounterexampleWitness construct_counterexample(const ComplexMatrix& D, const SubBandBasis& basis,
                                               const ComplexVector& x0, const ComplexVector& y0,
                                               RankTolerance tol = {});

/// Counterexample for a sparse x0 with its support treated as known: runs the
/// construction on D restricted to supp(x0) and embeds x2 back into C^m1.
CounterexampleWitness construct_counterexample_known_support(const ComplexMatrix& D,
                                                             const SubBandBasis& basis,
                                                             const ComplexVector& x0,
                                                             const ComplexVector& y0,
                                                             RankTolerance tol = {});

/// Checks the witness invariants, returning a description of the first
/// violation or nullopt.
std::optional<std::string> witness_violation(const CounterexampleWitness& w,
                                             const ComplexVector& y0);

/// Nullspace of G_DE for small lifted problems (m1 * m2 <= 64).
SubspaceBasis nullspace_oracle_small(const ComplexMatrix& D, const ComplexMatrix& E,
                                     RankTolerance tol = {});

/// Text form: "verdict=...", "criterion=...", then one line per sub-check
/// "pattern=<sets> required=<r> found=<r'> pass|fail".
void write_report(std::ostream& os, const IdentifiabilityReport& report);

/// w0.mat, w1.mat, x2.mat, y2.mat and alpha.txt in `dir`.
void save_witness(const std::filesystem::path& dir, const CounterexampleWitness& witness);

}  // namespace blindid
