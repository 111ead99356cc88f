#include "blindid/identifiability.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "blindid/errors.hpp"
#include "blindid/matrix_io.hpp"

namespace blindid {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::certified:
      return "certified";
    case Verdict::not_certified:
      return "not_certified";
    case Verdict::refuted:
      return "refuted";
  }
  return "unknown";
}

bool IdentifiabilityReport::all_passed() const {
  return std::all_of(details.begin(), details.end(), [](const CheckRecord& r) { return r.pass; });
}

namespace {

std::string set_string(const IndexSet& s) {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << '}';
  return os.str();
}

CheckRecord record(std::string pattern, Index required, Index found) {
  return CheckRecord{std::move(pattern), required, found, found == required};
}

void finish(IdentifiabilityReport& report) {
  report.verdict = report.all_passed() ? Verdict::certified : Verdict::not_certified;
}

void require_same_rows(const ComplexMatrix& D, Index n) {
  if (D.rows() != n) throw DimensionMismatch("D and E must have the same number of rows");
}

void require_nonzero(const ComplexVector& x0) {
  if (x0.size() == 0 || x0.cwiseAbs().maxCoeff() == 0.0) {
    throw PreconditionViolated("x0 is zero");
  }
}

void require_nonvanishing(const ComplexVector& y0) {
  for (Index k = 0; k < y0.size(); ++k) {
    if (y0[k] == Complex(0.0)) {
      throw PreconditionViolated("y0 vanishes at entry " + std::to_string(k));
    }
  }
}

IndexSet support_of(const ComplexVector& v) {
  IndexSet out;
  for (Index i = 0; i < v.size(); ++i) {
    if (v[i] != Complex(0.0)) out.push_back(i);
  }
  return out;
}

ComplexVector restrict_to(const ComplexVector& v, const IndexSet& idx) {
  ComplexVector out(static_cast<Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out[static_cast<Index>(i)] = v[idx[i]];
  return out;
}

struct SumCertificate {
  std::vector<Index> dims;
  Index total = 0;
};

// dim(span(x0) + sum_k V_k) with V_k = range(Dt(passband_k, :)^*) n x0-perp.
SumCertificate subspace_sum_certificate(const ComplexMatrix& Dt, const ComplexVector& x0,
                                        const std::vector<IndexSet>& passbands,
                                        RankTolerance tol) {
  const Index m = Dt.cols();
  const SubspaceBasis x0_span = SubspaceBasis::span_of(x0, tol);
  const SubspaceBasis x0_perp = orthogonal_complement(x0_span, tol);
  std::vector<SubspaceBasis> parts{x0_span};
  SumCertificate out;
  for (const auto& band : passbands) {
    const ComplexMatrix rows = select_rows(Dt, band);
    const SubspaceBasis range = range_basis(rows.adjoint(), tol);
    SubspaceBasis v = subspace_intersection(range, x0_perp, tol);
    out.dims.push_back(v.dimension());
    if (v.dimension() > 0) parts.push_back(std::move(v));
  }
  out.total = m == 0 ? 0 : subspace_sum_dimension(parts, tol);
  return out;
}

Index condition2_rank(const ComplexMatrix& Dt, const SubBandBasis& basis, const ComplexVector& x0,
                      RankTolerance tol) {
  const ComplexVector d = Dt * x0;
  return numerical_rank(d.asDiagonal() * basis.spectra(), tol);
}

void check_subband_shapes(const ComplexMatrix& D, const SubBandBasis& basis,
                          const ComplexVector& x0, const ComplexVector& y0) {
  require_same_rows(D, basis.n());
  if (x0.size() != D.cols()) throw DimensionMismatch("x0 length must equal cols(D)");
  if (y0.size() != basis.m2()) throw DimensionMismatch("y0 length must equal cols(E)");
}

double inf_norm(const ComplexVector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

// --- scaling --------------------------------------------------------------

ScalingEquivalence equivalent_up_to_scaling(const ComplexVector& x, const ComplexVector& y,
                                            const ComplexVector& x0, const ComplexVector& y0,
                                            double tol) {
  if (x.size() != x0.size() || y.size() != y0.size()) {
    throw DimensionMismatch("candidate and reference lengths differ");
  }
  if (x0.squaredNorm() == 0.0) throw ZeroReference("x0 is zero");
  if (y0.squaredNorm() == 0.0) throw ZeroReference("y0 is zero");
  const ComplexMatrix reference = x0 * y0.transpose();
  const double gap = (x * y.transpose() - reference).norm();
  ScalingEquivalence out;
  out.equivalent = gap <= tol * reference.norm();
  if (out.equivalent) out.sigma = x0.dot(x) / x0.squaredNorm();  // dot conjugates x0
  return out;
}

// --- generic bases --------------------------------------------------------

IdentifiabilityReport check_subspace(const ComplexMatrix& D, const ComplexMatrix& E,
                                     RankTolerance tol) {
  const LiftedOperator op = build_lifted_operator(D, E);
  IdentifiabilityReport report;
  report.criterion = "lifted-full-column-rank";
  report.details.push_back(record("G_DE", op.m1() * op.m2(), numerical_rank(op.G(), tol)));
  finish(report);
  return report;
}

IdentifiabilityReport check_mixed(const ComplexMatrix& D, const ComplexMatrix& E, Index s1,
                                  RankTolerance tol) {
  if (s1 < 1 || s1 > D.cols()) throw InvalidArgument("s1 must lie in [1, m1]");
  const double count = binomial(D.cols(), s1);
  if (count * count > kMaxMixedPatterns) {
    throw EnumerationTooLarge("C(m1, s1)^2 support pairs exceed the 1e5 cap");
  }
  const LiftedOperator op = build_lifted_operator(D, E);
  const auto supports = k_subsets(D.cols(), s1);
  const Index N = static_cast<Index>(supports.size());

  IdentifiabilityReport report;
  report.criterion = "mixed-block-independence";
  for (Index a = 0; a < N; ++a) {
    for (Index b = a; b < N; ++b) {
      const SupportPattern p{supports[static_cast<std::size_t>(a)],
                             supports[static_cast<std::size_t>(b)], std::nullopt, std::nullopt};
      const BlockColumns blocks = mixed_block_columns(op, p.J0, p.J);
      report.details.push_back(
          record(p.to_string(), blocks.columns.cols(), numerical_rank(blocks.columns, tol)));
    }
  }
  report.symmetric_patterns_skipped = N * N - N * (N + 1) / 2;
  finish(report);
  return report;
}

IdentifiabilityReport check_sparsity(const ComplexMatrix& D, const ComplexMatrix& E, Index s1,
                                     Index s2, RankTolerance tol) {
  if (s1 < 1 || s1 > D.cols()) throw InvalidArgument("s1 must lie in [1, m1]");
  if (s2 < 1 || s2 > E.cols()) throw InvalidArgument("s2 must lie in [1, m2]");
  const double cj = binomial(D.cols(), s1);
  const double ck = binomial(E.cols(), s2);
  if (cj * cj * ck * ck > kMaxSparsityPatterns) {
    throw EnumerationTooLarge("C(m1, s1)^2 C(m2, s2)^2 support patterns exceed the 1e6 cap");
  }
  const LiftedOperator op = build_lifted_operator(D, E);
  const auto js = k_subsets(D.cols(), s1);
  const auto ks = k_subsets(E.cols(), s2);
  const Index NJ = static_cast<Index>(js.size());
  const Index NK = static_cast<Index>(ks.size());

  IdentifiabilityReport report;
  report.criterion = "sparsity-block-independence";
  Index kept = 0;
  for (Index a = 0; a < NJ; ++a) {
    for (Index b = 0; b < NJ; ++b) {
      for (Index c = 0; c < NK; ++c) {
        for (Index d = 0; d < NK; ++d) {
          // (J0, J, K0, K) and (J, J0, K, K0) select the same columns.
          if (std::pair(b, d) < std::pair(a, c)) continue;
          ++kept;
          const SupportPattern p{js[static_cast<std::size_t>(a)], js[static_cast<std::size_t>(b)],
                                 ks[static_cast<std::size_t>(c)], ks[static_cast<std::size_t>(d)]};
          const BlockColumns blocks = sparsity_block_columns(op, p);
          report.details.push_back(
              record(p.to_string(), blocks.columns.cols(), numerical_rank(blocks.columns, tol)));
        }
      }
    }
  }
  report.symmetric_patterns_skipped = NJ * NJ * NK * NK - kept;
  finish(report);
  return report;
}

// --- sub-band bases -------------------------------------------------------

bool SubbandCertificate::valid(Index m2) const {
  return bandwidth_sum >= threshold && condition2_rank == m2 && total_sum_dim == ambient;
}

SubbandResult check_subband(const ComplexMatrix& D, const SubBandBasis& basis,
                            const ComplexVector& x0, const ComplexVector& y0, RankTolerance tol) {
  check_subband_shapes(D, basis, x0, y0);
  require_nonzero(x0);
  require_nonvanishing(y0);

  const Index m1 = D.cols();
  const Index m2 = basis.m2();
  const ComplexMatrix Dt = dft_columns(D);

  SubbandResult out;
  auto& cert = out.certificate;
  cert.bandwidth_sum = basis.bandwidth_sum();
  cert.threshold = m1 + m2 - 1;
  cert.condition2_rank = condition2_rank(Dt, basis, x0, tol);
  const SumCertificate sum = subspace_sum_certificate(Dt, x0, basis.passbands(), tol);
  cert.subspace_dims = sum.dims;
  cert.total_sum_dim = sum.total;
  cert.ambient = m1;

  auto& report = out.report;
  report.criterion = "subband-subspace-sum";
  report.details.push_back(CheckRecord{"bandwidth_sum", cert.threshold, cert.bandwidth_sum,
                                       cert.bandwidth_sum >= cert.threshold});
  report.details.push_back(record("condition2_rank", m2, cert.condition2_rank));
  report.details.push_back(record("subspace_sum", m1, cert.total_sum_dim));
  finish(report);
  return out;
}

IdentifiabilityReport check_subband_mixed(const ComplexMatrix& D, const SubBandBasis& basis,
                                          const ComplexVector& x0, Index s1,
                                          const ComplexVector& y0, RankTolerance tol) {
  check_subband_shapes(D, basis, x0, y0);
  const Index m1 = D.cols();
  const Index m2 = basis.m2();
  if (s1 < 1 || s1 > m1) throw InvalidArgument("s1 must lie in [1, m1]");
  require_nonzero(x0);
  require_nonvanishing(y0);
  const IndexSet K0 = support_of(x0);
  if (static_cast<Index>(K0.size()) > s1) {
    throw PreconditionViolated("x0 has " + std::to_string(K0.size()) +
                               " nonzeros, more than s1 = " + std::to_string(s1));
  }
  if (binomial(m1, s1) > kMaxSubbandSupports) {
    throw EnumerationTooLarge("C(m1, s1) supports exceed the 1e5 cap");
  }

  const ComplexMatrix Dt = dft_columns(D);
  IdentifiabilityReport report;
  report.criterion = "subband-mixed-subspace-sum";
  // |K0 u K| never exceeds min(2 s1, m1).
  const Index threshold = std::min(2 * s1, m1) + m2 - 1;
  const Index bw = basis.bandwidth_sum();
  report.details.push_back(CheckRecord{"bandwidth_sum", threshold, bw, bw >= threshold});
  report.details.push_back(record("condition2_rank", m2, condition2_rank(Dt, basis, x0, tol)));

  for (const auto& K : k_subsets(m1, s1)) {
    IndexSet S;
    std::set_union(K0.begin(), K0.end(), K.begin(), K.end(), std::back_inserter(S));
    const ComplexMatrix Dt_S = select_columns(Dt, S);
    const SumCertificate sum =
        subspace_sum_certificate(Dt_S, restrict_to(x0, S), basis.passbands(), tol);
    report.details.push_back(record("K0=" + set_string(K0) + ";K=" + set_string(K),
                                    static_cast<Index>(S.size()), sum.total));
  }
  finish(report);
  return report;
}

// --- counterexample -------------------------------------------------------

std::optional<std::string> witness_violation(const CounterexampleWitness& w,
                                             const ComplexVector& y0) {
  const double a = std::abs(w.alpha);
  const double bound = 1.0 / (inf_norm(y0) * inf_norm(w.w1));
  if (!(a > 0.0 && a < bound)) return "alpha outside (0, 1/(|y0|_inf |w1|_inf))";
  const ComplexVector weights = w.w0 + w.alpha * w.w1;
  if (!(weights.cwiseAbs().minCoeff() > 0.0)) return "w0 + alpha w1 vanishes somewhere";
  if (!(w.residual <= 1e-8)) return "convolution residual above 1e-8";
  if (!(w.collinearity_sine > 1e-6)) return "y2 is collinear with y0";
  return std::nullopt;
}

CounterexampleWitness construct_counterexample(const ComplexMatrix& D, const SubBandBasis& basis,
                                               const ComplexVector& x0, const ComplexVector& y0,
                                               RankTolerance tol) {
  check_subband_shapes(D, basis, x0, y0);
  if (!basis.is_partition()) {
    throw NotPartitioned("sub-band supports must partition the frequency range");
  }
  require_nonzero(x0);
  require_nonvanishing(y0);
  const Index n = D.rows();
  const Index m1 = D.cols();
  const Index m2 = basis.m2();
  if (n >= m1 + m2 - 1) {
    throw SampleComplexityTooHigh("n = " + std::to_string(n) + " >= m1 + m2 - 1 = " +
                                  std::to_string(m1 + m2 - 1));
  }

  const ComplexMatrix Dt = dft_columns(D);
  const SubspaceBasis annihilator = orthogonal_complement(range_basis(Dt, tol), tol);
  const ComplexMatrix E_inv = entrywise_inverse(basis.spectra());
  const ComplexVector b = (basis.spectra() * y0).cwiseProduct(Dt * x0);

  ComplexMatrix map(annihilator.dimension(), m2);
  for (Index k = 0; k < m2; ++k) {
    map.col(k) = annihilator.columns().adjoint() * E_inv.col(k).cwiseProduct(b);
  }
  const SubspaceBasis null = nullspace_basis(map, tol);

  CounterexampleWitness w;
  w.w0 = entrywise_inverse(y0);
  if (null.distance_ratio(w.w0) > 1e-8) {
    throw DegenerateNullspace("w0 = 1/y0 does not lie in the computed nullspace");
  }
  if (null.dimension() < 2) {
    throw DegenerateNullspace("nullspace has dimension " + std::to_string(null.dimension()) +
                              ", need at least 2");
  }

  // Basis direction with the largest component orthogonal to w0.
  const ComplexVector w0_unit = w.w0.normalized();
  double best = -1.0;
  for (Index c = 0; c < null.dimension(); ++c) {
    ComplexVector v = null.columns().col(c);
    v -= w0_unit * w0_unit.dot(v);
    if (v.norm() > best) {
      best = v.norm();
      w.w1 = v;
    }
  }
  w.w1.normalize();
  w.alpha = Complex(1.0 / (2.0 * inf_norm(y0) * inf_norm(w.w1)), 0.0);

  const ComplexVector weights = w.w0 + w.alpha * w.w1;
  w.y2 = entrywise_inverse(weights);
  const ComplexVector target = (E_inv * weights).cwiseProduct(b);
  w.x2 = Dt.completeOrthogonalDecomposition().solve(target);
  w.solve_residual = (Dt * w.x2 - target).norm() / target.norm();
  if (w.solve_residual > 1e-8) {
    throw DegenerateNullspace("least-squares recovery of x2 left residual " +
                              std::to_string(w.solve_residual));
  }

  const ComplexVector z0 = circconv_direct(D * x0, basis.E() * y0);
  const ComplexVector z2 = circconv_direct(D * w.x2, basis.E() * w.y2);
  w.residual = (z2 - z0).norm() / z0.norm();
  const ComplexVector y0_unit = y0.normalized();
  w.collinearity_sine = (w.y2 - y0_unit * y0_unit.dot(w.y2)).norm() / w.y2.norm();

  if (auto why = witness_violation(w, y0)) throw DegenerateNullspace("witness rejected: " + *why);
  return w;
}

CounterexampleWitness construct_counterexample_known_support(const ComplexMatrix& D,
                                                             const SubBandBasis& basis,
                                                             const ComplexVector& x0,
                                                             const ComplexVector& y0,
                                                             RankTolerance tol) {
  check_subband_shapes(D, basis, x0, y0);
  require_nonzero(x0);
  const IndexSet K0 = support_of(x0);
  CounterexampleWitness w =
      construct_counterexample(select_columns(D, K0), basis, restrict_to(x0, K0), y0, tol);
  ComplexVector x2 = ComplexVector::Zero(D.cols());
  for (std::size_t i = 0; i < K0.size(); ++i) x2[K0[i]] = w.x2[static_cast<Index>(i)];
  w.x2 = std::move(x2);
  return w;
}

IdentifiabilityReport refute(IdentifiabilityReport report, CounterexampleWitness witness) {
  if (report.verdict == Verdict::certified) {
    throw InvalidArgument("cannot refute a certified instance");
  }
  if (auto why = witness_violation(witness, entrywise_inverse(witness.w0))) {
    throw InvalidArgument("witness fails verification: " + *why);
  }
  report.verdict = Verdict::refuted;
  report.witness = std::move(witness);
  return report;
}

SubspaceBasis nullspace_oracle_small(const ComplexMatrix& D, const ComplexMatrix& E,
                                     RankTolerance tol) {
  if (D.cols() * E.cols() > 64) {
    throw EnumerationTooLarge("nullspace oracle is limited to m1*m2 <= 64");
  }
  return nullspace_basis(build_lifted_operator(D, E).G(), tol);
}

// --- serialization --------------------------------------------------------

void write_report(std::ostream& os, const IdentifiabilityReport& report) {
  os << "verdict=" << to_string(report.verdict) << '\n';
  os << "criterion=" << report.criterion << '\n';
  if (report.symmetric_patterns_skipped > 0) {
    os << "# symmetric_patterns_skipped=" << report.symmetric_patterns_skipped << '\n';
  }
  if (report.witness) {
    os << "# witness residual=" << report.witness->residual
       << " collinearity_sine=" << report.witness->collinearity_sine
       << " alpha=" << format_complex(report.witness->alpha) << '\n';
  }
  for (const auto& r : report.details) {
    os << "pattern=" << r.pattern << " required=" << r.required << " found=" << r.found << ' '
       << (r.pass ? "pass" : "fail") << '\n';
  }
}

void save_witness(const std::filesystem::path& dir, const CounterexampleWitness& w) {
  std::filesystem::create_directories(dir);
  save_matrix(dir / "w0.mat", w.w0);
  save_matrix(dir / "w1.mat", w.w1);
  save_matrix(dir / "x2.mat", w.x2);
  save_matrix(dir / "y2.mat", w.y2);
  std::ofstream os(dir / "alpha.txt");
  if (!os) throw Error("cannot write " + (dir / "alpha.txt").string());
  os << format_complex(w.alpha) << '\n';
}

}  // namespace blindid
