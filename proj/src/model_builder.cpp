#include "blindid/model_builder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "blindid/errors.hpp"
#include "blindid/matrix_io.hpp"

namespace blindid {

namespace {

class ComplexGaussian {
 public:
  explicit ComplexGaussian(Seed seed) : engine_(seed.value) {}

  Complex operator()() {
    const double g1 = normal_(engine_);
    const double g2 = normal_(engine_);
    return Complex(g1, g2) / std::sqrt(2.0);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

void require_positive(Index v, const char* what) {
  if (v < 1) throw InvalidArgument(std::string(what) + " must be positive");
}

IndexSet support_of(const ComplexVector& v) {
  IndexSet out;
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) >= kSupportThreshold) out.push_back(i);
  }
  return out;
}

}  // namespace

void validate_instance(const BDInstance& instance, RankTolerance tol) {
  const auto& D = instance.D;
  const auto& E = instance.E;
  if (D.rows() < 1 || D.cols() < 1 || E.rows() < 1 || E.cols() < 1) {
    throw InvalidArgument("D and E must be non-empty");
  }
  if (D.rows() != E.rows()) throw DimensionMismatch("D and E must have the same number of rows");
  if (!all_finite(D) || !all_finite(E)) throw InvalidArgument("non-finite entry in D or E");

  auto check = [&](const ComplexMatrix& M, const ConstraintSpec& spec, const char* name) {
    if (spec.kind == ConstraintKind::sparse) {
      if (!spec.sparsity_level || *spec.sparsity_level < 1 || *spec.sparsity_level > M.cols()) {
        throw InvalidArgument(std::string("sparsity level for ") + name +
                              " must lie in [1, cols]");
      }
    } else if (numerical_rank(M, tol) != M.cols()) {
      throw InvalidArgument(std::string(name) + " does not have full column rank");
    }
  };
  check(D, instance.x_constraint, "D");
  check(E, instance.y_constraint, "E");
}

// --- SubBandBasis ---------------------------------------------------------

Index SubBandBasis::bandwidth_sum() const {
  return std::accumulate(bandwidths_.begin(), bandwidths_.end(), Index{0});
}

bool SubBandBasis::is_partition() const {
  std::vector<int> hits(static_cast<std::size_t>(n()), 0);
  for (const auto& s : supports_) {
    for (Index f : s) ++hits[static_cast<std::size_t>(f)];
  }
  return std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; });
}

SubBandBasis subband_basis_from_supports(Index n, const std::vector<ComplexVector>& spectra) {
  require_positive(n, "n");
  if (spectra.empty()) throw InvalidArgument("a sub-band basis needs at least one column");
  const Index m2 = static_cast<Index>(spectra.size());

  SubBandBasis basis;
  basis.spectra_ = ComplexMatrix::Zero(n, m2);
  basis.supports_.resize(static_cast<std::size_t>(m2));
  for (Index k = 0; k < m2; ++k) {
    const auto& s = spectra[static_cast<std::size_t>(k)];
    if (s.size() != n) throw DimensionMismatch("spectrum length differs from n");
    if (!all_finite(s)) throw InvalidArgument("non-finite spectral value");
    IndexSet support = support_of(s);
    if (support.empty()) {
      throw ZeroColumn("spectrum of column " + std::to_string(k) + " is identically zero");
    }
    for (Index f : support) basis.spectra_(f, k) = s[f];
    basis.supports_[static_cast<std::size_t>(k)] = std::move(support);
  }

  std::vector<int> owners(static_cast<std::size_t>(n), 0);
  for (const auto& s : basis.supports_) {
    for (Index f : s) ++owners[static_cast<std::size_t>(f)];
  }
  for (Index k = 0; k < m2; ++k) {
    IndexSet passband;
    for (Index f : basis.supports_[static_cast<std::size_t>(k)]) {
      if (owners[static_cast<std::size_t>(f)] == 1) passband.push_back(f);
    }
    if (passband.empty()) {
      throw EmptyPassband("column " + std::to_string(k) + " has an empty passband", k);
    }
    basis.bandwidths_.push_back(static_cast<Index>(passband.size()));
    basis.passbands_.push_back(std::move(passband));
  }
  basis.E_ = idft_columns(basis.spectra_);
  return basis;
}

SubBandBasis subband_basis_from_matrix(const ComplexMatrix& E) {
  const ComplexMatrix spectra = dft_columns(E);
  std::vector<ComplexVector> cols;
  for (Index k = 0; k < spectra.cols(); ++k) cols.emplace_back(spectra.col(k));
  return subband_basis_from_supports(E.rows(), cols);
}

SubBandBasis partitioned_subband_basis(Index n, const std::vector<Index>& bandwidths, Seed seed) {
  require_positive(n, "n");
  if (bandwidths.empty()) throw InvalidArgument("need at least one band");
  Index total = 0;
  for (Index b : bandwidths) {
    if (b < 1) throw PartitionMismatch("bandwidths must be positive");
    total += b;
  }
  if (total != n) {
    throw PartitionMismatch("bandwidths sum to " + std::to_string(total) + ", expected n = " +
                            std::to_string(n));
  }
  ComplexGaussian gauss(seed);
  std::vector<ComplexVector> spectra;
  Index start = 0;
  for (Index b : bandwidths) {
    ComplexVector s = ComplexVector::Zero(n);
    for (Index f = start; f < start + b; ++f) {
      Complex v;
      do {
        v = gauss();
      } while (std::abs(v) < 0.1);
      s[f] = v;
    }
    spectra.push_back(std::move(s));
    start += b;
  }
  return subband_basis_from_supports(n, spectra);
}

std::vector<Index> even_bandwidths(Index n, Index m2) {
  require_positive(m2, "m2");
  if (n < m2) throw InfeasibleDimensions("cannot split n < m2 frequencies into m2 bands");
  std::vector<Index> out(static_cast<std::size_t>(m2), n / m2);
  for (Index k = 0; k < n % m2; ++k) ++out[static_cast<std::size_t>(k)];
  return out;
}

// --- sampling -------------------------------------------------------------

ComplexMatrix sample_generic_matrix(Index n, Index m, Seed seed) {
  require_positive(n, "n");
  require_positive(m, "m");
  ComplexGaussian gauss(seed);
  ComplexMatrix out(n, m);
  // Column-major fill so that column j only depends on (n, j, seed).
  for (Index c = 0; c < m; ++c) {
    for (Index r = 0; r < n; ++r) out(r, c) = gauss();
  }
  return out;
}

ComplexVector sample_generic_vector(Index n, Seed seed) {
  return sample_generic_matrix(n, 1, seed).col(0);
}

ComplexVector sample_nonvanishing_vector(Index n, Seed seed, double min_magnitude) {
  require_positive(n, "n");
  ComplexGaussian gauss(seed);
  ComplexVector out(n);
  for (Index i = 0; i < n; ++i) {
    Complex v;
    do {
      v = gauss();
    } while (std::abs(v) < min_magnitude);
    out[i] = v;
  }
  return out;
}

ComplexVector sample_sparse_vector(Index m, Index s, Seed seed) {
  require_positive(m, "m");
  if (s < 1 || s > m) throw InvalidArgument("sparsity level must lie in [1, m]");
  ComplexGaussian gauss(seed);
  std::vector<Index> idx(static_cast<std::size_t>(m));
  std::iota(idx.begin(), idx.end(), Index{0});
  // Partial Fisher-Yates: the first s slots form a uniform s-subset.
  for (Index i = 0; i < s; ++i) {
    std::uniform_int_distribution<Index> pick(i, m - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(gauss.engine()))]);
  }
  ComplexVector out = ComplexVector::Zero(m);
  for (Index i = 0; i < s; ++i) {
    Complex v;
    do {
      v = gauss();
    } while (std::abs(v) <= 1e-6);
    out[idx[static_cast<std::size_t>(i)]] = v;
  }
  return out;
}

// --- structured constructions ---------------------------------------------

StructuredPair kronecker_structured_pair(Index n, Index m1, Index m2, Seed seed) {
  require_positive(m1, "m1");
  require_positive(m2, "m2");
  if (n < m1 * m2) {
    throw InfeasibleDimensions("n = " + std::to_string(n) + " is below m1*m2 = " +
                               std::to_string(m1 * m2));
  }
  StructuredPair out;
  out.D_spectrum = sample_generic_matrix(n, m1, derive_seed(seed, 0));
  out.E_spectrum = ComplexMatrix::Zero(n, m2);
  out.E_spectrum.topRows(m1 * m2) =
      kronecker(ComplexMatrix::Identity(m2, m2), ComplexMatrix::Ones(m1, 1));
  if (n > m1 * m2) {
    out.E_spectrum.bottomRows(n - m1 * m2) =
        sample_generic_matrix(n - m1 * m2, m2, derive_seed(seed, 1));
  }
  out.D = idft_columns(out.D_spectrum);
  out.E = idft_columns(out.E_spectrum);
  return out;
}

ThreeBlockWitness three_block_structured_frames(Index n, Index s1, Index s2, Index t1, Index t2,
                                                Seed seed) {
  require_positive(s1, "s1");
  require_positive(s2, "s2");
  if (t1 < 0 || t1 > s1 || t2 < 0 || t2 > s2) throw BadSupportSizes("overlap out of range");
  const Index rows = 2 * s1 * s2;
  if (n < rows) {
    throw InfeasibleDimensions("n = " + std::to_string(n) + " is below 2*s1*s2 = " +
                               std::to_string(rows));
  }
  const Index m1 = 2 * s1 - t1;
  const Index m2 = 2 * s2 - t2;
  const Index r1 = s2 - t2;

  ThreeBlockWitness w;
  const ComplexMatrix D_spectrum = sample_generic_matrix(n, m1, derive_seed(seed, 0));
  w.D = idft_columns(D_spectrum);

  w.E_spectrum = ComplexMatrix::Zero(n, m2);
  const Index block1 = 2 * s1 * t2;
  const Index block2 = s1 * r1;
  if (t2 > 0) {
    w.E_spectrum.block(0, 0, block1, t2) =
        kronecker(ComplexMatrix::Identity(t2, t2), ComplexMatrix::Ones(2 * s1, 1));
  }
  if (r1 > 0) {
    const ComplexMatrix pattern =
        kronecker(ComplexMatrix::Identity(r1, r1), ComplexMatrix::Ones(s1, 1));
    w.E_spectrum.block(block1, t2, block2, r1) = pattern;
    w.E_spectrum.block(block1 + block2, t2 + r1, block2, r1) = pattern;
  }
  if (n > rows) {
    w.E_spectrum.bottomRows(n - rows) = sample_generic_matrix(n - rows, m2, derive_seed(seed, 1));
  }
  w.E = idft_columns(w.E_spectrum);

  for (Index j = 0; j < s1; ++j) w.J0.push_back(j);
  for (Index j = 0; j < t1; ++j) w.J.push_back(j);
  for (Index j = s1; j < m1; ++j) w.J.push_back(j);
  for (Index k = 0; k < s2; ++k) w.K0.push_back(k);
  for (Index k = 0; k < t2; ++k) w.K.push_back(k);
  for (Index k = s2; k < m2; ++k) w.K.push_back(k);
  return w;
}

// --- spark ----------------------------------------------------------------

double binomial(Index n, Index k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double out = 1.0;
  for (Index i = 1; i <= k; ++i) {
    out = out * static_cast<double>(n - k + i) / static_cast<double>(i);
    if (out > 1e18) return 1e18;
  }
  return std::round(out);
}

std::vector<IndexSet> k_subsets(Index n, Index k) {
  std::vector<IndexSet> out;
  if (k < 0 || k > n) return out;
  IndexSet cur(static_cast<std::size_t>(k));
  std::iota(cur.begin(), cur.end(), Index{0});
  while (true) {
    out.push_back(cur);
    Index i = k - 1;
    while (i >= 0 && cur[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) break;
    ++cur[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < k; ++j) {
      cur[static_cast<std::size_t>(j)] = cur[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  return out;
}

bool verify_spark_condition(const ComplexMatrix& D, Index s, RankTolerance tol) {
  require_positive(s, "s");
  const Index width = 2 * s;
  if (width > D.cols()) throw InvalidArgument("spark check needs 2s <= cols(D)");
  if (binomial(D.cols(), width) > 1e6) {
    throw EnumerationTooLarge("C(" + std::to_string(D.cols()) + ", " + std::to_string(width) +
                              ") column subsets exceed the 1e6 cap");
  }
  if (width > D.rows()) return false;
  for (const auto& cols : k_subsets(D.cols(), width)) {
    if (numerical_rank(select_columns(D, cols), tol) != width) return false;
  }
  return true;
}

// --- instance directories -------------------------------------------------

namespace {

std::string kind_name(ConstraintKind k) { return k == ConstraintKind::sparse ? "sparse" : "subspace"; }

long parse_long(const KeyValues& kv, const std::string& key, const std::string& source) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw ParseError(source, 0, "missing key '" + key + "'");
  try {
    std::size_t used = 0;
    const long v = std::stol(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw ParseError(source, 0, "key '" + key + "' is not an integer: " + it->second);
  }
}

}  // namespace

void save_instance(const std::filesystem::path& dir, const InstanceFiles& files) {
  std::filesystem::create_directories(dir);
  const auto& inst = files.instance;
  save_matrix(dir / "D.mat", inst.D);
  save_matrix(dir / "E.mat", inst.E);
  if (files.x0) save_matrix(dir / "x0.mat", *files.x0);
  if (files.y0) save_matrix(dir / "y0.mat", *files.y0);
  std::ofstream cfg(dir / "instance.cfg");
  if (!cfg) throw Error("cannot write " + (dir / "instance.cfg").string());
  cfg << "n = " << inst.n() << '\n'
      << "m1 = " << inst.m1() << '\n'
      << "m2 = " << inst.m2() << '\n'
      << "x_kind = " << kind_name(inst.x_constraint.kind) << '\n'
      << "y_kind = " << (files.y_kind.empty() ? kind_name(inst.y_constraint.kind) : files.y_kind)
      << '\n'
      << "s1 = " << inst.x_constraint.sparsity_level.value_or(0) << '\n'
      << "s2 = " << inst.y_constraint.sparsity_level.value_or(0) << '\n'
      << "seed = " << files.seed.value << '\n';
}

InstanceFiles load_instance(const std::filesystem::path& dir) {
  const auto cfg_path = dir / "instance.cfg";
  const std::string source = cfg_path.string();
  const KeyValues kv = load_key_values(cfg_path);

  InstanceFiles out;
  out.instance.D = load_matrix(dir / "D.mat");
  out.instance.E = load_matrix(dir / "E.mat");

  const long n = parse_long(kv, "n", source);
  const long m1 = parse_long(kv, "m1", source);
  const long m2 = parse_long(kv, "m2", source);
  if (out.instance.D.rows() != n || out.instance.D.cols() != m1) {
    throw ParseError((dir / "D.mat").string(), 1, "shape disagrees with instance.cfg");
  }
  if (out.instance.E.rows() != n || out.instance.E.cols() != m2) {
    throw ParseError((dir / "E.mat").string(), 1, "shape disagrees with instance.cfg");
  }

  auto kind_of = [&](const std::string& key) -> std::string {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ParseError(source, 0, "missing key '" + key + "'");
    return it->second;
  };
  const std::string x_kind = kind_of("x_kind");
  out.y_kind = kind_of("y_kind");
  if (x_kind != "subspace" && x_kind != "sparse") {
    throw ParseError(source, 0, "x_kind must be subspace or sparse");
  }
  if (out.y_kind != "subspace" && out.y_kind != "sparse" && out.y_kind != "subband") {
    throw ParseError(source, 0, "y_kind must be subspace, sparse or subband");
  }
  if (x_kind == "sparse") {
    out.instance.x_constraint = ConstraintSpec::sparse(parse_long(kv, "s1", source));
  }
  if (out.y_kind == "sparse") {
    out.instance.y_constraint = ConstraintSpec::sparse(parse_long(kv, "s2", source));
  }
  if (kv.contains("seed")) {
    try {
      out.seed = Seed{std::stoull(kv.at("seed"))};
    } catch (const std::exception&) {
      throw ParseError(source, 0, "seed is not an unsigned integer");
    }
  }
  if (std::filesystem::exists(dir / "x0.mat")) out.x0 = load_vector(dir / "x0.mat");
  if (std::filesystem::exists(dir / "y0.mat")) out.y0 = load_vector(dir / "y0.mat");
  return out;
}

}  // namespace blindid
