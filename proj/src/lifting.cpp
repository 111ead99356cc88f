#include "blindid/lifting.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <ostream>
#include <sstream>

#include "blindid/errors.hpp"
#include "blindid/model_builder.hpp"

namespace blindid {

ComplexVector lift_rank_one(const ComplexVector& x, const ComplexVector& y) {
  ComplexVector out(x.size() * y.size());
  for (Index k = 0; k < y.size(); ++k) out.segment(k * x.size(), x.size()) = x * y[k];
  return out;
}

LiftedOperator build_lifted_operator(const ComplexMatrix& D, const ComplexMatrix& E) {
  if (D.rows() != E.rows()) throw DimensionMismatch("D and E must have the same number of rows");
  const Index n = D.rows();
  const Index m1 = D.cols();
  const Index m2 = E.cols();
  if (n < 1 || m1 < 1 || m2 < 1) throw InvalidArgument("D and E must be non-empty");
  if (static_cast<double>(n) * static_cast<double>(m1) * static_cast<double>(m2) >
      kMaxLiftedEntries) {
    throw OperatorTooLarge("lifted operator would exceed 1e7 entries");
  }

  LiftedOperator op;
  op.m1_ = m1;
  op.m2_ = m2;
  op.G_.resize(n, m1 * m2);
  const ComplexMatrix D_spec = dft_columns(D);
  const ComplexMatrix E_spec = dft_columns(E);
  const double scale = std::sqrt(static_cast<double>(n));
  for (Index k = 0; k < m2; ++k) {
    for (Index j = 0; j < m1; ++j) {
      const ComplexVector product = D_spec.col(j).cwiseProduct(E_spec.col(k));
      op.G_.col(op.column_index(j, k)) = scale * idft(product);
    }
  }

  // Column-order self-check against the direct convolution.
  for (std::uint64_t t = 0; t < 20; ++t) {
    const ComplexVector x = sample_generic_vector(m1, derive_seed(Seed{0x6c69667400ULL}, 2 * t));
    const ComplexVector y =
        sample_generic_vector(m2, derive_seed(Seed{0x6c69667400ULL}, 2 * t + 1));
    const ComplexVector expected = circconv_direct(D * x, E * y);
    const double err = (op.apply(lift_rank_one(x, y)) - expected).norm();
    if (err > 1e-10 * expected.norm() && err > 1e-300) {
      throw Error("lifted operator failed its construction self-check");
    }
  }
  return op;
}

bool full_column_rank(const LiftedOperator& op, RankTolerance tol) {
  return numerical_rank(op.G(), tol) == op.m1() * op.m2();
}

// --- support patterns -----------------------------------------------------

namespace {

IndexSet sorted(IndexSet s) {
  std::sort(s.begin(), s.end());
  return s;
}

IndexSet set_intersection(const IndexSet& a, const IndexSet& b) {
  const IndexSet sa = sorted(a), sb = sorted(b);
  IndexSet out;
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(out));
  return out;
}

IndexSet set_difference(const IndexSet& a, const IndexSet& b) {
  const IndexSet sa = sorted(a), sb = sorted(b);
  IndexSet out;
  std::set_difference(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(out));
  return out;
}

void require_distinct_in_range(const IndexSet& s, Index bound, const char* name) {
  const IndexSet ss = sorted(s);
  if (std::adjacent_find(ss.begin(), ss.end()) != ss.end()) {
    throw BadSupportSizes(std::string(name) + " has repeated indices");
  }
  if (!ss.empty() && (ss.front() < 0 || ss.back() >= bound)) {
    throw BadSupportSizes(std::string(name) + " index out of range");
  }
}

std::string set_string(const IndexSet& s) {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << '}';
  return os.str();
}

// Appends the columns of G_{D_a E_b} for every j in js, k in ks (k outer,
// matching vec ordering within the block).
void append_block(const IndexSet& js, const IndexSet& ks,
                  std::vector<ColumnLabel>& labels) {
  for (Index k : ks) {
    for (Index j : js) labels.push_back({j, k});
  }
}

BlockColumns gather(const LiftedOperator& op, std::vector<ColumnLabel> labels) {
  BlockColumns out;
  out.columns.resize(op.n(), static_cast<Index>(labels.size()));
  for (std::size_t c = 0; c < labels.size(); ++c) {
    out.columns.col(static_cast<Index>(c)) = op.G().col(op.column_index(labels[c].j, labels[c].k));
  }
  out.labels = std::move(labels);
  return out;
}

}  // namespace

Index SupportPattern::t1() const { return static_cast<Index>(set_intersection(J0, J).size()); }

Index SupportPattern::t2() const {
  if (!K0 || !K) return 0;
  return static_cast<Index>(set_intersection(*K0, *K).size());
}

std::string SupportPattern::to_string() const {
  std::string out = "J0=" + set_string(J0) + ";J=" + set_string(J);
  if (K0 && K) out += ";K0=" + set_string(*K0) + ";K=" + set_string(*K);
  return out;
}

BlockColumns mixed_block_columns(const LiftedOperator& op, const IndexSet& J0, const IndexSet& J) {
  if (J0.size() != J.size() || J0.empty()) {
    throw BadSupportSizes("mixed blocks need |J0| = |J| >= 1");
  }
  require_distinct_in_range(J0, op.m1(), "J0");
  require_distinct_in_range(J, op.m1(), "J");
  IndexSet all_k(static_cast<std::size_t>(op.m2()));
  for (Index k = 0; k < op.m2(); ++k) all_k[static_cast<std::size_t>(k)] = k;

  std::vector<ColumnLabel> labels;
  append_block(set_intersection(J0, J), all_k, labels);
  append_block(set_difference(J0, J), all_k, labels);
  append_block(set_difference(J, J0), all_k, labels);
  return gather(op, std::move(labels));
}

BlockColumns mixed_block_columns(const ComplexMatrix& D, const ComplexMatrix& E,
                                 const IndexSet& J0, const IndexSet& J) {
  return mixed_block_columns(build_lifted_operator(D, E), J0, J);
}

BlockColumns sparsity_block_columns(const LiftedOperator& op, const SupportPattern& p) {
  if (!p.K0 || !p.K) throw BadSupportSizes("sparsity blocks need K0 and K");
  if (p.J0.size() != p.J.size() || p.J0.empty()) {
    throw BadSupportSizes("sparsity blocks need |J0| = |J| >= 1");
  }
  if (p.K0->size() != p.K->size() || p.K0->empty()) {
    throw BadSupportSizes("sparsity blocks need |K0| = |K| >= 1");
  }
  require_distinct_in_range(p.J0, op.m1(), "J0");
  require_distinct_in_range(p.J, op.m1(), "J");
  require_distinct_in_range(*p.K0, op.m2(), "K0");
  require_distinct_in_range(*p.K, op.m2(), "K");

  const IndexSet d0 = set_intersection(p.J0, p.J);
  const IndexSet d1 = set_difference(p.J0, p.J);
  const IndexSet d2 = set_difference(p.J, p.J0);
  const IndexSet e0 = set_intersection(*p.K0, *p.K);
  const IndexSet e1 = set_difference(*p.K0, *p.K);
  const IndexSet e2 = set_difference(*p.K, *p.K0);

  std::vector<ColumnLabel> labels;
  append_block(d0, e0, labels);
  append_block(d1, e0, labels);
  append_block(d2, e0, labels);
  append_block(d0, e1, labels);
  append_block(d1, e1, labels);
  append_block(d0, e2, labels);
  append_block(d2, e2, labels);
  return gather(op, std::move(labels));
}

BlockColumns sparsity_block_columns(const ComplexMatrix& D, const ComplexMatrix& E,
                                    const SupportPattern& pattern) {
  return sparsity_block_columns(build_lifted_operator(D, E), pattern);
}

Index sparsity_block_column_count(Index s1, Index t1, Index s2, Index t2) {
  return (2 * s1 - t1) * (2 * s2 - t2) - 2 * (s1 - t1) * (s2 - t2);
}

bool verify_block_independence(const ComplexMatrix& blocks, RankTolerance tol) {
  return numerical_rank(blocks, tol) == blocks.cols();
}

void write_block_labels(std::ostream& os, const std::vector<ColumnLabel>& labels) {
  for (const auto& l : labels) os << l.j << ' ' << l.k << '\n';
}

}  // namespace blindid
