#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "blindid/complex_signal.hpp"
#include "blindid/errors.hpp"
#include "blindid/experiment.hpp"
#include "blindid/identifiability.hpp"
#include "blindid/lifting.hpp"
#include "blindid/model_builder.hpp"
#include "oracles.hpp"

using namespace blindid;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

std::string count(Index passes, Index total) {
  return std::to_string(passes) + "/" + std::to_string(total);
}

ExperimentConfig config(Mode mode, Index n, Index m1, Index m2, Index s1 = 0, Index s2 = 0,
                        std::vector<Index> bands = {}) {
  ExperimentConfig c;
  c.mode = mode;
  c.n_values = {n};
  c.m1 = m1;
  c.m2 = m2;
  c.s1 = s1;
  c.s2 = s2;
  c.bandwidths = std::move(bands);
  c.trials = 200;
  return c;
}

GenericTally generic_draws(const ExperimentConfig& c, Index trials, bool generic_expected) {
  const Index n = c.n_values.front();
  return tally_trials([&](Seed s) { return certify_random_draw(c, n, s); }, trials, c.base_seed,
                      generic_expected);
}

Outcome convolution_kernel() {
  oracle::Rng rng(1001);
  double worst = 0.0;
  for (int t = 0; t < 500; ++t) {
    const Index n = rng.index(2, 128);
    const ComplexVector u = rng.vector(n), v = rng.vector(n);
    worst = std::max(worst, oracle::rel_err(circconv_fft(u, v), circconv_direct(u, v)));
  }
  return {worst < 1e-10, "500 pairs, worst rel err " + sci(worst)};
}

Outcome lifting_consistency() {
  oracle::Rng rng(1002);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Index n = rng.index(1, 32), m1 = rng.index(1, 6), m2 = rng.index(1, 6);
    const ComplexMatrix D = rng.matrix(n, m1), E = rng.matrix(n, m2);
    const ComplexVector x = rng.vector(m1), y = rng.vector(m2);
    const LiftedOperator op = build_lifted_operator(D, E);
    worst = std::max(worst, oracle::rel_err(op.apply(lift_rank_one(x, y)),
                                            oracle::cyclic_sum(D * x, E * y)));
  }
  return {worst < 1e-10, "100 instances, worst rel err " + sci(worst)};
}

Outcome lifted_rank_boundary() {
  const auto at = tally_trials([](Seed s) { return lifted_rank_generic_trial(12, 3, 4, s); }, 200,
                               Seed{0}, true);
  const auto below = tally_trials([](Seed s) { return lifted_rank_generic_trial(11, 3, 4, s); }, 200,
                                  Seed{0}, false);
  const bool witness = lifted_rank_witness(12, 3, 4, Seed{0}) && lifted_rank_witness(6, 2, 3, Seed{0});
  return {at.successes == 200 && below.successes == 0 && witness,
          "n=12 " + count(at.successes, 200) + ", n=11 " + count(below.successes, 200) +
              ", structured witness " + (witness ? "pass" : "fail") +
              ", redraws " + std::to_string(at.redraws)};
}

Outcome mixed_block_boundary() {
  Outcome out;
  for (Index t1 = 0; t1 <= 2; ++t1) {
    const auto t = tally_trials([t1](Seed s) { return mixed_blocks_generic_trial(8, 2, 2, t1, s); },
                                200, Seed{0}, true);
    out.pass = out.pass && t.successes == 200;
    out.detail += "t1=" + std::to_string(t1) + " " + count(t.successes, 200) + " ";
  }
  return out;
}

Outcome sparsity_block_boundary() {
  Outcome out;
  Index witnesses = 0;
  for (Index t1 = 0; t1 <= 2; ++t1) {
    for (Index t2 = 0; t2 <= 2; ++t2) {
      const auto t = tally_trials(
          [t1, t2](Seed s) { return sparsity_blocks_generic_trial(8, 2, 2, t1, t2, s); }, 200, Seed{0},
          true);
      out.pass = out.pass && t.successes == 200;
      if (t.successes != 200) {
        out.detail += "(t1,t2)=(" + std::to_string(t1) + "," + std::to_string(t2) + ") " +
                      count(t.successes, 200) + " ";
      }
      witnesses += sparsity_blocks_witness(8, 2, 2, t1, t2, Seed{0}) ? 1 : 0;
    }
  }
  out.pass = out.pass && witnesses == 9;
  out.detail += "9 overlap settings at 200/200: " + std::string(out.pass ? "yes" : "no") +
                ", structured witnesses " + count(witnesses, 9);
  return out;
}

Outcome subspace_phase() {
  ExperimentConfig c = config(Mode::subspace, 10, 3, 4);
  c.n_values = parse_index_list("10:14");
  c.trials = 100;
  std::string seen;
  bool pass = true;
  const std::vector<double> expected{0, 0, 1, 1, 1};
  const auto rows = run_phase_transition(c);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    seen += (i ? "," : "") + std::to_string(static_cast<int>(rows[i].rate * 100)) + "%";
    pass = pass && rows[i].rate == expected[i];
  }
  return {pass && rows.size() == 5, "rates n=10..14: " + seen};
}

Outcome at_least(const GenericTally& t, Index needed, const std::string& label) {
  return {t.successes >= needed, label + " certified " + count(t.successes, t.trials) +
                                     ", redraws " + std::to_string(t.redraws)};
}

Outcome mixed_check() {
  return at_least(generic_draws(config(Mode::mixed, 8, 4, 2, 2), 200, true), 199, "m1=4 s1=2 m2=2 n=8");
}

Outcome sparsity_check() {
  return at_least(generic_draws(config(Mode::sparsity, 8, 4, 4, 2, 2), 200, true), 199,
                  "m1=m2=4 s1=s2=2 n=8");
}

Outcome subband_boundary() {
  const auto at = generic_draws(config(Mode::subband, 6, 4, 3, 0, 0, {2, 2, 2}), 200, true);
  const auto below = generic_draws(config(Mode::subband, 5, 4, 3, 0, 0, {2, 2, 1}), 200, false);
  return {at.successes >= 199 && below.successes == 0,
          "l=(2,2,2) " + count(at.successes, 200) + ", l=(2,2,1) " + count(below.successes, 200)};
}

Outcome counterexample_refutation() {
  Index built = 0, sound = 0, in_null = 0;
  double worst_residual = 0.0, worst_projection = 0.0, min_sine = 1.0;
  for (std::uint64_t t = 0; t < 100; ++t) {
    const Seed seed{t};
    const ComplexMatrix D = sample_generic_matrix(5, 3, derive_seed(seed, 0));
    const SubBandBasis basis = partitioned_subband_basis(5, {2, 1, 1, 1}, derive_seed(seed, 1));
    const ComplexVector x0 = sample_generic_vector(3, derive_seed(seed, 2));
    const ComplexVector y0 = sample_nonvanishing_vector(4, derive_seed(seed, 3));
    CounterexampleWitness w;
    try {
      w = construct_counterexample(D, basis, x0, y0);
    } catch (const Error&) {
      continue;
    }
    ++built;
    const ComplexVector z0 = oracle::cyclic_sum(D * x0, basis.E() * y0);
    const double residual = (oracle::cyclic_sum(D * w.x2, basis.E() * w.y2) - z0).norm() / z0.norm();
    worst_residual = std::max(worst_residual, residual);
    min_sine = std::min(min_sine, w.collinearity_sine);
    if (residual < 1e-8 && w.collinearity_sine > 1e-6 &&
        !equivalent_up_to_scaling(w.x2, w.y2, x0, y0).equivalent) {
      ++sound;
    }
    const SubspaceBasis null = nullspace_oracle_small(D, basis.E());
    const double proj = null.distance_ratio(lift_rank_one(x0, y0) - lift_rank_one(w.x2, w.y2));
    worst_projection = std::max(worst_projection, proj);
    in_null += proj < 1e-8 ? 1 : 0;
  }
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "built %ld/100, sound %ld, in nullspace %ld, worst residual %.2e, min sine %.3f, "
                "worst projection %.2e",
                static_cast<long>(built), static_cast<long>(sound), static_cast<long>(in_null),
                worst_residual, min_sine, worst_projection);
  return {built == 100 && sound == 100 && in_null == 100, buf};
}

Outcome sparse_subband_boundary() {
  return at_least(generic_draws(config(Mode::subband_mixed, 8, 6, 3, 2, 0, {3, 3, 2}), 200, true),
                  199, "m1=6 s1=2 m2=3 l=(3,3,2)");
}

Outcome invariant_suites() {
  oracle::Rng rng(1012);
  Index failures = 0;

  // Scaling ambiguity is exact in the lifted domain.
  for (int t = 0; t < 50; ++t) {
    const LiftedOperator op = build_lifted_operator(rng.matrix(12, 3), rng.matrix(12, 4));
    const ComplexVector x = rng.vector(3), y = rng.vector(4);
    const Complex sigma = rng.gauss();
    const ComplexVector base = op.apply(lift_rank_one(x, y));
    failures += oracle::rel_err(op.apply(lift_rank_one(sigma * x, y / sigma)), base) < 1e-12 ? 0 : 1;
    failures += equivalent_up_to_scaling(sigma * x, y / sigma, x, y).equivalent ? 0 : 1;
  }

  // Sub-band verdicts do not change under (sigma x0, y0 / sigma).
  for (std::uint64_t s = 0; s < 10; ++s) {
    const std::vector<Index> bands = s % 2 ? std::vector<Index>{2, 2, 1} : std::vector<Index>{2, 2, 2};
    Index n = 0;
    for (Index b : bands) n += b;
    const ComplexMatrix D = sample_generic_matrix(n, 4, Seed{s});
    const SubBandBasis basis = partitioned_subband_basis(n, bands, Seed{s + 50});
    const ComplexVector x0 = rng.vector(4);
    const ComplexVector y0 = sample_nonvanishing_vector(3, Seed{s + 90});
    const Verdict base = check_subband(D, basis, x0, y0).report.verdict;
    for (int t = 0; t < 20; ++t) {
      const Complex sigma = rng.gauss();
      failures += check_subband(D, basis, sigma * x0, y0 / sigma).report.verdict == base ? 0 : 1;
    }
  }

  // Full-support sparsity levels reduce to the subspace checker.
  for (int t = 0; t < 30; ++t) {
    const Index m1 = rng.index(1, 3), m2 = rng.index(1, 3);
    const Index n = rng.index(std::max<Index>(1, m1 * m2 - 1), m1 * m2 + 1);
    const ComplexMatrix D = rng.matrix(n, m1), E = rng.matrix(n, m2);
    const Verdict base = check_subspace(D, E).verdict;
    failures += check_mixed(D, E, m1).verdict == base ? 0 : 1;
    failures += check_sparsity(D, E, m1, m2).verdict == base ? 0 : 1;
  }
  for (std::uint64_t s = 0; s < 10; ++s) {
    const ComplexMatrix D = sample_generic_matrix(6, 4, Seed{s});
    const SubBandBasis basis = partitioned_subband_basis(6, {2, 2, 2}, Seed{s + 7});
    const ComplexVector x0 = rng.vector(4);
    const ComplexVector y0 = sample_nonvanishing_vector(3, Seed{s + 9});
    failures += check_subband_mixed(D, basis, x0, 4, y0).verdict ==
                        check_subband(D, basis, x0, y0).report.verdict
                    ? 0
                    : 1;
  }

  // Rank-nullity.
  for (int t = 0; t < 100; ++t) {
    const Index r = rng.index(1, 10), c = rng.index(1, 10), k = rng.index(1, std::min(r, c));
    const ComplexMatrix m = rng.matrix(r, k) * rng.matrix(k, c);
    failures += numerical_rank(m) + nullspace_basis(m).dimension() == c ? 0 : 1;
  }

  // Intersection dimension formula against the kernel of [Q_A, -Q_B].
  for (int t = 0; t < 100; ++t) {
    const Index n = rng.index(2, 12), da = rng.index(1, n), db = rng.index(1, n);
    const Index shared = rng.index(0, std::min(da, db));
    const ComplexMatrix common = rng.matrix(n, shared);
    ComplexMatrix ma(n, da), mb(n, db);
    ma << common, rng.matrix(n, da - shared);
    mb << common, rng.matrix(n, db - shared);
    const SubspaceBasis a = SubspaceBasis::span_of(ma), b = SubspaceBasis::span_of(mb);
    const Index inter = subspace_intersection(a, b).dimension();
    failures += inter == a.dimension() + b.dimension() -
                             subspace_sum_dimension(std::vector<SubspaceBasis>{a, b})
                    ? 0
                    : 1;
    ComplexMatrix stacked(n, da + db);
    stacked << a.columns(), -b.columns();
    failures += inter == stacked.cols() - oracle::qr_rank(stacked) ? 0 : 1;
  }
  return {failures == 0, std::to_string(failures) + " invariant violations"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"convolution kernel", convolution_kernel},
      {"lifting consistency", lifting_consistency},
      {"lifted rank boundary m1=3 m2=4", lifted_rank_boundary},
      {"mixed blocks s1=2 m2=2 n=8", mixed_block_boundary},
      {"sparsity blocks s1=s2=2 n=8", sparsity_block_boundary},
      {"subspace phase transition", subspace_phase},
      {"mixed checker at n=2 s1 m2", mixed_check},
      {"sparsity checker at n=2 s1 s2", sparsity_check},
      {"sub-band checker at n=m1+m2-1", subband_boundary},
      {"sub-band counterexamples below the bound", counterexample_refutation},
      {"sparse sub-band checker", sparse_subband_boundary},
      {"invariant suites", invariant_suites},
  };
  const std::vector<double> time_limits{5, 0, 30, 0, 0, 0, 0, 120, 0, 0, 0, 0};

  const auto total_start = Clock::now();
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = Clock::now();
    Outcome o = criteria[i].second();
    const double elapsed = seconds_since(start);
    if (time_limits[i] > 0 && elapsed >= time_limits[i]) {
      o.pass = false;
      o.detail += ", over the " + std::to_string(static_cast<int>(time_limits[i])) + " s budget";
    }
    if (i + 1 == criteria.size()) {
      const double total = seconds_since(total_start);
      o.pass = o.pass && total < 600.0;
      char buf[64];
      std::snprintf(buf, sizeof buf, ", full run %.1f s", total);
      o.detail += buf;
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s criterion %2zu: %s (%s) [%.2f s]\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), o.detail.c_str(), elapsed);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
