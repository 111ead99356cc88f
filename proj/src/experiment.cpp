#include "blindid/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "blindid/errors.hpp"
#include "blindid/lifting.hpp"
#include "blindid/model_builder.hpp"

namespace blindid {

std::string to_string(Mode m) {
  switch (m) {
    case Mode::subspace:
      return "subspace";
    case Mode::mixed:
      return "mixed";
    case Mode::sparsity:
      return "sparsity";
    case Mode::subband:
      return "subband";
    case Mode::subband_mixed:
      return "subband_mixed";
  }
  return "unknown";
}

Mode parse_mode(const std::string& name) {
  for (Mode m : {Mode::subspace, Mode::mixed, Mode::sparsity, Mode::subband, Mode::subband_mixed}) {
    if (to_string(m) == name) return m;
  }
  throw InvalidArgument("unknown mode '" + name + "'");
}

RankTolerance ExperimentConfig::rank_tolerance() const {
  return tolerance ? RankTolerance(*tolerance) : RankTolerance::automatic();
}

namespace {

Index parse_index(const std::string& text) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(text, &used);
  } catch (const std::exception&) {
    throw InvalidArgument("not an integer: '" + text + "'");
  }
  if (used != text.size()) throw InvalidArgument("not an integer: '" + text + "'");
  return v;
}

std::vector<Index> range_inclusive(Index lo, Index hi) {
  if (hi < lo) throw InvalidArgument("empty range " + std::to_string(lo) + ".." + std::to_string(hi));
  std::vector<Index> out;
  for (Index v = lo; v <= hi; ++v) out.push_back(v);
  return out;
}

}  // namespace

std::vector<Index> parse_index_list(const std::string& text) {
  if (const auto dots = text.find(".."); dots != std::string::npos) {
    return range_inclusive(parse_index(text.substr(0, dots)), parse_index(text.substr(dots + 2)));
  }
  if (const auto colon = text.find(':'); colon != std::string::npos) {
    return range_inclusive(parse_index(text.substr(0, colon)),
                           parse_index(text.substr(colon + 1)));
  }
  std::vector<Index> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_index(item));
  if (out.empty()) throw InvalidArgument("empty index list");
  return out;
}

ExperimentConfig config_from_key_values(const KeyValues& kv, const std::string& source) {
  ExperimentConfig c;
  for (const auto& [key, value] : kv) {
    try {
      if (key == "mode") c.mode = parse_mode(value);
      else if (key == "n") c.n_values = parse_index_list(value);
      else if (key == "m1") c.m1 = parse_index(value);
      else if (key == "m2") c.m2 = parse_index(value);
      else if (key == "s1") c.s1 = parse_index(value);
      else if (key == "s2") c.s2 = parse_index(value);
      else if (key == "bandwidths") c.bandwidths = parse_index_list(value);
      else if (key == "trials") c.trials = parse_index(value);
      else if (key == "seed") c.base_seed = Seed{std::stoull(value)};
      else if (key == "tol") c.tolerance = std::stod(value);
      else throw InvalidArgument("unknown key");
    } catch (const std::exception& e) {
      throw ParseError(source, 0, "key '" + key + "': " + e.what());
    }
  }
  return c;
}

void validate_config(const ExperimentConfig& c) {
  if (c.trials < 1) throw InvalidArgument("trials must be at least 1");
  if (c.n_values.empty()) throw InvalidArgument("n range is empty");
  for (std::size_t i = 0; i < c.n_values.size(); ++i) {
    if (c.n_values[i] < 1) throw InvalidArgument("n values must be positive");
    if (i && c.n_values[i] <= c.n_values[i - 1]) {
      throw InvalidArgument("n values must be strictly increasing");
    }
  }
  if (c.m1 < 1 || c.m2 < 1) throw InvalidArgument("m1 and m2 must be positive");
  if (c.tolerance) RankTolerance check(*c.tolerance);
  const bool needs_s1 = c.mode == Mode::mixed || c.mode == Mode::sparsity ||
                        c.mode == Mode::subband_mixed;
  if (needs_s1 && (c.s1 < 1 || c.s1 > c.m1)) throw InvalidArgument("s1 must lie in [1, m1]");
  if (c.mode == Mode::sparsity && (c.s2 < 1 || c.s2 > c.m2)) {
    throw InvalidArgument("s2 must lie in [1, m2]");
  }
  if (c.mode == Mode::subband || c.mode == Mode::subband_mixed) {
    if (!c.bandwidths.empty()) {
      if (static_cast<Index>(c.bandwidths.size()) != c.m2) {
        throw InvalidArgument("need one bandwidth per column of E (m2)");
      }
      Index sum = 0;
      for (Index b : c.bandwidths) sum += b;
      if (c.n_values.size() != 1 || c.n_values.front() != sum) {
        throw InvalidArgument("fixed bandwidths require a single n equal to their sum");
      }
    }
    if (c.n_values.front() < c.m2) throw InvalidArgument("sub-band modes need n >= m2");
  }
}

Index certified_threshold(const ExperimentConfig& c) {
  switch (c.mode) {
    case Mode::subspace:
      return c.m1 * c.m2;
    case Mode::mixed:
      return 2 * c.s1 * c.m2;
    case Mode::sparsity:
      return 2 * c.s1 * c.s2;
    case Mode::subband:
      return c.m1 + c.m2 - 1;
    case Mode::subband_mixed:
      return std::min(2 * c.s1, c.m1) + c.m2 - 1;
  }
  return 0;
}

TrialOutcome run_with_redraw(const std::function<bool(Seed)>& trial, Seed seed,
                             bool generic_expected) {
  if (trial(seed)) return {true, false};
  if (!generic_expected) return {false, false};
  return {trial(derive_seed(seed, kRedrawStream)), true};
}

GenericTally tally_trials(const std::function<bool(Seed)>& trial, Index trials, Seed base,
                          bool generic_expected) {
  GenericTally t;
  t.trials = trials;
  for (Index i = 0; i < trials; ++i) {
    const TrialOutcome o = run_with_redraw(trial, trial_seed(base, i), generic_expected);
    t.successes += o.success ? 1 : 0;
    t.redraws += o.redrawn ? 1 : 0;
  }
  return t;
}

bool certify_random_draw(const ExperimentConfig& c, Index n, Seed seed) {
  const RankTolerance tol = c.rank_tolerance();
  const ComplexMatrix D = sample_generic_matrix(n, c.m1, derive_seed(seed, 0));
  switch (c.mode) {
    case Mode::subspace:
      return check_subspace(D, sample_generic_matrix(n, c.m2, derive_seed(seed, 1)), tol).verdict ==
             Verdict::certified;
    case Mode::mixed:
      return check_mixed(D, sample_generic_matrix(n, c.m2, derive_seed(seed, 1)), c.s1, tol)
                 .verdict == Verdict::certified;
    case Mode::sparsity:
      return check_sparsity(D, sample_generic_matrix(n, c.m2, derive_seed(seed, 1)), c.s1, c.s2,
                            tol)
                 .verdict == Verdict::certified;
    case Mode::subband:
    case Mode::subband_mixed: {
      const auto bands = c.bandwidths.empty() ? even_bandwidths(n, c.m2) : c.bandwidths;
      const SubBandBasis basis = partitioned_subband_basis(n, bands, derive_seed(seed, 1));
      const ComplexVector y0 = sample_nonvanishing_vector(c.m2, derive_seed(seed, 3));
      if (c.mode == Mode::subband) {
        const ComplexVector x0 = sample_generic_vector(c.m1, derive_seed(seed, 2));
        return check_subband(D, basis, x0, y0, tol).report.verdict == Verdict::certified;
      }
      const ComplexVector x0 = sample_sparse_vector(c.m1, c.s1, derive_seed(seed, 2));
      return check_subband_mixed(D, basis, x0, c.s1, y0, tol).verdict == Verdict::certified;
    }
  }
  return false;
}

std::vector<PhaseRow> run_phase_transition(const ExperimentConfig& config) {
  validate_config(config);
  const Index threshold = certified_threshold(config);
  std::vector<PhaseRow> rows;
  for (Index n : config.n_values) {
    const auto trial = [&](Seed s) { return certify_random_draw(config, n, s); };
    const GenericTally t = tally_trials(trial, config.trials, config.base_seed, n >= threshold);
    PhaseRow row;
    row.n = n;
    row.m1 = config.m1;
    row.m2 = config.m2;
    // A sparsity level equal to the dimension means "no sparsity constraint".
    row.s1 = config.s1 > 0 ? config.s1 : config.m1;
    row.s2 = config.s2 > 0 ? config.s2 : config.m2;
    row.trials = t.trials;
    row.successes = t.successes;
    row.rate = static_cast<double>(t.successes) / static_cast<double>(t.trials);
    rows.push_back(row);
  }
  return rows;
}

void write_phase_csv(std::ostream& os, const std::vector<PhaseRow>& rows) {
  os << "n,m1,m2,s1,s2,trials,successes,rate\n";
  char rate[32];
  for (const auto& r : rows) {
    std::snprintf(rate, sizeof rate, "%.6f", r.rate);
    os << r.n << ',' << r.m1 << ',' << r.m2 << ',' << r.s1 << ',' << r.s2 << ',' << r.trials << ','
       << r.successes << ',' << rate << '\n';
  }
}

// --- witness suite --------------------------------------------------------

namespace {

struct Overlap {
  IndexSet first;
  IndexSet second;
};

// Supports of size s inside {0 .. 2s - t - 1} sharing exactly t indices.
Overlap overlapping_supports(Index s, Index t) {
  Overlap o;
  for (Index i = 0; i < s; ++i) o.first.push_back(i);
  for (Index i = 0; i < t; ++i) o.second.push_back(i);
  for (Index i = s; i < 2 * s - t; ++i) o.second.push_back(i);
  return o;
}

}  // namespace

bool lifted_rank_generic_trial(Index n, Index m1, Index m2, Seed seed, RankTolerance tol) {
  const ComplexMatrix D = sample_generic_matrix(n, m1, derive_seed(seed, 0));
  const ComplexMatrix E = sample_generic_matrix(n, m2, derive_seed(seed, 1));
  return full_column_rank(build_lifted_operator(D, E), tol);
}

bool lifted_rank_witness(Index n, Index m1, Index m2, Seed seed, RankTolerance tol) {
  const StructuredPair p = kronecker_structured_pair(n, m1, m2, seed);
  return full_column_rank(build_lifted_operator(p.D, p.E), tol);
}

bool mixed_blocks_generic_trial(Index n, Index s1, Index m2, Index t1, Seed seed, RankTolerance tol) {
  const ComplexMatrix D = sample_generic_matrix(n, 2 * s1 - t1, derive_seed(seed, 0));
  const ComplexMatrix E = sample_generic_matrix(n, m2, derive_seed(seed, 1));
  const Overlap o = overlapping_supports(s1, t1);
  return verify_block_independence(mixed_block_columns(D, E, o.first, o.second).columns, tol);
}

bool mixed_blocks_witness(Index n, Index s1, Index m2, Index t1, Seed seed, RankTolerance tol) {
  const StructuredPair p = kronecker_structured_pair(n, 2 * s1 - t1, m2, seed);
  const Overlap o = overlapping_supports(s1, t1);
  return verify_block_independence(mixed_block_columns(p.D, p.E, o.first, o.second).columns, tol);
}

bool sparsity_blocks_generic_trial(Index n, Index s1, Index s2, Index t1, Index t2, Seed seed,
                           RankTolerance tol) {
  const ComplexMatrix D = sample_generic_matrix(n, 2 * s1 - t1, derive_seed(seed, 0));
  const ComplexMatrix E = sample_generic_matrix(n, 2 * s2 - t2, derive_seed(seed, 1));
  const Overlap oj = overlapping_supports(s1, t1);
  const Overlap ok = overlapping_supports(s2, t2);
  const SupportPattern p{oj.first, oj.second, ok.first, ok.second};
  return verify_block_independence(sparsity_block_columns(D, E, p).columns, tol);
}

bool sparsity_blocks_witness(Index n, Index s1, Index s2, Index t1, Index t2, Seed seed,
                     RankTolerance tol) {
  const ThreeBlockWitness w = three_block_structured_frames(n, s1, s2, t1, t2, seed);
  const SupportPattern p{w.J0, w.J, w.K0, w.K};
  return verify_block_independence(sparsity_block_columns(w.D, w.E, p).columns, tol);
}

std::vector<LemmaRow> run_lemma_suite(Seed seed, Index trials) {
  if (trials < 1) throw InvalidArgument("trials must be at least 1");
  std::vector<LemmaRow> rows;
  auto generic = [&](std::string family, std::string setting, bool expect,
                     const std::function<bool(Seed)>& trial) {
    const GenericTally t = tally_trials(trial, trials, seed, expect);
    rows.push_back({std::move(family), std::move(setting), expect ? "generic" : "expected-fail",
                    t.successes, t.trials, expect});
  };
  auto witness = [&](std::string family, std::string setting, bool pass) {
    rows.push_back({std::move(family), std::move(setting), "witness", pass ? 1 : 0, 1, true});
  };

  // Full column rank of the lifted operator.
  witness("lifted-rank", "n=6 m1=2 m2=3", lifted_rank_witness(6, 2, 3, seed));
  witness("lifted-rank", "n=12 m1=3 m2=4", lifted_rank_witness(12, 3, 4, seed));
  generic("lifted-rank", "n=12 m1=3 m2=4", true,
          [](Seed s) { return lifted_rank_generic_trial(12, 3, 4, s); });
  generic("lifted-rank", "n=11 m1=3 m2=4", false,
          [](Seed s) { return lifted_rank_generic_trial(11, 3, 4, s); });

  // Mixed blocks, s1 = 2, m2 = 2.
  for (Index t1 = 0; t1 <= 2; ++t1) {
    const std::string setting = "n=8 s1=2 m2=2 t1=" + std::to_string(t1);
    witness("mixed-blocks", setting, mixed_blocks_witness(8, 2, 2, t1, seed));
    generic("mixed-blocks", setting, true,
            [t1](Seed s) { return mixed_blocks_generic_trial(8, 2, 2, t1, s); });
  }
  generic("mixed-blocks", "n=7 s1=2 m2=2 t1=0", false,
          [](Seed s) { return mixed_blocks_generic_trial(7, 2, 2, 0, s); });

  // Seven sparsity blocks, s1 = s2 = 2.
  for (Index t1 = 0; t1 <= 2; ++t1) {
    for (Index t2 = 0; t2 <= 2; ++t2) {
      const std::string setting =
          "n=8 s1=2 s2=2 t1=" + std::to_string(t1) + " t2=" + std::to_string(t2);
      witness("sparsity-blocks", setting, sparsity_blocks_witness(8, 2, 2, t1, t2, seed));
      generic("sparsity-blocks", setting, true,
              [t1, t2](Seed s) { return sparsity_blocks_generic_trial(8, 2, 2, t1, t2, s); });
    }
  }
  generic("sparsity-blocks", "n=7 s1=2 s2=2 t1=0 t2=0", false,
          [](Seed s) { return sparsity_blocks_generic_trial(7, 2, 2, 0, 0, s); });
  return rows;
}

void write_lemma_table(std::ostream& os, const std::vector<LemmaRow>& rows) {
  os << std::left << std::setw(16) << "family" << std::setw(28) << "setting" << std::setw(15)
     << "kind" << std::setw(12) << "passes" << "status\n";
  for (const auto& r : rows) {
    os << std::setw(16) << r.family << std::setw(28) << r.setting << std::setw(15) << r.kind
       << std::setw(12) << (std::to_string(r.passes) + "/" + std::to_string(r.total))
       << (r.ok() ? "ok" : "FAIL") << '\n';
  }
}

// --- instance commands ----------------------------------------------------

Mode mode_of(const InstanceFiles& files) {
  const bool x_sparse = files.instance.x_constraint.kind == ConstraintKind::sparse;
  if (files.y_kind == "subband") return x_sparse ? Mode::subband_mixed : Mode::subband;
  if (files.y_kind == "sparse") {
    if (!x_sparse) throw InvalidArgument("sparse filter with subspace signal is not supported");
    return Mode::sparsity;
  }
  return x_sparse ? Mode::mixed : Mode::subspace;
}

CheckOutcome run_check(const std::filesystem::path& instance_dir, const CheckOptions& options,
                       std::ostream& err) {
  CheckOutcome outcome;
  try {
    const InstanceFiles files = load_instance(instance_dir);
    const RankTolerance tol =
        options.tolerance ? RankTolerance(*options.tolerance) : RankTolerance::automatic();
    validate_instance(files.instance, tol);
    const Mode mode = options.mode.value_or(mode_of(files));
    const auto& D = files.instance.D;
    const auto& E = files.instance.E;
    const Index s1 = files.instance.x_constraint.sparsity_level.value_or(D.cols());
    const Index s2 = files.instance.y_constraint.sparsity_level.value_or(E.cols());

    IdentifiabilityReport report;
    switch (mode) {
      case Mode::subspace:
        report = check_subspace(D, E, tol);
        break;
      case Mode::mixed:
        report = check_mixed(D, E, s1, tol);
        break;
      case Mode::sparsity:
        report = check_sparsity(D, E, s1, s2, tol);
        break;
      case Mode::subband:
      case Mode::subband_mixed: {
        const SubBandBasis basis = subband_basis_from_matrix(E);
        const ComplexVector x0 =
            files.x0 ? *files.x0
                     : (mode == Mode::subband
                            ? sample_generic_vector(D.cols(), derive_seed(files.seed, 2))
                            : sample_sparse_vector(D.cols(), s1, derive_seed(files.seed, 2)));
        const ComplexVector y0 =
            files.y0 ? *files.y0 : sample_nonvanishing_vector(E.cols(), derive_seed(files.seed, 3));
        report = mode == Mode::subband ? check_subband(D, basis, x0, y0, tol).report
                                       : check_subband_mixed(D, basis, x0, s1, y0, tol);
        if (report.verdict != Verdict::certified && options.counterexample) {
          try {
            CounterexampleWitness w =
                mode == Mode::subband
                    ? construct_counterexample(D, basis, x0, y0, tol)
                    : construct_counterexample_known_support(D, basis, x0, y0, tol);
            report = refute(std::move(report), std::move(w));
          } catch (const Error& e) {
            err << "no counterexample: " << e.what() << '\n';
          }
        }
        break;
      }
    }

    const auto out_dir = options.out.empty() ? instance_dir : options.out;
    std::filesystem::create_directories(out_dir);
    {
      std::ofstream os(out_dir / "report.txt");
      if (!os) throw Error("cannot write " + (out_dir / "report.txt").string());
      write_report(os, report);
    }
    if (report.witness) save_witness(out_dir, *report.witness);
    switch (report.verdict) {
      case Verdict::certified:
        outcome.exit_code = kExitCertified;
        break;
      case Verdict::not_certified:
        outcome.exit_code = kExitNotCertified;
        break;
      case Verdict::refuted:
        outcome.exit_code = kExitRefuted;
        break;
    }
    outcome.report = std::move(report);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    outcome.exit_code = kExitInputError;
    outcome.report.reset();
  }
  return outcome;
}

InstanceFiles make_instance(const InstanceSpec& spec, const std::filesystem::path& dir) {
  if (spec.n < 1 || spec.m1 < 1 || spec.m2 < 1) throw InvalidArgument("n, m1, m2 must be positive");
  InstanceFiles files;
  files.seed = spec.seed;
  auto& inst = files.instance;
  inst.D = sample_generic_matrix(spec.n, spec.m1, derive_seed(spec.seed, 0));

  const bool x_sparse =
      spec.mode == Mode::mixed || spec.mode == Mode::sparsity || spec.mode == Mode::subband_mixed;
  if (x_sparse) {
    if (spec.s1 < 1 || spec.s1 > spec.m1) throw InvalidArgument("s1 must lie in [1, m1]");
    inst.x_constraint = ConstraintSpec::sparse(spec.s1);
    files.x0 = sample_sparse_vector(spec.m1, spec.s1, derive_seed(spec.seed, 2));
  } else {
    files.x0 = sample_generic_vector(spec.m1, derive_seed(spec.seed, 2));
  }

  if (spec.mode == Mode::subband || spec.mode == Mode::subband_mixed) {
    const auto bands = spec.bandwidths.empty() ? even_bandwidths(spec.n, spec.m2) : spec.bandwidths;
    if (static_cast<Index>(bands.size()) != spec.m2) {
      throw InvalidArgument("need one bandwidth per column of E (m2)");
    }
    inst.E = partitioned_subband_basis(spec.n, bands, derive_seed(spec.seed, 1)).E();
    files.y_kind = "subband";
    files.y0 = sample_nonvanishing_vector(spec.m2, derive_seed(spec.seed, 3));
  } else {
    inst.E = sample_generic_matrix(spec.n, spec.m2, derive_seed(spec.seed, 1));
    if (spec.mode == Mode::sparsity) {
      if (spec.s2 < 1 || spec.s2 > spec.m2) throw InvalidArgument("s2 must lie in [1, m2]");
      inst.y_constraint = ConstraintSpec::sparse(spec.s2);
      files.y_kind = "sparse";
      files.y0 = sample_sparse_vector(spec.m2, spec.s2, derive_seed(spec.seed, 3));
    } else {
      files.y_kind = "subspace";
      files.y0 = sample_generic_vector(spec.m2, derive_seed(spec.seed, 3));
    }
  }
  save_instance(dir, files);
  return files;
}

}  // namespace blindid
