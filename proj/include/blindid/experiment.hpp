#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "blindid/identifiability.hpp"
#include "blindid/matrix_io.hpp"
#include "blindid/types.hpp"

namespace blindid {

enum class Mode { subspace, mixed, sparsity, subband, subband_mixed };

std::string to_string(Mode m);
/// Throws InvalidArgument for unknown names.
Mode parse_mode(const std::string& name);

struct ExperimentConfig {
  Mode mode = Mode::subspace;
  std::vector<Index> n_values;
  Index m1 = 0;
  Index m2 = 0;
  Index s1 = 0;  // 0: not used by the mode
  Index s2 = 0;
  /// Fixed band split for sub-band modes; when empty each n is split evenly.
  std::vector<Index> bandwidths;
  Index trials = 100;
  Seed base_seed{};
  std::optional<double> tolerance;

  RankTolerance rank_tolerance() const;
};

/// Accepts "a:b", "a..b" (inclusive) or "a,b,c".
std::vector<Index> parse_index_list(const std::string& text);

/// Builds a config from "key = value" pairs (mode, n, m1, m2, s1, s2,
/// bandwidths, trials, seed, tol). Unknown keys are rejected.
ExperimentConfig config_from_key_values(const KeyValues& kv, const std::string& source);

/// Throws InvalidArgument describing the first problem.
void validate_config(const ExperimentConfig& config);

/// Smallest n at which the relevant sufficiency result certifies almost
/// every draw.
Index certified_threshold(const ExperimentConfig& config);

/// Seed of trial t: base_seed + t.
inline Seed trial_seed(Seed base, Index t) { return Seed{base.value + static_cast<std::uint64_t>(t)}; }

/// Sub-stream used when a generic trial is re-drawn.
inline constexpr std::uint64_t kRedrawStream = 0x7265647261770000ULL;

struct TrialOutcome {
  bool success = false;
  bool redrawn = false;
};

/// Runs `trial` once; if it fails and `generic_expected`, re-draws once with
/// a tagged seed. Success requires one of the two draws to pass.
TrialOutcome run_with_redraw(const std::function<bool(Seed)>& trial, Seed seed,
                             bool generic_expected);

struct GenericTally {
  Index trials = 0;
  Index successes = 0;
  Index redraws = 0;
};

GenericTally tally_trials(const std::function<bool(Seed)>& trial, Index trials, Seed base,
                          bool generic_expected);

/// One fresh draw of the configured mode at signal length n; true iff the
/// matching checker certifies it.
bool certify_random_draw(const ExperimentConfig& config, Index n, Seed seed);

struct PhaseRow {
  Index n = 0, m1 = 0, m2 = 0, s1 = 0, s2 = 0;
  Index trials = 0;
  Index successes = 0;
  double rate = 0.0;
};

std::vector<PhaseRow> run_phase_transition(const ExperimentConfig& config);

/// Header "n,m1,m2,s1,s2,trials,successes,rate", rate with 6 decimals.
void write_phase_csv(std::ostream& os, const std::vector<PhaseRow>& rows);

// --- structured witnesses and generic draws -------------------------------

bool lifted_rank_generic_trial(Index n, Index m1, Index m2, Seed seed, RankTolerance tol = {});
bool lifted_rank_witness(Index n, Index m1, Index m2, Seed seed, RankTolerance tol = {});

/// D has 2 s1 - t1 columns; J0 and J overlap in t1 indices.
bool mixed_blocks_generic_trial(Index n, Index s1, Index m2, Index t1, Seed seed,
                           RankTolerance tol = {});
bool mixed_blocks_witness(Index n, Index s1, Index m2, Index t1, Seed seed, RankTolerance tol = {});

bool sparsity_blocks_generic_trial(Index n, Index s1, Index s2, Index t1, Index t2, Seed seed,
                           RankTolerance tol = {});
bool sparsity_blocks_witness(Index n, Index s1, Index s2, Index t1, Index t2, Seed seed,
                     RankTolerance tol = {});

struct LemmaRow {
  std::string family;
  std::string setting;
  std::string kind;  // witness, generic, expected-fail
  Index passes = 0;
  Index total = 0;
  bool expect_pass = true;

  bool ok() const { return expect_pass ? passes == total : passes == 0; }
};

std::vector<LemmaRow> run_lemma_suite(Seed seed, Index trials);
void write_lemma_table(std::ostream& os, const std::vector<LemmaRow>& rows);

// --- instance-level commands ----------------------------------------------

inline constexpr int kExitCertified = 0;
inline constexpr int kExitNotCertified = 1;
inline constexpr int kExitRefuted = 2;
inline constexpr int kExitInputError = 3;

struct CheckOptions {
  std::optional<Mode> mode;
  bool counterexample = false;
  std::optional<double> tolerance;
  std::filesystem::path out;  // defaults to the instance directory
};

struct CheckOutcome {
  int exit_code = kExitInputError;
  std::optional<IdentifiabilityReport> report;
};

/// Loads the instance, dispatches to the matching checker and writes
/// report.txt (plus witness files when refuted). Input errors are printed to
/// `err` and yield kExitInputError.
CheckOutcome run_check(const std::filesystem::path& instance_dir, const CheckOptions& options,
                       std::ostream& err);

struct InstanceSpec {
  Mode mode = Mode::subspace;
  Index n = 0, m1 = 0, m2 = 0, s1 = 0, s2 = 0;
  std::vector<Index> bandwidths;
  Seed seed{};
};

/// Generates D, E, x0, y0 for the mode (sub-band modes use a partitioned
/// basis) and writes them to `dir`.
InstanceFiles make_instance(const InstanceSpec& spec, const std::filesystem::path& dir);

/// Mode implied by an instance's constraint kinds.
Mode mode_of(const InstanceFiles& files);

}  // namespace blindid
