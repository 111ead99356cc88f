#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "blindid/errors.hpp"
#include "blindid/experiment.hpp"
#include "blindid/identifiability.hpp"
#include "blindid/matrix_io.hpp"

using namespace blindid;

namespace {

struct Flags {
  std::string config;
  std::string mode;
  std::string n;
  Index m1 = 0, m2 = 0, s1 = 0, s2 = 0;
  std::string bandwidths;
  Index trials = 0;
  std::uint64_t seed = 0;
  double tol = 0.0;
  std::string out;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "key = value file; explicit flags take precedence");
  cmd->add_option("--mode", f.mode, "subspace, mixed, sparsity, subband or subband_mixed");
  cmd->add_option("--n", f.n, "signal length; for phase a range a:b, a..b or list a,b,c");
  cmd->add_option("--m1", f.m1);
  cmd->add_option("--m2", f.m2);
  cmd->add_option("--s1", f.s1);
  cmd->add_option("--s2", f.s2);
  cmd->add_option("--bandwidths", f.bandwidths, "band split a,b,c");
  cmd->add_option("--trials", f.trials);
  cmd->add_option("--seed", f.seed);
  cmd->add_option("--tol", f.tol, "relative singular value tolerance");
  cmd->add_option("--out", f.out, "output file or directory");
}

bool given(const CLI::App* cmd, const char* name) { return cmd->count(name) > 0; }

ExperimentConfig resolve(const CLI::App* cmd, const Flags& f) {
  ExperimentConfig c;
  if (!f.config.empty()) c = config_from_key_values(load_key_values(f.config), f.config);
  if (given(cmd, "--mode")) c.mode = parse_mode(f.mode);
  if (given(cmd, "--n")) c.n_values = parse_index_list(f.n);
  if (given(cmd, "--m1")) c.m1 = f.m1;
  if (given(cmd, "--m2")) c.m2 = f.m2;
  if (given(cmd, "--s1")) c.s1 = f.s1;
  if (given(cmd, "--s2")) c.s2 = f.s2;
  if (given(cmd, "--bandwidths")) c.bandwidths = parse_index_list(f.bandwidths);
  if (given(cmd, "--trials")) c.trials = f.trials;
  if (given(cmd, "--seed")) c.base_seed = Seed{f.seed};
  if (given(cmd, "--tol")) c.tolerance = f.tol;
  return c;
}

InstanceSpec single_instance(const ExperimentConfig& c) {
  if (c.n_values.size() != 1) throw InvalidArgument("exactly one n value is required");
  return {c.mode, c.n_values.front(), c.m1, c.m2, c.s1, c.s2, c.bandwidths, c.base_seed};
}

int run_phase(const CLI::App* cmd, const Flags& f) {
  const ExperimentConfig c = resolve(cmd, f);
  const auto rows = run_phase_transition(c);
  if (f.out.empty()) {
    write_phase_csv(std::cout, rows);
  } else {
    std::ofstream os(f.out);
    if (!os) throw Error("cannot write " + f.out);
    write_phase_csv(os, rows);
  }
  return 0;
}

int run_lemmas(const CLI::App* cmd, const Flags& f) {
  const ExperimentConfig c = resolve(cmd, f);
  const auto rows = run_lemma_suite(c.base_seed, c.trials);
  write_lemma_table(std::cout, rows);
  for (const auto& r : rows) {
    if (!r.ok()) return 1;
  }
  return 0;
}

int run_make_instance(const CLI::App* cmd, const Flags& f) {
  if (f.out.empty()) throw InvalidArgument("--out <dir> is required");
  const InstanceFiles files = make_instance(single_instance(resolve(cmd, f)), f.out);
  std::cout << "wrote " << f.out << " (n=" << files.instance.n() << ", m1=" << files.instance.m1()
            << ", m2=" << files.instance.m2() << ")\n";
  return 0;
}

// Generates a partitioned sub-band instance and writes it together with the
// second solution to --out.
int run_counterexample(const CLI::App* cmd, const Flags& f) {
  if (f.out.empty()) throw InvalidArgument("--out <dir> is required");
  ExperimentConfig c = resolve(cmd, f);
  if (!given(cmd, "--mode") && c.mode == Mode::subspace) c.mode = Mode::subband;
  if (c.mode != Mode::subband && c.mode != Mode::subband_mixed) {
    throw InvalidArgument("counterexamples exist only for the sub-band modes");
  }
  make_instance(single_instance(c), f.out);
  CheckOptions options;
  options.mode = c.mode;
  options.counterexample = true;
  options.tolerance = c.tolerance;
  return run_check(f.out, options, std::cerr).exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Identifiability certificates and counterexamples for blind deconvolution"};
  app.require_subcommand(1);

  std::string dir;
  std::string check_mode;
  CheckOptions check_options;
  double check_tol = 0.0;
  std::string check_out;
  auto* check = app.add_subcommand("check", "certify or refute one instance directory");
  check->add_option("dir", dir, "instance directory")->required();
  check->add_option("--mode", check_mode, "override the mode implied by instance.cfg");
  check->add_flag("--counterexample", check_options.counterexample,
                  "construct a second solution when not certified");
  check->add_option("--tol", check_tol, "relative singular value tolerance");
  check->add_option("--out", check_out, "directory for report.txt and witness files");

  Flags phase_flags, lemma_flags, cx_flags, make_flags;
  auto* phase = app.add_subcommand("phase", "Monte Carlo phase transition sweep (CSV)");
  add_common(phase, phase_flags);
  auto* lemmas = app.add_subcommand("lemmas", "structured witnesses and generic draws");
  add_common(lemmas, lemma_flags);
  auto* cx = app.add_subcommand("counterexample", "sub-band instance plus second solution");
  add_common(cx, cx_flags);
  auto* make = app.add_subcommand("make-instance", "write a random instance directory");
  add_common(make, make_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInputError;
  }

  try {
    if (*check) {
      if (!check_mode.empty()) check_options.mode = parse_mode(check_mode);
      if (check->count("--tol")) check_options.tolerance = check_tol;
      check_options.out = check_out;
      return run_check(dir, check_options, std::cerr).exit_code;
    }
    if (*phase) return run_phase(phase, phase_flags);
    if (*lemmas) return run_lemmas(lemmas, lemma_flags);
    if (*cx) return run_counterexample(cx, cx_flags);
    if (*make) return run_make_instance(make, make_flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  return kExitInputError;
}
