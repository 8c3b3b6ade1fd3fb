#pragma once

#include "spinlab/contraction.hpp"
#include "spinlab/edwards_sokal.hpp"
#include "spinlab/entropy.hpp"
#include "spinlab/report.hpp"

namespace spinlab {

struct ModelSpec {
  std::string kind;  // ising | potts | hardcore | colorings | general
  double beta = 0, h = 0, lambda = 1;
  int q = 2;
  MatrixXd interaction;       // general
  std::string graph_path;    // file-based
  std::string family;        // generator-based
  std::vector<long> family_params;
  std::uint64_t graph_seed = 1;
  std::vector<std::pair<int, int>> boundary;  // (vertex, spin 0-based)
  std::string describe() const;
};

struct ExperimentConfig {
  ModelSpec model;
  std::vector<std::string> suites;
  Caps caps = Caps::from_env();
  std::uint64_t seed = 1;
  std::string json_out, csv_out;
  std::string flip_params_path;

  static ExperimentConfig load(const std::string& path);
  static ExperimentConfig from_json_text(const std::string& text, const std::string& base_dir);
};

struct Instance {
  std::string name;
  std::shared_ptr<const SpinSystem> sys;
  TablePtr table;
};

Instance make_instance(const ModelSpec& spec, const Caps& caps);
std::vector<std::string> known_suites();

// Executes the configured suites in order; deterministic given the root seed.
Report run(const ExperimentConfig& config);

struct SweepPoint {
  std::string label;
  double param_value = kNaN;
  double eta = kNaN, kappa = kNaN, delta = kNaN;
  double t_mix = kNaN;
  bool ok = false;
  std::string error;
  Report report;
};
struct SweepResult {
  std::vector<SweepPoint> points;
  std::string to_csv() const;
};
SweepResult sweep(const ExperimentConfig& config, const std::string& parameter,
                  const std::vector<std::string>& grid);

std::vector<std::string> parse_grid(const std::string& grid_spec);

// Individual suites (exposed for the acceptance harness).
std::vector<CheckRecord> suite_exactness(const Instance&, const Caps&, Rng);
std::vector<CheckRecord> suite_contraction_si(const Instance&, const Caps&, Rng);
std::vector<CheckRecord> suite_dobrushin_si(const Instance&, const Caps&, Rng);
std::vector<CheckRecord> suite_stein(const Instance&, const Caps&, Rng, int cases = 200);
std::vector<CheckRecord> suite_entropy_identities(const Instance&, const Caps&, Rng,
                                                  int draws = 2000);
std::vector<CheckRecord> suite_factorization(const Instance&, const Caps&, Rng,
                                             int batch = 300);
std::vector<CheckRecord> suite_recursion(const Instance&, const Caps&, Rng, int batch = 200);
std::vector<CheckRecord> suite_pinsker(const Instance&, const Caps&, Rng, int batch = 2000);
std::vector<CheckRecord> suite_block_decay(const Instance&, const Caps&, Rng, int n_alpha = 5,
                                           int batch = 300);
std::vector<CheckRecord> suite_sw_chain(const Instance&, const Caps&, Rng, int batch = 300);
std::vector<CheckRecord> suite_sampler_fidelity(const Instance&, const Caps&, Rng,
                                                const std::string& flip_params_path,
                                                Index steps = 1000000);
std::vector<CheckRecord> suite_spectral_gap(const Instance&, const Caps&, Rng, int n_alpha = 5);
std::vector<CheckRecord> suite_mixing(const Instance&, const Caps&, Rng);
std::vector<CheckRecord> suite_sweep_metrics(const Instance&, const Caps&, Rng);

}  // namespace spinlab
