#pragma once

#include "spinlab/gibbs.hpp"
#include "spinlab/rng.hpp"

namespace spinlab {

struct KernelMeta {
  std::string name;
  double max_block_size = 1;      // M
  double max_selection_prob = 1;  // D
};

// Markov transition operator: always a streaming sampler, plus the exact
// dense matrix on the table's state order when built.
struct Kernel {
  TablePtr space;
  MatrixXd P;  // rows sum to 1; empty if not built
  std::function<Config(const Config&, Rng&)> step;
  KernelMeta meta;

  bool has_matrix() const { return P.size() > 0; }
  Index size() const { return space->size(); }
  const VectorXd& stationary() const { return space->probs; }
};

struct KernelChecks {
  double row_sum_error = 0;       // max |row sum - 1|
  double stationarity_tv = 0;     // ||mu P - mu||_TV
  double reversibility_error = 0; // max |mu_i P_ij - mu_j P_ji|
};
KernelChecks kernel_checks(const Kernel& k);

// Empirical one-step law from `steps` sampler draws out of `start`, compared
// to the matrix row entrywise in units of the binomial standard error.
struct SamplerFidelity {
  double max_z = 0;      // max |phat - p| / se
  Index worst_entry = -1;
  Index steps = 0;
};
SamplerFidelity sampler_fidelity(const Kernel& k, const Config& start, Index steps, Rng rng);

}  // namespace spinlab
