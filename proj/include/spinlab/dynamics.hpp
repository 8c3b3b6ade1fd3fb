#pragma once

#include <array>

#include "spinlab/kernel.hpp"

namespace spinlab {

// Distribution over update blocks. Blocks must be nonempty; probabilities sum
// to 1. If the union misses a vertex, coverage_delta is 0 and a warning flag
// is set at construction.
struct BlockWeights {
  std::vector<std::vector<int>> blocks;
  VectorXd probs;
  bool covers_all = true;

  static BlockWeights make(std::vector<std::vector<int>> blocks, VectorXd probs, int n);
  static BlockWeights uniform_singletons(int n);
  static BlockWeights single_block(int n);
  static BlockWeights from_partition(const Partition& p);
  static BlockWeights uniform_subsets(int n, int ell);  // all ell-subsets
};

double coverage_delta(const BlockWeights& alpha, int n);

// Single-site heat-bath chain; pinned vertices may be selected and are no-ops.
Kernel glauber(const TablePtr& table, bool build_matrix = true);
// Variant selecting only unpinned vertices (analysis flag, not the default).
Kernel glauber_unpinned_only(const TablePtr& table, bool build_matrix = true);

Kernel block_dynamics(const TablePtr& table, const BlockWeights& alpha, bool build_matrix = true);

struct FlipParams {
  // p[s] for component size s = 1..6; p_s = 0 beyond.
  std::array<double, 7> p{0, 1, 0, 0, 0, 0, 0};
  std::string source;

  static FlipParams load(const std::string& json_path);
  static FlipParams single_vertex_only();  // p = (1,0,0,0,0,0)
};
// Kempe-component flip chain for colorings; components touching a pinned
// vertex freeze the step.
Kernel flip_dynamics(const TablePtr& table, const FlipParams& params, bool build_matrix = true);

// Monochromatic-edge percolation with p = 1 - e^{-beta} plus uniform component
// recoloring. Requires ferromagnetic Ising/Potts with spin-independent fields
// and no pinning. Exact matrix comes from the joint-measure two-step
// composition.
Kernel swendsen_wang(const TablePtr& table, bool build_matrix = true);

// Generic select-update chain: a state-dependent selector over registered
// blocks and an arbitrary per-block update rule. Stationarity of the exact
// matrix is verified at construction and failure throws.
struct SelectUpdate {
  std::vector<std::vector<int>> blocks;
  // selection distribution over blocks, given the current state index
  std::function<VectorXd(Index)> selector;
  // distribution over next states, given state index and chosen block
  std::function<VectorXd(Index, int)> updater;
};
Kernel select_update(const TablePtr& table, const SelectUpdate& su,
                     double stationarity_tol = 1e-9);

// Heat-bath updater on a fixed block (resamples the block from the
// conditional), for building select-update instances.
VectorXd heat_bath_update_row(const GibbsTable& table, const std::vector<int>& block, Index state);

}  // namespace spinlab
