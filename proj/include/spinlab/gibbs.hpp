#pragma once

#include <memory>

#include "spinlab/model.hpp"

namespace spinlab {

// Exact enumerated conditional Gibbs distribution. States are full-length
// configurations in lexicographic order; probabilities are renormalized
// exponentials of log-weights with a shared max-log shift.
struct GibbsTable {
  std::shared_ptr<const SpinSystem> sys;
  Pinning pinning;
  std::vector<Config> states;
  std::vector<std::uint64_t> codes;  // ascending, parallel to states
  VectorXd probs;
  VectorXd log_weights;
  double log_partition = kNegInf;
  std::vector<int> free_vertices;

  int n() const { return sys->n(); }
  int q() const { return sys->q; }
  Index size() const { return Index(states.size()); }
  Index find(const Config& c) const;
  Index find_code(std::uint64_t code) const;  // -1 if absent
  double marginal(int x, int a) const;        // x must be unpinned
  MatrixXd vertex_marginals() const;          // n x q; pinned rows are point masses
  double min_positive_prob() const;
};

using TablePtr = std::shared_ptr<const GibbsTable>;

TablePtr enumerate(std::shared_ptr<const SpinSystem> sys, const Pinning& tau = {},
                   const Caps& caps = Caps::from_env());
// Filter + renormalize an existing table under an extra pinning.
TablePtr restrict_table(const TablePtr& table, const Pinning& extra);

// Fibers of the conditioning on sigma_{V \ B}: states sharing all digits
// outside B. Fiber ids follow first appearance in state order.
struct FiberIndex {
  std::vector<int> fiber_of;
  std::vector<double> fiber_prob;
  int count = 0;
};
FiberIndex make_fibers(const GibbsTable& t, const std::vector<int>& block);

// sigma -> mu(f | sigma_{V\B}) as a state-indexed vector.
VectorXd conditional_expectation(const GibbsTable& t, const std::vector<int>& block,
                                 const VectorXd& f);
VectorXd conditional_expectation(const GibbsTable& t, const FiberIndex& fibers, const VectorXd& f);

struct InfluenceMatrix {
  std::vector<std::pair<int, int>> index;  // feasible (vertex, spin) pairs
  MatrixXd J;
  VectorXd nu;  // stationary weights mu(sigma_x = a) / #free
  double self_adjoint_residual = 0;
  double block_row_residual = 0;
};
InfluenceMatrix influence_matrix(const GibbsTable& t);
// Largest eigenvalue via the nu-symmetrization D^{1/2} J D^{-1/2}.
double lambda1(const InfluenceMatrix& J);

// Deterministic sweep over all pinnings (all subsets U, all feasible
// assignments = distinct projections of the master table). fn receives the
// pinning and the master-state indices consistent with it.
struct PinningSweep {
  bool sampled = false;
  Index count = 0;
};
PinningSweep for_each_pinning(
    const GibbsTable& master, const Caps& caps,
    const std::function<void(const Pinning&, const std::vector<Index>&)>& fn,
    std::uint64_t sample_seed = 11, bool include_fullpin = false);

struct SpectralIndependence {
  double eta = 0;
  Pinning witness;
  bool sampled = false;
  Index pinnings = 0;
};
SpectralIndependence spectral_independence(const GibbsTable& master,
                                           const Caps& caps = Caps::from_env());

struct MarginalBoundResult {
  double b = 1.0;
  Pinning witness;
  int x = -1, a = -1;
  bool sampled = false;
};
MarginalBoundResult marginal_bound(const GibbsTable& master, const Caps& caps = Caps::from_env());

// Worst-case single-site total-variation influence matrix. Entries condition
// on locally feasible neighborhood configurations of y (pinned vertices held
// at their pinned spin); infeasible pairs are skipped.
MatrixXd dobrushin_matrix(const SpinSystem& sys, const Pinning& tau = {},
                          const Caps& caps = Caps::from_env());

struct SpectralRadiusResult {
  double rho = 0;
  bool converged = true;
  Index iterations = 0;
};
// Perron root by shifted power iteration on R + delta*ones for two small
// delta values, Richardson-extrapolated to delta -> 0.
SpectralRadiusResult spectral_radius(const MatrixXd& R);
// Perron vector of R + delta*ones (strictly positive).
VectorXd perron_vector(const MatrixXd& R, double delta);

// Binary cache of (state code, probability) with a versioned header.
void dump_table(const GibbsTable& t, const std::string& path);
struct TableDump {
  std::uint32_t version = 0;
  int n = 0, q = 0;
  double log_partition = 0;
  std::vector<std::uint64_t> codes;
  VectorXd probs;
};
TableDump load_table_dump(const std::string& path);

}  // namespace spinlab
