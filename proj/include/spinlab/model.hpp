#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "spinlab/graph.hpp"
#include "spinlab/rng.hpp"

namespace spinlab {

enum class ModelKind { ising, potts, hardcore, colorings, general };
std::string to_string(ModelKind k);

// Partial spin assignment; vertices sorted, spins 0-based.
struct Pinning {
  std::vector<std::pair<int, int>> assign;

  static Pinning single(int v, int a) { return Pinning{{{v, a}}}; }
  bool empty() const { return assign.empty(); }
  int size() const { return int(assign.size()); }
  bool pins(int v) const;
  int spin(int v) const;  // -1 if unpinned
  Pinning extended(int v, int a) const;
  std::vector<int> vertices() const;
  // Mixed-radix over (q+1)^n: digit 0 = unpinned, a+1 = pinned to a. Defines
  // the deterministic tie-break order for sweeps.
  std::uint64_t encode(int n, int q) const;
  std::string describe() const;
};

// Gibbs weight w(sigma) = prod_edges A_e(sigma_u, sigma_v) * prod_x B_x(sigma_x),
// with any boundary condition already folded into the vertex fields.
struct SpinSystem {
  Graph graph;
  int q = 2;
  ModelKind kind = ModelKind::general;
  std::vector<MatrixXd> A;      // per interior edge
  std::vector<VectorXd> B;      // per vertex, effective field
  std::vector<MatrixXd> logA;
  std::vector<VectorXd> logB;
  double beta = 0.0;
  double lambda = 0.0;
  VectorXd field_h;             // ising/potts external field parameters
  std::vector<std::string> warnings;

  int n() const { return graph.n; }
  double log_weight(const Config& sigma) const;
  double weight(const Config& sigma) const;
  bool feasible(const Config& sigma) const { return log_weight(sigma) > kNegInf; }
  // Spins locally allowed at x: positive field and, for each pinned neighbor
  // in tau, positive pair interaction.
  bool locally_feasible(int x, int a, const Pinning& tau) const;
};

SpinSystem build_ising(const Graph& g, double beta, double h, const Caps& caps = Caps::from_env());
SpinSystem build_potts(const Graph& g, int q, double beta, const VectorXd& h = VectorXd(),
                       const Caps& caps = Caps::from_env());
SpinSystem build_hardcore(const Graph& g, double lambda, const Caps& caps = Caps::from_env());
SpinSystem build_colorings(const Graph& g, int q, const Caps& caps = Caps::from_env());
// interactions: one matrix per interior edge then per boundary edge, or a
// single matrix shared by all edges.
SpinSystem build_general(const Graph& g, int q, std::vector<MatrixXd> interactions,
                         std::vector<VectorXd> fields = {}, const Caps& caps = Caps::from_env());

// Visit feasible configurations extending tau in lexicographic order.
void for_each_feasible(const SpinSystem& sys, const Pinning& tau,
                       const std::function<void(const Config&, double)>& fn);
Index unpinned_state_space_size(const SpinSystem& sys, const Pinning& tau);

struct Feasibility {
  bool feasible = false;
  bool local_only = false;  // exact oracle unavailable, local positivity used
};
Feasibility check_pinning(const SpinSystem& sys, const Pinning& tau,
                          const Caps& caps = Caps::from_env());

struct ConnectivityResult {
  bool totally_connected = false;
  bool sampled = false;
  Pinning witness;  // a pinning with disconnected flip graph, if any
};
// Flip-graph connectivity of Omega^tau for every pinning (or a sample, flagged).
ConnectivityResult is_totally_connected(const SpinSystem& sys, const Caps& caps = Caps::from_env(),
                                        std::uint64_t sample_seed = 7);

}  // namespace spinlab
