#pragma once

#include "spinlab/kernel.hpp"

namespace spinlab {

// Joint spin-edge state: a spin state (by index into the spin table) plus a
// subset of edges, each kept edge monochromatic under the spin state.
struct JointState {
  Index spin;
  std::uint32_t edge_set;
};

struct JointTable {
  TablePtr spin_table;
  std::vector<JointState> states;
  VectorXd probs;
  double log_partition = kNegInf;  // matches the spin log-partition
  double p = 0;                    // 1 - e^{-beta}
  int num_edges = 0;

  Index size() const { return Index(states.size()); }
};

// Enumerates (sigma, A) lazily per spin state over subsets of the
// monochromatic edges. Requires ferromagnetic Ising/Potts, uniform fields,
// no pinning.
JointTable enumerate_joint(const TablePtr& spin_table, const Caps& caps = Caps::from_env());

std::uint32_t monochromatic_edges(const SpinSystem& sys, const Config& sigma);
int component_count(const Graph& g, std::uint32_t edge_set);

// Exact spin-space matrix of the percolation/recoloring chain as the
// composition of the two joint-measure conditionals (spin->edge, edge->spin).
MatrixXd sw_step_composition(const JointTable& joint);

VectorXd joint_spin_marginal(const JointTable& joint);
VectorXd joint_edge_marginal(const JointTable& joint);  // over all 2^|E| edge sets

// Entropy machinery on the joint table.
double joint_entropy(const JointTable& joint, const VectorXd& f);
double joint_avg_entropy_given_spin(const JointTable& joint, const VectorXd& f);
double joint_avg_entropy_given_edges(const JointTable& joint, const VectorXd& f);
// condition on (spins outside V_j, edges); and on spins outside V_j alone
double joint_avg_entropy_given_outside_and_edges(const JointTable& joint,
                                                 const std::vector<int>& cls,
                                                 const VectorXd& f);
double joint_avg_entropy_given_outside(const JointTable& joint, const std::vector<int>& cls,
                                       const VectorXd& f);
// nu[f | sigma] as a spin-state-indexed vector
VectorXd joint_spin_projection(const JointTable& joint, const VectorXd& f);

struct SpinEdgeFactorization {
  double C_lower = 0;
  int used = 0, skipped = 0;
  VectorXd worst_f;
  double witness_lhs = 0, witness_rhs = 0;
};
SpinEdgeFactorization spin_edge_factorization(const JointTable& joint,
                                              const std::vector<VectorXd>& fs);

struct KPartiteJointReport {
  double lemma_mono_min_margin = 0;   // edge-term >= conditioned edge-term, per class
  double delta1_hat = kNaN;           // min ratio of the two-term local bound
  double delta2_hat = kNaN;           // min ratio of class-sum vs total entropy
  double composed_min_margin = 0;     // spin+edge >= (d1 d2 / k) Ent, with measured deltas
  int used = 0, skipped = 0;
};
KPartiteJointReport kpartite_joint_checks(const JointTable& joint, const Partition& partition,
                                          const std::vector<VectorXd>& fs);

}  // namespace spinlab
