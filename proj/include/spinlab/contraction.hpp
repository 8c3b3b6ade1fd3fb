#pragma once

#include <optional>

#include "spinlab/dynamics.hpp"
#include "spinlab/transport.hpp"

namespace spinlab {

enum class PairMode { all_pairs, adjacent_pairs };

// kappa(sigma,tau) = W1(P(sigma,.), P(tau,.)) / d(sigma,tau), maximized over
// examined pairs; the optimal coupling computed by exact transport witnesses
// the contraction definition. adjacent_pairs restricts to Hamming distance 1
// (a path-coupling surrogate, upper-bound-only for non-path metrics).
struct ContractionReport {
  double kappa = 0;
  PairMode mode = PairMode::all_pairs;
  std::string metric_desc;
  Index pairs = 0;
  Index worst_i = -1, worst_j = -1;
  Pinning worst_pinning;
  std::vector<std::pair<Pinning, double>> per_pinning;
  bool pinning_sweep = false;
  bool sampled = false;
  bool surrogate = false;  // adjacent mode under a non-path metric
};

ContractionReport measure_kappa(const Kernel& k, const Metric& m,
                                PairMode mode = PairMode::all_pairs,
                                const Caps& caps = Caps::from_env());

using KernelBuilder = std::function<Kernel(const TablePtr&)>;

// Max over all pinnings (with at least two conditional states) of the
// per-pinning kappa; this is the quantity the contraction definition asks for.
ContractionReport measure_kappa_sweep(const GibbsTable& master, const KernelBuilder& build,
                                      const Metric& m, PairMode mode = PairMode::all_pairs,
                                      const Caps& caps = Caps::from_env());

// Phi = max over sigma in Omega^{tau'} of W1_Hamming(P^tau(sigma,.),
// P^{tau'}(sigma,.)) for tau' = tau + (x,a).
struct LocalityReport {
  double phi = 0;
  Index worst_state = -1;
};
LocalityReport measure_locality_phi(const GibbsTable& master, const KernelBuilder& build,
                                    const Pinning& tau, int x, int a);

enum class EtaBoundKind { glauber_weighted, glauber_gamma, general };
// Closed-form spectral-independence bounds from contraction.
double predicted_eta(EtaBoundKind kind, double kappa, int n, double gamma = 1.0, double phi = 0.0);

struct SteinReport {
  double lhs = 0;           // |E_mu f - E_nu f|
  double rhs = 0;           // L_d(f)/(1-kappa) * E_nu[W1(P(s,.),Q(s,.))]
  double kappa = 0;
  double lipschitz = 0;
  double expected_w1 = 0;
  bool holds = false;
};
// Stationary-distribution comparison bound: requires kappa < 1 for P. f is
// indexed on P's state space; Q's states must embed in it.
SteinReport verify_stein_bound(const Kernel& P, const Kernel& Q, const Metric& m,
                               const VectorXd& f, double kappa_precomputed = kNaN,
                               double expected_w1_precomputed = kNaN);

// Signed test function whose mean gap under (mu, mu^{(x,a)}) equals the
// absolute influence sum S(x,a).
VectorXd influence_sign_function(const InfluenceMatrix& J, int x, int a, const GibbsTable& space);

// Positive w with Rw <= (1-eps)w entrywise, from Perron vectors of
// R + delta*ones for decreasing delta; nullopt if rho(R) > 1-eps or no
// verified vector is found.
struct ContractionWeights {
  VectorXd w;
  double slack = 0;  // min over x of (1-eps)w_x - (Rw)_x
};
std::optional<ContractionWeights> dobrushin_contraction_weights(const MatrixXd& R, double eps);

// Row absolute influence sums S(x,a), optionally w-weighted (divided by w(x)).
struct InfluenceSums {
  std::vector<double> s;  // aligned with J.index
  double max_s = 0;
  double lambda1_value = 0;
  bool lambda1_dominated = false;  // lambda1 <= max_s + tol
};
InfluenceSums sum_absolute_influence(const InfluenceMatrix& J,
                                     const VectorXd& vertex_weights = VectorXd());

}  // namespace spinlab
