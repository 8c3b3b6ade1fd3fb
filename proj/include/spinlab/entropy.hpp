#pragma once

#include "spinlab/dynamics.hpp"

namespace spinlab {

// Ent(f) = mu[f log(f / mu f)], natural log, 0 log 0 = 0. Throws if mu[f] = 0.
double entropy(const GibbsTable& t, const VectorXd& f);
double entropy(const VectorXd& probs, const VectorXd& f);

// mu[Ent_B f] via the fiber decomposition over sigma_{V\B}.
double conditional_entropy_avg(const GibbsTable& t, const std::vector<int>& block,
                               const VectorXd& f);
double conditional_entropy_avg(const GibbsTable& t, const FiberIndex& fibers, const VectorXd& f);

// D_P(f,g) = <f, (I-P)g>_mu.
double dirichlet_form(const Kernel& k, const VectorXd& f, const VectorXd& g);
// Reversible sum form (1/2) sum mu_i P_ij (f_i-f_j)(g_i-g_j).
double dirichlet_form_sum(const Kernel& k, const VectorXd& f, const VectorXd& g);
// sum_B alpha_B mu[cov_B(f,g)].
double block_covariance_form(const GibbsTable& t, const BlockWeights& alpha, const VectorXd& f,
                             const VectorXd& g);

// Nonnegative test functions for ratio measurements.
enum class TestFunctionStyle { mixed, positive };
std::vector<VectorXd> random_test_functions(Index dim, int count, Rng rng,
                                            TestFunctionStyle style = TestFunctionStyle::mixed);

struct Functional {
  enum class Kind { AT, GBF, UBF, kpartite, subadditivity } kind;
  BlockWeights alpha;      // GBF
  int ell = 1;             // UBF
  Partition partition;     // kpartite
  static Functional at() { return {Kind::AT, {}, 1, {}}; }
  static Functional gbf(BlockWeights a) { return {Kind::GBF, std::move(a), 1, {}}; }
  static Functional ubf(int ell) { return {Kind::UBF, {}, ell, {}}; }
  static Functional kpart(Partition p) { return {Kind::kpartite, {}, 1, std::move(p)}; }
  static Functional subadd() { return {Kind::subadditivity, {}, 1, {}}; }
  std::string name() const;
};

// measured_C_lower = max over the batch of LHS/RHS for the chosen entropy
// inequality; a certified lower bound on the optimal constant, never the
// optimum itself. Degenerate f (Ent < 1e-13) are skipped and counted.
struct FactorizationReport {
  std::string functional;
  double measured_C_lower = 0;
  int num_functions = 0;
  int num_skipped = 0;
  VectorXd worst_f;
  double witness_lhs = 0, witness_rhs = 0;
  double theorem_C = kNaN;
  bool sampled = false;
  std::string to_json() const;
};
FactorizationReport measure_factorization(const GibbsTable& t, const Functional& fn,
                                          const std::vector<VectorXd>& fs,
                                          int hill_climb_budget = 200, Rng rng = Rng(1),
                                          const Caps& caps = Caps::from_env());
// (LHS, RHS) of the functional for one f.
std::pair<double, double> factorization_sides(const GibbsTable& t, const Functional& fn,
                                              const VectorXd& f, const Caps& caps = Caps::from_env());

struct BrascampLiebResult {
  double lhs = 0, rhs = 0;
  bool holds = false;
};
// mu(prod phi_x(sigma_x)) <= prod mu(|phi_x|^C)^{1/C}; phis is n x q.
BrascampLiebResult brascamp_lieb_check(const GibbsTable& t, double C, const MatrixXd& phis);

// delta = 1 - sup_nu H(nu P | mu)/H(nu | mu), estimated by point-mass seeds,
// random starts and projected gradient ascent on the simplex. The reported
// value is an upper bound on the true decay rate (the sup is approached from
// below).
struct DecayRateResult {
  double delta = 0;
  double best_ratio = 0;
  VectorXd best_nu;
  bool converged = true;
};
DecayRateResult entropy_decay_rate(const Kernel& k, Rng rng, int random_starts = 24,
                                   int ascent_iters = 400);

struct MlsiResult {
  double min_margin = 0;  // min over f of D(f, log f) - rho Ent(f)
  int checked = 0;
  bool pass = false;
};
MlsiResult mlsi_check(const Kernel& k, double rho, const std::vector<VectorXd>& fs,
                      double tol = 1e-9);
// Standard log-Sobolev companion: D(sqrt f, sqrt f) >= s Ent(f).
MlsiResult lsi_check(const Kernel& k, double s, const std::vector<VectorXd>& fs,
                     double tol = 1e-9);

struct MixingResult {
  Index t_mix = -1;
  double bound = kNaN;       // 1 + (1/delta)(log 8 + log log 1/mu_*)
  bool bound_holds = false;
  bool converged = true;
};
MixingResult exact_mixing_time(const Kernel& k, double delta_for_bound = kNaN,
                               Index iteration_cap = 100000);

// Local two-point entropy inequality and its global consequences.
struct RecursionReport {
  int n = 0;
  double eta = 0, b = 0;
  int R = 0;  // ceil(2 eta / b)
  std::vector<double> alpha_theory;      // k = 0..n-2
  std::vector<double> alpha_measured;    // min empirical ratio - 1 per k
  std::vector<double> gamma_prod;        // Gamma_i = prod alpha_theory
  std::vector<double> kappa_theory;      // j = 1..n-1 (index j-1)
  double local_min_margin = 0;           // two-point inequality with alpha_theory
  double kappa_fallingfactorial_min_margin = 0;
  double global_c_min_margin = 0;        // (n/l) Av Ent(mu^U f) <= (R+1) Ent f
  double global_kappa_min_margin = 0;    // kappa_{n-l} Ent f <= Av mu[Ent_L f]
  bool sampled = false;
};
RecursionReport recursion_quantities(const GibbsTable& master, double eta, double b,
                                     const std::vector<VectorXd>& fs,
                                     const Caps& caps = Caps::from_env());

struct PinskerResult {
  double var = 0, ent = 0, margin = 0;
  bool holds = false;
};
// var(mu^{tau,x} f) <= (2/b) Ent(mu^{tau,x} f) after normalizing mu[f] = 1.
PinskerResult pinsker_variance_bound(const GibbsTable& t, int x, const VectorXd& f, double b);

double spectral_gap(const Kernel& k);  // 1 - lambda_2 of the reversible kernel

}  // namespace spinlab
