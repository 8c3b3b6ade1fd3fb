#include "spinlab/kernel.hpp"

#include <cmath>

namespace spinlab {

KernelChecks kernel_checks(const Kernel& k) {
  if (!k.has_matrix()) throw std::invalid_argument("kernel_checks: matrix not built");
  KernelChecks out;
  const MatrixXd& P = k.P;
  const VectorXd& mu = k.stationary();
  out.row_sum_error = (P.rowwise().sum().array() - 1.0).abs().maxCoeff();
  VectorXd muP = P.transpose() * mu;
  out.stationarity_tv = tv_distance(muP, mu);
  double rev = 0;
  for (Index i = 0; i < P.rows(); ++i)
    for (Index j = i + 1; j < P.cols(); ++j)
      rev = std::max(rev, std::abs(mu[i] * P(i, j) - mu[j] * P(j, i)));
  out.reversibility_error = rev;
  return out;
}

SamplerFidelity sampler_fidelity(const Kernel& k, const Config& start, Index steps, Rng rng) {
  if (!k.has_matrix()) throw std::invalid_argument("sampler_fidelity: matrix not built");
  if (!k.step) throw std::invalid_argument("sampler_fidelity: no sampler");
  Index row = k.space->find(start);
  if (row < 0) throw std::invalid_argument("sampler_fidelity: start state not in space");
  VectorXd counts = VectorXd::Zero(k.size());
  for (Index s = 0; s < steps; ++s) {
    Config next = k.step(start, rng);
    Index j = k.space->find(next);
    if (j < 0) throw std::runtime_error("sampler_fidelity: sampler left the state space");
    counts[j] += 1;
  }
  SamplerFidelity out;
  out.steps = steps;
  for (Index j = 0; j < k.size(); ++j) {
    double p = k.P(row, j);
    double phat = counts[j] / double(steps);
    double se = std::sqrt(std::max(p * (1 - p), 1e-300) / double(steps));
    double z = std::abs(phat - p) / se;
    if (p == 0) z = counts[j] > 0 ? std::numeric_limits<double>::infinity() : 0;
    if (z > out.max_z) {
      out.max_z = z;
      out.worst_entry = j;
    }
  }
  return out;
}

}  // namespace spinlab
