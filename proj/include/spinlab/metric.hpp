#pragma once

#include "spinlab/gibbs.hpp"
#include "spinlab/rng.hpp"

namespace spinlab {

// Metric on configuration space. Custom metrics are tables of pairwise
// distances over an enumerated state list and carry a gamma tag when they are
// gamma-equivalent to Hamming.
struct Metric {
  enum class Kind { hamming, weighted_hamming, custom };
  Kind kind = Kind::hamming;
  VectorXd w;                         // weighted_hamming
  MatrixXd D;                         // custom, indexed by position in `codes`
  std::vector<std::uint64_t> codes;   // ascending codes of the carrier space
  int q = 0;
  double gamma = 1.0;

  double operator()(const Config& a, const Config& b) const;
  std::string describe() const;

  static Metric hamming();
  static Metric weighted(VectorXd w);
  static Metric custom(const GibbsTable& space, MatrixXd D, double gamma);
  // Per-pair draws in [d_H/spread, spread*d_H] metricized by shortest paths;
  // spread <= gamma, so the result is a gamma-equivalent metric (spread
  // defaults to the full envelope).
  static Metric random_gamma_equivalent(const GibbsTable& space, double gamma, Rng rng,
                                        double spread = 0);
};

double lipschitz_constant(const Metric& m, const GibbsTable& space, const VectorXd& f);

struct MetricCheck {
  bool ok = true;
  double max_violation = 0;
  std::string what;
};
// Exhaustive axioms (symmetry, identity, triangle) plus the gamma envelope.
MetricCheck validate_metric(const Metric& m, const GibbsTable& space);

// McShane projection g(i) = min_j f(j) + d(i,j); 1-Lipschitz for any f.
VectorXd lipschitz_projection(const Metric& m, const GibbsTable& space, const VectorXd& f);

}  // namespace spinlab
