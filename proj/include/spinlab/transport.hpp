#pragma once

#include <tuple>

#include "spinlab/metric.hpp"

namespace spinlab {

// Exact 1-Wasserstein distance by successive shortest augmenting paths on the
// bipartite support graph, with an explicit optimal coupling and dual
// potentials (phi_b[j] - phi_a[i] <= cost(i,j), tight on coupling arcs).
struct TransportPlan {
  double cost = 0;
  std::vector<std::tuple<int, int, double>> arcs;  // (i, j, mass)
  VectorXd potential_a, potential_b;
  double marginal_error = 0;  // max |coupling marginal - input|
};

TransportPlan wasserstein1(const std::function<double(int, int)>& cost, const VectorXd& a,
                           const VectorXd& b);

TransportPlan wasserstein1(const Metric& m, const std::vector<Config>& states_a,
                           const VectorXd& a, const std::vector<Config>& states_b,
                           const VectorXd& b);

// W1 between two kernel rows (dense distributions over their tables' states).
double w1_rows(const Metric& m, const GibbsTable& space_a, const VectorXd& row_a,
               const GibbsTable& space_b, const VectorXd& row_b);

}  // namespace spinlab
