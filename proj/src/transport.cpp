#include "spinlab/transport.hpp"

#include <algorithm>
#include <cmath>

namespace spinlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Successive shortest augmenting paths with node potentials on the dense
// bipartite transportation graph. Supports are small at desk scale, so a
// quadratic Dijkstra per augmentation is fine.
struct Solver {
  int na, nb;
  const std::function<double(int, int)>& cost;
  VectorXd supply, demand;
  MatrixXd flow;
  VectorXd pot;  // potentials, size na + nb

  Solver(const std::function<double(int, int)>& c, const VectorXd& a, const VectorXd& b)
      : na(int(a.size())), nb(int(b.size())), cost(c), supply(a), demand(b),
        flow(MatrixXd::Zero(a.size(), b.size())), pot(VectorXd::Zero(a.size() + b.size())) {}

  // one augmentation; returns shipped amount (0 when done)
  double augment() {
    const int N = na + nb;
    std::vector<double> dist(static_cast<std::size_t>(N), kInf);
    std::vector<int> prev(static_cast<std::size_t>(N), -1);
    std::vector<char> done(static_cast<std::size_t>(N), 0);
    for (int i = 0; i < na; ++i)
      if (supply[i] > 1e-15) dist[static_cast<std::size_t>(i)] = 0;
    while (true) {
      int u = -1;
      double best = kInf;
      for (int v = 0; v < N; ++v)
        if (!done[static_cast<std::size_t>(v)] && dist[static_cast<std::size_t>(v)] < best) { best = dist[static_cast<std::size_t>(v)]; u = v; }
      if (u < 0) break;
      done[static_cast<std::size_t>(u)] = 1;
      if (u < na) {
        for (int j = 0; j < nb; ++j) {
          double rc = cost(u, j) + pot[u] - pot[na + j];
          if (rc < 0) rc = rc > -1e-9 ? 0 : throw_neg(rc);
          if (dist[static_cast<std::size_t>(u)] + rc < dist[static_cast<std::size_t>(na + j)] - 1e-18) {
            dist[static_cast<std::size_t>(na + j)] = dist[static_cast<std::size_t>(u)] + rc;
            prev[static_cast<std::size_t>(na + j)] = u;
          }
        }
      } else {
        int j = u - na;
        for (int i = 0; i < na; ++i) {
          if (flow(i, j) <= 0) continue;
          double rc = -cost(i, j) + pot[na + j] - pot[i];
          if (rc < 0) rc = rc > -1e-9 ? 0 : throw_neg(rc);
          if (dist[static_cast<std::size_t>(u)] + rc < dist[static_cast<std::size_t>(i)] - 1e-18) {
            dist[static_cast<std::size_t>(i)] = dist[static_cast<std::size_t>(u)] + rc;
            prev[static_cast<std::size_t>(i)] = u;
          }
        }
      }
    }
    // nearest reachable sink with residual demand
    int target = -1;
    double best = kInf;
    for (int j = 0; j < nb; ++j)
      if (demand[j] > 1e-15 && dist[static_cast<std::size_t>(na + j)] < best) { best = dist[static_cast<std::size_t>(na + j)]; target = j; }
    if (target < 0) return 0;
    // bottleneck along the path
    double amount = demand[target];
    for (int v = na + target; prev[static_cast<std::size_t>(v)] >= 0; v = prev[static_cast<std::size_t>(v)]) {
      int u = prev[static_cast<std::size_t>(v)];
      if (v >= na) {
        // forward arc u -> v has unlimited capacity
      } else {
        amount = std::min(amount, flow(v, u - na));
      }
    }
    // source side: path root is a supply node
    {
      int v = na + target;
      while (prev[static_cast<std::size_t>(v)] >= 0) v = prev[static_cast<std::size_t>(v)];
      amount = std::min(amount, supply[v]);
    }
    // apply
    for (int v = na + target; prev[static_cast<std::size_t>(v)] >= 0; v = prev[static_cast<std::size_t>(v)]) {
      int u = prev[static_cast<std::size_t>(v)];
      if (v >= na)
        flow(u, v - na) += amount;
      else
        flow(v, u - na) -= amount;
    }
    {
      int v = na + target;
      while (prev[static_cast<std::size_t>(v)] >= 0) v = prev[static_cast<std::size_t>(v)];
      supply[v] -= amount;
    }
    demand[target] -= amount;
    // potential update over reachable nodes
    double dmax = 0;
    for (int v = 0; v < na + nb; ++v)
      if (dist[static_cast<std::size_t>(v)] < kInf) dmax = std::max(dmax, dist[static_cast<std::size_t>(v)]);
    for (int v = 0; v < na + nb; ++v)
      pot[v] += dist[static_cast<std::size_t>(v)] < kInf ? dist[static_cast<std::size_t>(v)] : dmax;
    return amount;
  }

  [[noreturn]] static double throw_neg(double rc) {
    throw std::runtime_error("transport: negative reduced cost " + format_g17(rc));
  }
};

}  // namespace

TransportPlan wasserstein1(const std::function<double(int, int)>& cost, const VectorXd& a,
                           const VectorXd& b) {
  if (a.size() == 0 || b.size() == 0) throw std::invalid_argument("transport: empty distribution");
  if (std::abs(a.sum() - b.sum()) > 1e-9)
    throw std::invalid_argument("transport: total masses differ");
  if ((a.array() < 0).any() || (b.array() < 0).any())
    throw std::invalid_argument("transport: negative mass");
  Solver solver(cost, a, b);
  for (int guard = 0; guard < int(a.size() + b.size()) * 4 + 8; ++guard) {
    if (solver.supply.maxCoeff() <= 1e-14) break;
    if (solver.augment() <= 0) break;
  }
  if (solver.supply.maxCoeff() > 1e-12)
    throw std::runtime_error("transport: failed to ship all mass");

  TransportPlan plan;
  KahanSum c;
  for (int i = 0; i < int(a.size()); ++i)
    for (int j = 0; j < int(b.size()); ++j)
      if (solver.flow(i, j) > 0) {
        plan.arcs.emplace_back(i, j, solver.flow(i, j));
        c.add(solver.flow(i, j) * cost(i, j));
      }
  plan.cost = c.value();
  plan.potential_a = solver.pot.head(a.size());
  plan.potential_b = solver.pot.tail(b.size());
  VectorXd ra = VectorXd::Zero(a.size()), rb = VectorXd::Zero(b.size());
  for (auto& [i, j, m] : plan.arcs) {
    ra[i] += m;
    rb[j] += m;
  }
  plan.marginal_error = std::max((ra - a).cwiseAbs().maxCoeff(), (rb - b).cwiseAbs().maxCoeff());
  return plan;
}

TransportPlan wasserstein1(const Metric& m, const std::vector<Config>& states_a, const VectorXd& a,
                           const std::vector<Config>& states_b, const VectorXd& b) {
  auto cost = [&](int i, int j) { return m(states_a[static_cast<std::size_t>(i)], states_b[static_cast<std::size_t>(j)]); };
  return wasserstein1(cost, a, b);
}

double w1_rows(const Metric& m, const GibbsTable& space_a, const VectorXd& row_a,
               const GibbsTable& space_b, const VectorXd& row_b) {
  std::vector<Config> sa, sb;
  std::vector<double> ma, mb;
  for (Index i = 0; i < row_a.size(); ++i)
    if (row_a[i] > 0) {
      sa.push_back(space_a.states[static_cast<std::size_t>(i)]);
      ma.push_back(row_a[i]);
    }
  for (Index j = 0; j < row_b.size(); ++j)
    if (row_b[j] > 0) {
      sb.push_back(space_b.states[static_cast<std::size_t>(j)]);
      mb.push_back(row_b[j]);
    }
  VectorXd va = Eigen::Map<VectorXd>(ma.data(), Index(ma.size()));
  VectorXd vb = Eigen::Map<VectorXd>(mb.data(), Index(mb.size()));
  // row sums can differ from 1 by rounding; rescale to a common total
  double ta = va.sum(), tb = vb.sum();
  if (std::abs(ta - tb) > 1e-9) throw std::runtime_error("w1_rows: rows have different mass");
  vb *= ta / tb;
  return wasserstein1(m, sa, va, sb, vb).cost;
}

}  // namespace spinlab
