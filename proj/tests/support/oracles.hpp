#pragma once

// Independent brute-force oracles for the test and acceptance suites. These
// deliberately avoid the library's computation paths (log-space enumeration,
// fiber decompositions, transport solver, joint-measure composition) so that
// agreement is evidence, not tautology.

#include <cmath>
#include <map>
#include <vector>

#include "spinlab/dynamics.hpp"
#include "spinlab/edwards_sokal.hpp"

namespace spinlab::oracle {

// Direct-product weights, no log-space, no pruning.
inline std::map<std::uint64_t, double> direct_gibbs(const SpinSystem& sys, const Pinning& tau = {}) {
  const int n = sys.n();
  const int q = sys.q;
  std::map<std::uint64_t, double> out;
  std::uint64_t total = 1;
  for (int v = 0; v < n; ++v) total *= std::uint64_t(q);
  double z = 0;
  for (std::uint64_t code = 0; code < total; ++code) {
    Config c = config_from_code(code, n, q);
    bool match = true;
    for (auto& [v, a] : tau.assign)
      if (c[v] != a) { match = false; break; }
    if (!match) continue;
    double w = 1;
    for (std::size_t e = 0; e < sys.graph.edges.size(); ++e)
      w *= sys.A[e](c[sys.graph.edges[e].first], c[sys.graph.edges[e].second]);
    for (int v = 0; v < n; ++v) w *= sys.B[static_cast<std::size_t>(v)](c[v]);
    if (w > 0) {
      out[code] = w;
      z += w;
    }
  }
  for (auto& [code, w] : out) w /= z;
  return out;
}

// W1 on the real line equals the integrated CDF gap.
inline double line_w1(const std::vector<double>& pos_a, const VectorXd& a,
                      const std::vector<double>& pos_b, const VectorXd& b) {
  std::vector<std::pair<double, double>> deltas;
  for (std::size_t i = 0; i < pos_a.size(); ++i) deltas.push_back({pos_a[i], a[Index(i)]});
  for (std::size_t j = 0; j < pos_b.size(); ++j) deltas.push_back({pos_b[j], -b[Index(j)]});
  std::sort(deltas.begin(), deltas.end());
  double cost = 0, cdf = 0;
  for (std::size_t k = 0; k + 1 < deltas.size(); ++k) {
    cdf += deltas[k].second;
    cost += std::abs(cdf) * (deltas[k + 1].first - deltas[k].first);
  }
  return cost;
}

// One Swendsen-Wang step by explicit enumeration of kept-edge subsets and
// component recolorings.
inline MatrixXd direct_sw_matrix(const GibbsTable& table) {
  const SpinSystem& sys = *table.sys;
  const Graph& g = sys.graph;
  const Index m = table.size();
  const int q = sys.q;
  const double p = 1.0 - std::exp(-sys.beta);
  MatrixXd P = MatrixXd::Zero(m, m);
  for (Index i = 0; i < m; ++i) {
    const Config& sigma = table.states[static_cast<std::size_t>(i)];
    std::vector<int> mono;
    for (std::size_t e = 0; e < g.edges.size(); ++e)
      if (sigma[g.edges[e].first] == sigma[g.edges[e].second]) mono.push_back(int(e));
    for (std::uint64_t keep = 0; keep < (std::uint64_t(1) << mono.size()); ++keep) {
      int kept = __builtin_popcountll(keep);
      double pa = std::pow(p, kept) * std::pow(1 - p, int(mono.size()) - kept);
      if (pa <= 0) continue;
      // components of the kept subgraph
      std::vector<int> comp(static_cast<std::size_t>(g.n), -1);
      int nc = 0;
      for (int v = 0; v < g.n; ++v) {
        if (comp[static_cast<std::size_t>(v)] >= 0) continue;
        std::vector<int> stack{v};
        comp[static_cast<std::size_t>(v)] = nc;
        while (!stack.empty()) {
          int u = stack.back();
          stack.pop_back();
          for (std::size_t ei = 0; ei < mono.size(); ++ei) {
            if (!(keep >> ei & 1)) continue;
            auto [x, y] = g.edges[static_cast<std::size_t>(mono[ei])];
            int other = -1;
            if (x == u) other = y;
            else if (y == u) other = x;
            else continue;
            if (comp[static_cast<std::size_t>(other)] < 0) {
              comp[static_cast<std::size_t>(other)] = nc;
              stack.push_back(other);
            }
          }
        }
        ++nc;
      }
      // all q^nc recolorings equally likely
      double pr = pa * std::pow(double(q), -nc);
      std::uint64_t labels = 1;
      for (int c = 0; c < nc; ++c) labels *= std::uint64_t(q);
      for (std::uint64_t lab = 0; lab < labels; ++lab) {
        std::uint64_t rest = lab;
        std::vector<int> color(static_cast<std::size_t>(nc));
        for (int c = 0; c < nc; ++c) {
          color[static_cast<std::size_t>(c)] = int(rest % std::uint64_t(q));
          rest /= std::uint64_t(q);
        }
        Config next(g.n);
        for (int v = 0; v < g.n; ++v) next[v] = color[static_cast<std::size_t>(comp[static_cast<std::size_t>(v)])];
        Index j = table.find(next);
        if (j < 0) throw std::runtime_error("direct_sw_matrix: state lookup failed");
        P(i, j) += pr;
      }
    }
  }
  return P;
}

// Power iteration on the nu-symmetrized influence matrix.
inline double power_lambda1(const InfluenceMatrix& jm) {
  const Index dim = Index(jm.index.size());
  if (dim == 0) return 0.0;
  VectorXd sq = jm.nu.cwiseSqrt();
  MatrixXd M = sq.asDiagonal() * jm.J * sq.cwiseInverse().asDiagonal();
  M = 0.5 * (M + M.transpose());
  double shift = M.cwiseAbs().rowwise().sum().maxCoeff() + 1;
  MatrixXd S = M + shift * MatrixXd::Identity(dim, dim);
  Rng rng(424242);
  VectorXd v(dim);
  for (Index i = 0; i < dim; ++i) v[i] = rng.gaussian();
  v.normalize();
  double lam = 0;
  for (int it = 0; it < 200000; ++it) {
    VectorXd w = S * v;
    double nl = v.dot(w);
    w.normalize();
    if (std::abs(nl - lam) < 1e-15 * std::max(1.0, std::abs(nl)) && it > 10) {
      lam = nl;
      break;
    }
    lam = nl;
    v = w;
  }
  return lam - shift;
}

// Exhaustive marginal lower bound straight from direct weights.
inline double direct_marginal_bound(const SpinSystem& sys) {
  const int n = sys.n();
  const int q = sys.q;
  double best = 1;
  for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << n); ++mask) {
    std::vector<int> U;
    for (int v = 0; v < n; ++v)
      if (mask >> v & 1) U.push_back(v);
    if (int(U.size()) >= n) continue;
    // all feasible assignments on U
    std::uint64_t count = 1;
    for (std::size_t i = 0; i < U.size(); ++i) count *= std::uint64_t(q);
    for (std::uint64_t t = 0; t < count; ++t) {
      Pinning tau;
      std::uint64_t rest = t;
      for (int v : U) {
        tau.assign.push_back({v, int(rest % std::uint64_t(q))});
        rest /= std::uint64_t(q);
      }
      std::sort(tau.assign.begin(), tau.assign.end());
      auto dist = direct_gibbs(sys, tau);
      if (dist.empty()) continue;
      std::map<std::pair<int, int>, double> marg;
      for (auto& [code, pr] : dist) {
        Config c = config_from_code(code, n, q);
        for (int v = 0; v < n; ++v)
          if (!tau.pins(v)) marg[{v, c[v]}] += pr;
      }
      for (auto& [key, pr] : marg) best = std::min(best, pr);
    }
  }
  return best;
}

}  // namespace spinlab::oracle
