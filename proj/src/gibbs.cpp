#include "spinlab/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include "spinlab/parallel.hpp"

namespace spinlab {

Index GibbsTable::find(const Config& c) const { return find_code(config_code(c, q())); }

Index GibbsTable::find_code(std::uint64_t code) const {
  auto it = std::lower_bound(codes.begin(), codes.end(), code);
  if (it == codes.end() || *it != code) return -1;
  return it - codes.begin();
}

double GibbsTable::marginal(int x, int a) const {
  if (pinning.pins(x)) throw std::invalid_argument("marginal: vertex is pinned");
  double m = 0;
  for (Index i = 0; i < size(); ++i)
    if (states[static_cast<std::size_t>(i)][x] == a) m += probs[i];
  return m;
}

MatrixXd GibbsTable::vertex_marginals() const {
  MatrixXd m = MatrixXd::Zero(n(), q());
  for (Index i = 0; i < size(); ++i)
    for (int v = 0; v < n(); ++v) m(v, states[static_cast<std::size_t>(i)][v]) += probs[i];
  return m;
}

double GibbsTable::min_positive_prob() const {
  double m = 1;
  for (Index i = 0; i < size(); ++i)
    if (probs[i] > 0) m = std::min(m, probs[i]);
  return m;
}

TablePtr enumerate(std::shared_ptr<const SpinSystem> sys, const Pinning& tau, const Caps& caps) {
  if (unpinned_state_space_size(*sys, tau) > caps.state_cap)
    throw CapExceeded("enumerate: state space exceeds cap");
  auto table = std::make_shared<GibbsTable>();
  table->sys = sys;
  table->pinning = tau;
  std::vector<double> lw;
  for_each_feasible(*sys, tau, [&](const Config& c, double w) {
    table->states.push_back(c);
    table->codes.push_back(config_code(c, sys->q));
    lw.push_back(w);
  });
  if (table->states.empty()) throw std::invalid_argument("enumerate: empty conditional state space");
  Index m = Index(table->states.size());
  table->log_weights = Eigen::Map<VectorXd>(lw.data(), m);
  double shift = table->log_weights.maxCoeff();
  KahanSum z;
  VectorXd w(m);
  for (Index i = 0; i < m; ++i) {
    w[i] = std::exp(table->log_weights[i] - shift);
    z.add(w[i]);
  }
  table->log_partition = shift + std::log(z.value());
  table->probs = w / z.value();
  for (int v = 0; v < sys->n(); ++v)
    if (!tau.pins(v)) table->free_vertices.push_back(v);
  return table;
}

TablePtr restrict_table(const TablePtr& table, const Pinning& extra) {
  auto out = std::make_shared<GibbsTable>();
  out->sys = table->sys;
  out->pinning = table->pinning;
  for (auto& [v, a] : extra.assign) out->pinning = out->pinning.extended(v, a);
  KahanSum z;
  std::vector<double> lw;
  for (Index i = 0; i < table->size(); ++i) {
    const Config& c = table->states[static_cast<std::size_t>(i)];
    bool match = true;
    for (auto& [v, a] : extra.assign)
      if (c[v] != a) { match = false; break; }
    if (!match) continue;
    out->states.push_back(c);
    out->codes.push_back(table->codes[static_cast<std::size_t>(i)]);
    lw.push_back(table->log_weights[i]);
    z.add(table->probs[i]);
  }
  if (out->states.empty()) throw std::invalid_argument("restrict_table: infeasible pinning");
  Index m = Index(out->states.size());
  out->log_weights = Eigen::Map<VectorXd>(lw.data(), m);
  out->probs.resize(m);
  Index j = 0;
  for (Index i = 0; i < table->size(); ++i) {
    const Config& c = table->states[static_cast<std::size_t>(i)];
    bool match = true;
    for (auto& [v, a] : extra.assign)
      if (c[v] != a) { match = false; break; }
    if (match) out->probs[j++] = table->probs[i] / z.value();
  }
  out->log_partition = table->log_partition + std::log(z.value());
  for (int v = 0; v < out->sys->n(); ++v)
    if (!out->pinning.pins(v)) out->free_vertices.push_back(v);
  return out;
}

FiberIndex make_fibers(const GibbsTable& t, const std::vector<int>& block) {
  for (int v : block)
    if (t.pinning.pins(v)) throw std::invalid_argument("make_fibers: block meets the pinned set");
  FiberIndex fx;
  fx.fiber_of.resize(static_cast<std::size_t>(t.size()));
  std::unordered_map<std::uint64_t, int> ids;
  ids.reserve(static_cast<std::size_t>(t.size()));
  for (Index i = 0; i < t.size(); ++i) {
    std::uint64_t key = mask_code(t.codes[static_cast<std::size_t>(i)], block, t.n(), t.q());
    auto [it, fresh] = ids.try_emplace(key, fx.count);
    if (fresh) {
      ++fx.count;
      fx.fiber_prob.push_back(0);
    }
    fx.fiber_of[static_cast<std::size_t>(i)] = it->second;
    fx.fiber_prob[static_cast<std::size_t>(it->second)] += t.probs[i];
  }
  return fx;
}

VectorXd conditional_expectation(const GibbsTable& t, const FiberIndex& fx, const VectorXd& f) {
  std::vector<double> sum(static_cast<std::size_t>(fx.count), 0.0);
  for (Index i = 0; i < t.size(); ++i) sum[static_cast<std::size_t>(fx.fiber_of[static_cast<std::size_t>(i)])] += t.probs[i] * f[i];
  VectorXd g(t.size());
  for (Index i = 0; i < t.size(); ++i) {
    int fid = fx.fiber_of[static_cast<std::size_t>(i)];
    double p = fx.fiber_prob[static_cast<std::size_t>(fid)];
    g[i] = p > 0 ? sum[static_cast<std::size_t>(fid)] / p : 0.0;
  }
  return g;
}

VectorXd conditional_expectation(const GibbsTable& t, const std::vector<int>& block,
                                 const VectorXd& f) {
  return conditional_expectation(t, make_fibers(t, block), f);
}

InfluenceMatrix influence_matrix(const GibbsTable& t) {
  InfluenceMatrix out;
  const int q = t.q();
  const int nf = int(t.free_vertices.size());
  MatrixXd marg = MatrixXd::Zero(t.n(), q);
  for (Index i = 0; i < t.size(); ++i)
    for (int v : t.free_vertices) marg(v, t.states[static_cast<std::size_t>(i)][v]) += t.probs[i];
  std::vector<std::vector<int>> slot(static_cast<std::size_t>(t.n()), std::vector<int>(static_cast<std::size_t>(q), -1));
  for (int v : t.free_vertices)
    for (int a = 0; a < q; ++a)
      if (marg(v, a) > 0) {
        slot[static_cast<std::size_t>(v)][static_cast<std::size_t>(a)] = int(out.index.size());
        out.index.push_back({v, a});
      }
  const int dim = int(out.index.size());
  out.J = MatrixXd::Zero(dim, dim);
  out.nu.resize(dim);
  for (int r = 0; r < dim; ++r)
    out.nu[r] = marg(out.index[static_cast<std::size_t>(r)].first, out.index[static_cast<std::size_t>(r)].second) / double(nf);

  // pair frequencies mu(sigma_x = a, sigma_y = a') in one pass
  MatrixXd pair_prob = MatrixXd::Zero(dim, dim);
  for (Index i = 0; i < t.size(); ++i) {
    const Config& c = t.states[static_cast<std::size_t>(i)];
    double p = t.probs[i];
    for (int xi = 0; xi < nf; ++xi) {
      int x = t.free_vertices[static_cast<std::size_t>(xi)];
      int rx = slot[static_cast<std::size_t>(x)][static_cast<std::size_t>(c[x])];
      for (int yi = 0; yi < nf; ++yi) {
        int y = t.free_vertices[static_cast<std::size_t>(yi)];
        pair_prob(rx, slot[static_cast<std::size_t>(y)][static_cast<std::size_t>(c[y])]) += p;
      }
    }
  }
  for (int r = 0; r < dim; ++r) {
    auto [x, a] = out.index[static_cast<std::size_t>(r)];
    double px = marg(x, a);
    for (int s = 0; s < dim; ++s) {
      auto [y, ap] = out.index[static_cast<std::size_t>(s)];
      if (y == x) continue;
      out.J(r, s) = pair_prob(r, s) / px - marg(y, ap);
    }
  }

  for (int r = 0; r < dim; ++r)
    for (int s = 0; s < dim; ++s)
      out.self_adjoint_residual = std::max(
          out.self_adjoint_residual, std::abs(out.nu[r] * out.J(r, s) - out.nu[s] * out.J(s, r)));
  for (int r = 0; r < dim; ++r) {
    for (int yi = 0; yi < nf; ++yi) {
      int y = t.free_vertices[static_cast<std::size_t>(yi)];
      if (y == out.index[static_cast<std::size_t>(r)].first) continue;
      double rowsum = 0;
      for (int a = 0; a < q; ++a) {
        int s = slot[static_cast<std::size_t>(y)][static_cast<std::size_t>(a)];
        if (s >= 0) rowsum += out.J(r, s);
      }
      out.block_row_residual = std::max(out.block_row_residual, std::abs(rowsum));
    }
  }
  return out;
}

double lambda1(const InfluenceMatrix& jm) {
  const int dim = int(jm.index.size());
  if (dim == 0) return 0.0;
  VectorXd sq = jm.nu.cwiseSqrt();
  MatrixXd M = sq.asDiagonal() * jm.J * sq.cwiseInverse().asDiagonal();
  MatrixXd S = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(S, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("lambda1: eigensolver failed");
  return es.eigenvalues().maxCoeff();
}

PinningSweep for_each_pinning(
    const GibbsTable& master, const Caps& caps,
    const std::function<void(const Pinning&, const std::vector<Index>&)>& fn,
    std::uint64_t sample_seed, bool include_fullpin) {
  const int n = master.n();
  const int q = master.q();
  if (!master.pinning.empty())
    throw std::invalid_argument("for_each_pinning: master table must be unpinned");
  PinningSweep sweep;

  std::vector<std::uint64_t> place(static_cast<std::size_t>(n), 1);
  for (int v = n - 2; v >= 0; --v) place[static_cast<std::size_t>(v)] = place[static_cast<std::size_t>(v) + 1] * std::uint64_t(q);

  auto emit_subset = [&](const std::vector<int>& U, const std::function<bool()>& over_budget) {
    std::vector<std::pair<std::uint64_t, Index>> proj(static_cast<std::size_t>(master.size()));
    for (Index i = 0; i < master.size(); ++i) {
      std::uint64_t key = 0;
      for (int v : U) key = key * std::uint64_t(q) + (master.codes[static_cast<std::size_t>(i)] / place[static_cast<std::size_t>(v)]) % std::uint64_t(q);
      proj[static_cast<std::size_t>(i)] = {key, i};
    }
    std::stable_sort(proj.begin(), proj.end(),
                     [](auto& a, auto& b) { return a.first < b.first; });
    std::size_t i = 0;
    while (i < proj.size()) {
      std::size_t j = i;
      std::vector<Index> members;
      while (j < proj.size() && proj[j].first == proj[i].first) members.push_back(proj[j++].second);
      Pinning tau;
      std::uint64_t key = proj[i].first;
      for (auto it = U.rbegin(); it != U.rend(); ++it) {
        tau.assign.push_back({*it, int(key % std::uint64_t(q))});
        key /= std::uint64_t(q);
      }
      std::sort(tau.assign.begin(), tau.assign.end());
      ++sweep.count;
      fn(tau, members);
      i = j;
      if (over_budget()) return;
    }
  };

  // exhaustive pinning count = sum over U of |distinct projections|
  double estimate = std::pow(double(q + 1), double(n));
  bool exhaustive = estimate <= double(caps.pinning_cap) || master.size() * std::pow(2.0, n) <= double(caps.pinning_cap);
  if (exhaustive) {
    int max_pinned = include_fullpin ? n : n - 1;
    for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << n); ++mask) {
      std::vector<int> U;
      for (int v = 0; v < n; ++v)
        if (mask >> v & 1) U.push_back(v);
      if (int(U.size()) > max_pinned) continue;
      emit_subset(U, [] { return false; });
    }
    return sweep;
  }
  if (!caps.allow_sampled) throw CapExceeded("pinning sweep exceeds cap");
  sweep.sampled = true;
  Rng rng(Rng::mix(sample_seed));
  for (int s = 0; s < caps.pinning_sample; ++s) {
    int k = rng.uniform_int(n);
    std::vector<int> verts(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) verts[static_cast<std::size_t>(v)] = v;
    for (int i = 0; i < k; ++i) std::swap(verts[static_cast<std::size_t>(i)], verts[static_cast<std::size_t>(i + rng.uniform_int(n - i))]);
    std::vector<int> U(verts.begin(), verts.begin() + k);
    std::sort(U.begin(), U.end());
    // a random feasible assignment: project a mu-random state
    Index pick = rng.discrete(master.probs.data(), int(master.size()));
    Pinning tau;
    for (int v : U) tau.assign.push_back({v, master.states[static_cast<std::size_t>(pick)][v]});
    std::vector<Index> members;
    for (Index i = 0; i < master.size(); ++i) {
      bool match = true;
      for (auto& [v, a] : tau.assign)
        if (master.states[static_cast<std::size_t>(i)][v] != a) { match = false; break; }
      if (match) members.push_back(i);
    }
    ++sweep.count;
    fn(tau, members);
  }
  return sweep;
}

namespace {

// conditional sub-table from master-state indices (cheaper than re-enumerating)
GibbsTable subtable(const GibbsTable& master, const Pinning& tau, const std::vector<Index>& members) {
  GibbsTable t;
  t.sys = master.sys;
  t.pinning = tau;
  KahanSum z;
  for (Index i : members) z.add(master.probs[i]);
  t.probs.resize(Index(members.size()));
  t.log_weights.resize(Index(members.size()));
  Index j = 0;
  for (Index i : members) {
    t.states.push_back(master.states[static_cast<std::size_t>(i)]);
    t.codes.push_back(master.codes[static_cast<std::size_t>(i)]);
    t.log_weights[j] = master.log_weights[i];
    t.probs[j++] = master.probs[i] / z.value();
  }
  t.log_partition = master.log_partition + std::log(z.value());
  for (int v = 0; v < master.n(); ++v)
    if (!tau.pins(v)) t.free_vertices.push_back(v);
  return t;
}

}  // namespace

SpectralIndependence spectral_independence(const GibbsTable& master, const Caps& caps) {
  std::vector<std::pair<Pinning, std::vector<Index>>> jobs;
  auto sweep = for_each_pinning(master, caps, [&](const Pinning& tau, const std::vector<Index>& m) {
    jobs.push_back({tau, m});
  });
  std::vector<double> lam(jobs.size(), 0.0);
  parallel_for(Index(jobs.size()), [&](Index i) {
    GibbsTable t = subtable(master, jobs[static_cast<std::size_t>(i)].first, jobs[static_cast<std::size_t>(i)].second);
    lam[static_cast<std::size_t>(i)] = lambda1(influence_matrix(t));
  });
  SpectralIndependence out;
  out.sampled = sweep.sampled;
  out.pinnings = sweep.count;
  out.eta = -1;
  for (std::size_t i = 0; i < jobs.size(); ++i)
    if (lam[i] > out.eta) {
      out.eta = lam[i];
      out.witness = jobs[i].first;
    }
  out.eta = std::max(out.eta, 0.0);
  return out;
}

MarginalBoundResult marginal_bound(const GibbsTable& master, const Caps& caps) {
  std::vector<std::pair<Pinning, std::vector<Index>>> jobs;
  auto sweep = for_each_pinning(master, caps, [&](const Pinning& tau, const std::vector<Index>& m) {
    jobs.push_back({tau, m});
  });
  struct Local { double b = 1; int x = -1, a = -1; };
  std::vector<Local> results(jobs.size());
  parallel_for(Index(jobs.size()), [&](Index i) {
    GibbsTable t = subtable(master, jobs[static_cast<std::size_t>(i)].first, jobs[static_cast<std::size_t>(i)].second);
    MatrixXd marg = MatrixXd::Zero(t.n(), t.q());
    for (Index s = 0; s < t.size(); ++s)
      for (int v : t.free_vertices) marg(v, t.states[static_cast<std::size_t>(s)][v]) += t.probs[s];
    Local loc;
    for (int v : t.free_vertices)
      for (int a = 0; a < t.q(); ++a)
        if (marg(v, a) > 0 && marg(v, a) < loc.b) { loc.b = marg(v, a); loc.x = v; loc.a = a; }
    results[static_cast<std::size_t>(i)] = loc;
  });
  MarginalBoundResult out;
  out.sampled = sweep.sampled;
  for (std::size_t i = 0; i < jobs.size(); ++i)
    if (results[i].b < out.b) {
      out.b = results[i].b;
      out.witness = jobs[i].first;
      out.x = results[i].x;
      out.a = results[i].a;
    }
  return out;
}

MatrixXd dobrushin_matrix(const SpinSystem& sys, const Pinning& tau, const Caps& caps) {
  const int n = sys.n();
  const int q = sys.q;
  MatrixXd R = MatrixXd::Zero(n, n);

  // interactions of y with each neighbor, oriented (spin_y, spin_neighbor)
  for (int y = 0; y < n; ++y) {
    if (tau.pins(y)) continue;
    const auto& nbrs = sys.graph.adj[static_cast<std::size_t>(y)];
    int deg = int(nbrs.size());
    if (deg == 0) continue;
    if (std::pow(double(q), double(deg) + 1) > double(caps.state_cap))
      throw CapExceeded("dobrushin_matrix: neighborhood enumeration exceeds cap");
    std::vector<MatrixXd> Ayz(static_cast<std::size_t>(deg));
    for (int t = 0; t < deg; ++t) {
      int z = nbrs[static_cast<std::size_t>(t)];
      for (std::size_t e = 0; e < sys.graph.edges.size(); ++e) {
        auto [u, v] = sys.graph.edges[e];
        if ((u == y && v == z)) Ayz[static_cast<std::size_t>(t)] = sys.A[e];
        if ((u == z && v == y)) Ayz[static_cast<std::size_t>(t)] = sys.A[e].transpose();
      }
    }
    // spins allowed per neighbor: the pinned value, or locally feasible spins
    std::vector<std::vector<int>> allowed(static_cast<std::size_t>(deg));
    for (int t = 0; t < deg; ++t) {
      int z = nbrs[static_cast<std::size_t>(t)];
      int s = tau.spin(z);
      if (s >= 0) allowed[static_cast<std::size_t>(t)] = {s};
      else
        for (int a = 0; a < q; ++a)
          if (sys.B[static_cast<std::size_t>(z)](a) > 0) allowed[static_cast<std::size_t>(t)].push_back(a);
    }
    auto conditional = [&](const std::vector<int>& eta, VectorXd& p) -> bool {
      p.resize(q);
      double total = 0;
      for (int a = 0; a < q; ++a) {
        double w = sys.B[static_cast<std::size_t>(y)](a);
        for (int t = 0; t < deg && w > 0; ++t) w *= Ayz[static_cast<std::size_t>(t)](a, eta[static_cast<std::size_t>(t)]);
        p[a] = w;
        total += w;
      }
      if (total <= 0) return false;
      p /= total;
      return true;
    };
    // odometer over the neighborhood assignment
    std::vector<int> idx(static_cast<std::size_t>(deg), 0);
    std::vector<int> eta(static_cast<std::size_t>(deg));
    while (true) {
      for (int t = 0; t < deg; ++t) eta[static_cast<std::size_t>(t)] = allowed[static_cast<std::size_t>(t)][static_cast<std::size_t>(idx[static_cast<std::size_t>(t)])];
      VectorXd base;
      if (conditional(eta, base)) {
        for (int t = 0; t < deg; ++t) {
          int x = nbrs[static_cast<std::size_t>(t)];
          if (tau.pins(x)) continue;
          std::vector<int> eta2 = eta;
          for (int b : allowed[static_cast<std::size_t>(t)]) {
            if (b == eta[static_cast<std::size_t>(t)]) continue;
            eta2[static_cast<std::size_t>(t)] = b;
            VectorXd alt;
            if (!conditional(eta2, alt)) continue;
            R(x, y) = std::max(R(x, y), tv_distance(base, alt));
          }
        }
      }
      int t = deg - 1;
      while (t >= 0 && ++idx[static_cast<std::size_t>(t)] == int(allowed[static_cast<std::size_t>(t)].size())) idx[static_cast<std::size_t>(t--)] = 0;
      if (t < 0) break;
    }
  }
  return R;
}

namespace {

// shifted power iteration for the Perron root of a nonnegative matrix
std::pair<double, bool> perron_root(const MatrixXd& M, VectorXd* vec_out, Index cap = 400000) {
  const Index n = M.rows();
  double shift = M.cwiseAbs().rowwise().sum().maxCoeff() + 1.0;
  MatrixXd S = M + shift * MatrixXd::Identity(n, n);
  VectorXd v = VectorXd::Ones(n) / double(n);
  double lam = 0, prev = -1;
  bool converged = false;
  for (Index it = 0; it < cap; ++it) {
    VectorXd w = S * v;
    lam = w.sum() / v.sum();
    w /= w.maxCoeff();
    v = w;
    if (std::abs(lam - prev) <= 1e-14 * std::max(1.0, std::abs(lam))) {
      converged = true;
      break;
    }
    prev = lam;
  }
  if (vec_out) *vec_out = v / v.sum();
  return {lam - shift, converged};
}

}  // namespace

SpectralRadiusResult spectral_radius(const MatrixXd& R) {
  SpectralRadiusResult out;
  const Index n = R.rows();
  if (n == 0 || R.cwiseAbs().maxCoeff() == 0) return out;
  double d1 = 1e-7, d2 = 5e-8;
  MatrixXd O = MatrixXd::Ones(n, n);
  auto [r1, c1] = perron_root(R + d1 * O, nullptr);
  auto [r2, c2] = perron_root(R + d2 * O, nullptr);
  out.converged = c1 && c2;
  if (!out.converged) throw std::runtime_error("spectral_radius: power iteration did not converge");
  // Richardson in delta: rho(delta) = rho + c delta + O(delta^2)
  out.rho = (d1 * r2 - d2 * r1) / (d1 - d2);
  double linf = R.cwiseAbs().rowwise().sum().maxCoeff();
  if (out.rho > linf + 1e-9) throw std::runtime_error("spectral_radius: exceeds infinity norm");
  out.rho = std::max(out.rho, 0.0);
  return out;
}

VectorXd perron_vector(const MatrixXd& R, double delta) {
  VectorXd v;
  MatrixXd O = MatrixXd::Ones(R.rows(), R.cols());
  auto [rho, ok] = perron_root(R + delta * O, &v);
  (void)rho;
  if (!ok) throw std::runtime_error("perron_vector: power iteration did not converge");
  return v;
}

void dump_table(const GibbsTable& t, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("dump_table: cannot open " + path);
  const char magic[8] = {'S', 'L', 'G', 'T', 0, 0, 0, 0};
  std::uint32_t version = 1;
  std::uint32_t n = std::uint32_t(t.n()), q = std::uint32_t(t.q());
  std::uint64_t count = std::uint64_t(t.size());
  out.write(magic, 8);
  out.write(reinterpret_cast<const char*>(&version), 4);
  out.write(reinterpret_cast<const char*>(&n), 4);
  out.write(reinterpret_cast<const char*>(&q), 4);
  out.write(reinterpret_cast<const char*>(&count), 8);
  out.write(reinterpret_cast<const char*>(&t.log_partition), 8);
  for (Index i = 0; i < t.size(); ++i) {
    std::uint64_t code = t.codes[static_cast<std::size_t>(i)];
    double p = t.probs[i];
    out.write(reinterpret_cast<const char*>(&code), 8);
    out.write(reinterpret_cast<const char*>(&p), 8);
  }
}

TableDump load_table_dump(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_table_dump: cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (std::string(magic, 4) != "SLGT") throw std::runtime_error("load_table_dump: bad magic");
  TableDump d;
  std::uint32_t n, q, version;
  std::uint64_t count;
  in.read(reinterpret_cast<char*>(&version), 4);
  in.read(reinterpret_cast<char*>(&n), 4);
  in.read(reinterpret_cast<char*>(&q), 4);
  in.read(reinterpret_cast<char*>(&count), 8);
  in.read(reinterpret_cast<char*>(&d.log_partition), 8);
  d.version = version;
  d.n = int(n);
  d.q = int(q);
  d.codes.resize(count);
  d.probs.resize(Index(count));
  for (std::uint64_t i = 0; i < count; ++i) {
    in.read(reinterpret_cast<char*>(&d.codes[i]), 8);
    in.read(reinterpret_cast<char*>(&d.probs[Index(i)]), 8);
  }
  if (!in) throw std::runtime_error("load_table_dump: truncated file");
  return d;
}

}  // namespace spinlab
