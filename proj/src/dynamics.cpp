#include "spinlab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>

#include "spinlab/edwards_sokal.hpp"

#include <json.hpp>

namespace spinlab {

BlockWeights BlockWeights::make(std::vector<std::vector<int>> blocks, VectorXd probs, int n) {
  BlockWeights bw;
  bw.blocks = std::move(blocks);
  bw.probs = std::move(probs);
  if (Index(bw.blocks.size()) != bw.probs.size())
    throw std::invalid_argument("block weights: size mismatch");
  if ((bw.probs.array() < 0).any()) throw std::invalid_argument("block weights: negative probability");
  if (std::abs(bw.probs.sum() - 1.0) > 1e-12)
    throw std::invalid_argument("block weights: probabilities must sum to 1");
  std::vector<char> covered(static_cast<std::size_t>(n), 0);
  for (std::size_t b = 0; b < bw.blocks.size(); ++b) {
    auto& blk = bw.blocks[b];
    if (blk.empty() && bw.probs[Index(b)] > 0) throw std::invalid_argument("block weights: empty block");
    std::sort(blk.begin(), blk.end());
    blk.erase(std::unique(blk.begin(), blk.end()), blk.end());
    for (int v : blk) {
      if (v < 0 || v >= n) throw std::invalid_argument("block weights: vertex out of range");
      if (bw.probs[Index(b)] > 0) covered[static_cast<std::size_t>(v)] = 1;
    }
  }
  bw.covers_all = std::all_of(covered.begin(), covered.end(), [](char c) { return c != 0; });
  return bw;
}

BlockWeights BlockWeights::uniform_singletons(int n) {
  std::vector<std::vector<int>> blocks;
  for (int v = 0; v < n; ++v) blocks.push_back({v});
  return make(std::move(blocks), VectorXd::Constant(n, 1.0 / n), n);
}

BlockWeights BlockWeights::single_block(int n) {
  std::vector<int> all(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) all[static_cast<std::size_t>(v)] = v;
  return make({all}, VectorXd::Ones(1), n);
}

BlockWeights BlockWeights::from_partition(const Partition& p) {
  int n = 0;
  for (auto& c : p.classes) n += int(c.size());
  return make(p.classes, VectorXd::Constant(p.k(), 1.0 / p.k()), n);
}

BlockWeights BlockWeights::uniform_subsets(int n, int ell) {
  auto blocks = all_combinations(n, ell);
  double m = binomial(n, ell);
  return make(std::move(blocks), VectorXd::Constant(Index(m), 1.0 / m), n);
}

double coverage_delta(const BlockWeights& alpha, int n) {
  VectorXd cover = VectorXd::Zero(n);
  for (std::size_t b = 0; b < alpha.blocks.size(); ++b)
    for (int v : alpha.blocks[b]) cover[v] += alpha.probs[Index(b)];
  return cover.minCoeff();
}

namespace {

// per-vertex incident factors for local conditionals
struct LocalFactors {
  // (edge index, neighbor, neighbor-is-first-endpoint)
  std::vector<std::vector<std::tuple<int, int, bool>>> at;
  explicit LocalFactors(const SpinSystem& sys) : at(static_cast<std::size_t>(sys.n())) {
    for (std::size_t e = 0; e < sys.graph.edges.size(); ++e) {
      auto [u, v] = sys.graph.edges[e];
      at[static_cast<std::size_t>(u)].push_back({int(e), v, false});
      at[static_cast<std::size_t>(v)].push_back({int(e), u, true});
    }
  }
  // unnormalized conditional at x given the rest of sigma
  void weights(const SpinSystem& sys, const Config& sigma, int x, VectorXd& w) const {
    w = sys.B[static_cast<std::size_t>(x)];
    for (auto& [e, nbr, flip] : at[static_cast<std::size_t>(x)]) {
      const MatrixXd& A = sys.A[static_cast<std::size_t>(e)];
      for (int a = 0; a < sys.q; ++a) w[a] *= flip ? A(sigma[nbr], a) : A(a, sigma[nbr]);
    }
  }
};

MatrixXd single_site_heat_bath_matrix(const GibbsTable& t, const std::vector<int>& select_from,
                                      double lazy_extra) {
  // lazy_extra = number of selectable vertices that never move (pinned picks)
  const Index m = t.size();
  MatrixXd P = MatrixXd::Zero(m, m);
  double pick = 1.0 / (double(select_from.size()) + lazy_extra);
  for (int x : select_from) {
    FiberIndex fx = make_fibers(t, {x});
    std::vector<std::vector<Index>> members(static_cast<std::size_t>(fx.count));
    for (Index i = 0; i < m; ++i) members[static_cast<std::size_t>(fx.fiber_of[static_cast<std::size_t>(i)])].push_back(i);
    for (auto& mem : members) {
      double z = 0;
      for (Index j : mem) z += t.probs[j];
      for (Index i : mem)
        for (Index j : mem) P(i, j) += pick * t.probs[j] / z;
    }
  }
  if (lazy_extra > 0) P.diagonal().array() += pick * lazy_extra;
  return P;
}

}  // namespace

Kernel glauber(const TablePtr& table, bool build_matrix) {
  Kernel k;
  k.space = table;
  k.meta.name = "glauber";
  k.meta.max_block_size = 1;
  k.meta.max_selection_prob = 1.0 / table->n();
  const auto sys = table->sys;
  if (build_matrix)
    k.P = single_site_heat_bath_matrix(*table, table->free_vertices,
                                       double(table->n() - int(table->free_vertices.size())));
  auto factors = std::make_shared<LocalFactors>(*sys);
  Pinning tau = table->pinning;
  k.step = [sys, factors, tau](const Config& sigma, Rng& rng) {
    Config next = sigma;
    int x = rng.uniform_int(sys->n());
    if (tau.pins(x)) return next;
    VectorXd w;
    factors->weights(*sys, sigma, x, w);
    if (w.sum() <= 0) throw std::runtime_error("glauber step: empty conditional support");
    next[x] = rng.discrete(w.data(), sys->q);
    return next;
  };
  return k;
}

Kernel glauber_unpinned_only(const TablePtr& table, bool build_matrix) {
  Kernel k;
  k.space = table;
  k.meta.name = "glauber_unpinned";
  k.meta.max_block_size = 1;
  k.meta.max_selection_prob = 1.0 / double(table->free_vertices.size());
  const auto sys = table->sys;
  if (build_matrix) k.P = single_site_heat_bath_matrix(*table, table->free_vertices, 0.0);
  auto factors = std::make_shared<LocalFactors>(*sys);
  auto free_vertices = std::make_shared<std::vector<int>>(table->free_vertices);
  k.step = [sys, factors, free_vertices](const Config& sigma, Rng& rng) {
    Config next = sigma;
    int x = (*free_vertices)[static_cast<std::size_t>(rng.uniform_int(int(free_vertices->size())))];
    VectorXd w;
    factors->weights(*sys, sigma, x, w);
    next[x] = rng.discrete(w.data(), sys->q);
    return next;
  };
  return k;
}

VectorXd heat_bath_update_row(const GibbsTable& t, const std::vector<int>& block, Index state) {
  std::vector<int> free_block;
  for (int v : block)
    if (!t.pinning.pins(v)) free_block.push_back(v);
  std::uint64_t key = mask_code(t.codes[static_cast<std::size_t>(state)], free_block, t.n(), t.q());
  VectorXd row = VectorXd::Zero(t.size());
  double z = 0;
  for (Index i = 0; i < t.size(); ++i)
    if (mask_code(t.codes[static_cast<std::size_t>(i)], free_block, t.n(), t.q()) == key) z += t.probs[i];
  for (Index i = 0; i < t.size(); ++i)
    if (mask_code(t.codes[static_cast<std::size_t>(i)], free_block, t.n(), t.q()) == key)
      row[i] = t.probs[i] / z;
  return row;
}

Kernel block_dynamics(const TablePtr& table, const BlockWeights& alpha, bool build_matrix) {
  Kernel k;
  k.space = table;
  k.meta.name = "block_dynamics";
  double M = 0;
  for (std::size_t b = 0; b < alpha.blocks.size(); ++b)
    if (alpha.probs[Index(b)] > 0) M = std::max(M, double(alpha.blocks[b].size()));
  k.meta.max_block_size = M;
  VectorXd cover = VectorXd::Zero(table->n());
  for (std::size_t b = 0; b < alpha.blocks.size(); ++b)
    for (int v : alpha.blocks[b]) cover[v] += alpha.probs[Index(b)];
  k.meta.max_selection_prob = cover.maxCoeff();

  const auto sys = table->sys;
  if (build_matrix) {
    const Index m = table->size();
    MatrixXd P = MatrixXd::Zero(m, m);
    for (std::size_t b = 0; b < alpha.blocks.size(); ++b) {
      double ab = alpha.probs[Index(b)];
      if (ab <= 0) continue;
      std::vector<int> free_block;
      for (int v : alpha.blocks[b])
        if (!table->pinning.pins(v)) free_block.push_back(v);
      FiberIndex fx = make_fibers(*table, free_block);
      std::vector<std::vector<Index>> members(static_cast<std::size_t>(fx.count));
      for (Index i = 0; i < m; ++i) members[static_cast<std::size_t>(fx.fiber_of[static_cast<std::size_t>(i)])].push_back(i);
      for (auto& mem : members) {
        double z = 0;
        for (Index j : mem) z += table->probs[j];
        for (Index i : mem)
          for (Index j : mem) P(i, j) += ab * table->probs[j] / z;
      }
    }
    k.P = P;
  }

  // streaming step: exact conditional resampling of the block by local
  // enumeration (guarded by block size)
  auto blocks = std::make_shared<BlockWeights>(alpha);
  Pinning tau = table->pinning;
  k.step = [sys, blocks, tau](const Config& sigma, Rng& rng) {
    int b = rng.discrete(blocks->probs.data(), int(blocks->probs.size()));
    std::vector<int> free_block;
    for (int v : blocks->blocks[static_cast<std::size_t>(b)])
      if (!tau.pins(v)) free_block.push_back(v);
    Config next = sigma;
    if (free_block.empty()) return next;
    if (free_block.size() > 20) throw CapExceeded("block step: block too large to enumerate");
    Index count = 1;
    for (std::size_t i = 0; i < free_block.size(); ++i) count *= sys->q;
    std::vector<double> w(static_cast<std::size_t>(count));
    Config probe = sigma;
    for (Index code = 0; code < count; ++code) {
      Index c = code;
      for (auto it = free_block.rbegin(); it != free_block.rend(); ++it) {
        probe[*it] = int(c % sys->q);
        c /= sys->q;
      }
      double lw = sys->log_weight(probe);
      w[static_cast<std::size_t>(code)] = lw == kNegInf ? 0.0 : std::exp(lw);
    }
    Index pick = rng.discrete(w.data(), int(count));
    for (auto it = free_block.rbegin(); it != free_block.rend(); ++it) {
      next[*it] = int(pick % sys->q);
      pick /= sys->q;
    }
    return next;
  };
  return k;
}

FlipParams FlipParams::load(const std::string& json_path) {
  std::ifstream in(json_path);
  if (!in) throw std::runtime_error("cannot open flip parameter file: " + json_path);
  nlohmann::json j;
  in >> j;
  FlipParams fp;
  auto arr = j.at("p").get<std::vector<double>>();
  if (arr.size() != 6) throw std::invalid_argument("flip parameters: expected 6 entries p1..p6");
  for (int s = 1; s <= 6; ++s) {
    double v = arr[static_cast<std::size_t>(s - 1)];
    if (v < 0 || v > 1) throw std::invalid_argument("flip parameters: p_s outside [0,1]");
    fp.p[static_cast<std::size_t>(s)] = v;
  }
  fp.source = j.value("source", "");
  return fp;
}

FlipParams FlipParams::single_vertex_only() {
  FlipParams fp;
  fp.p = {0, 1, 0, 0, 0, 0, 0};
  fp.source = "p_s = 1(s=1)";
  return fp;
}

namespace {

// bicolored component of x with colors {sigma_x, a}
std::vector<int> kempe_component(const Graph& g, const Config& sigma, int x, int a) {
  int c0 = sigma[x];
  std::vector<int> comp;
  std::vector<char> seen(static_cast<std::size_t>(g.n), 0);
  std::vector<int> stack{x};
  seen[static_cast<std::size_t>(x)] = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    comp.push_back(v);
    for (int u : g.adj[static_cast<std::size_t>(v)]) {
      if (seen[static_cast<std::size_t>(u)]) continue;
      if (sigma[u] == c0 || sigma[u] == a) {
        seen[static_cast<std::size_t>(u)] = 1;
        stack.push_back(u);
      }
    }
  }
  std::sort(comp.begin(), comp.end());
  return comp;
}

}  // namespace

Kernel flip_dynamics(const TablePtr& table, const FlipParams& params, bool build_matrix) {
  const auto sys = table->sys;
  if (sys->kind != ModelKind::colorings)
    throw std::invalid_argument("flip_dynamics: colorings model required");
  Kernel k;
  k.space = table;
  k.meta.name = "flip";
  const int n = sys->n();
  const int q = sys->q;
  Pinning tau = table->pinning;

  double measured_M = 0, measured_D = 0;
  if (build_matrix) {
    const Index m = table->size();
    MatrixXd P = MatrixXd::Zero(m, m);
    double pick = 1.0 / double(n * q);
    VectorXd select_prob(n);
    for (Index i = 0; i < m; ++i) {
      const Config& sigma = table->states[static_cast<std::size_t>(i)];
      select_prob.setZero();
      for (int x = 0; x < n; ++x)
        for (int a = 0; a < q; ++a) {
          auto comp = kempe_component(sys->graph, sigma, x, a);
          bool pinned = std::any_of(comp.begin(), comp.end(), [&](int v) { return tau.pins(v); });
          int s = int(comp.size());
          double ps = (!pinned && s <= 6) ? params.p[static_cast<std::size_t>(s)] : 0.0;
          if (pinned || ps <= 0) {
            P(i, i) += pick;
            continue;
          }
          for (int v : comp) select_prob[v] += pick;
          double flip_prob = ps / s;
          Config flipped = sigma;
          for (int v : comp) flipped[v] = flipped[v] == sigma[x] ? a : sigma[x];
          Index j = table->find(flipped);
          if (j < 0) throw std::runtime_error("flip_dynamics: flipped coloring left the table");
          P(i, j) += pick * flip_prob;
          P(i, i) += pick * (1 - flip_prob);
          measured_M = std::max(measured_M, double(s));
        }
      measured_D = std::max(measured_D, select_prob.maxCoeff());
    }
    k.P = P;
    k.meta.max_block_size = measured_M;
    k.meta.max_selection_prob = measured_D;
  } else {
    k.meta.max_block_size = 6;
    double dd = 1;
    for (int i = 0; i < 6; ++i) dd *= sys->graph.max_degree;
    k.meta.max_selection_prob = dd / n;
  }

  auto p = params;
  k.step = [sys, tau, p, n, q](const Config& sigma, Rng& rng) {
    Config next = sigma;
    int x = rng.uniform_int(n);
    int a = rng.uniform_int(q);
    auto comp = kempe_component(sys->graph, sigma, x, a);
    for (int v : comp)
      if (tau.pins(v)) return next;
    int s = int(comp.size());
    double ps = s <= 6 ? p.p[static_cast<std::size_t>(s)] : 0.0;
    if (ps <= 0) return next;
    if (rng.uniform() < ps / s)
      for (int v : comp) next[v] = next[v] == sigma[x] ? a : sigma[x];
    return next;
  };
  return k;
}

Kernel swendsen_wang(const TablePtr& table, bool build_matrix) {
  const auto sys = table->sys;
  if (sys->kind != ModelKind::ising && sys->kind != ModelKind::potts)
    throw std::invalid_argument("swendsen_wang: ferromagnetic Ising/Potts required");
  if (sys->beta < 0) throw std::invalid_argument("swendsen_wang: beta >= 0 required");
  if (!table->pinning.empty()) throw std::invalid_argument("swendsen_wang: pinning unsupported");
  for (auto& b : sys->B)
    if ((b.array() - b[0]).abs().maxCoeff() > 0)
      throw std::invalid_argument("swendsen_wang: spin-dependent fields unsupported");

  Kernel k;
  k.space = table;
  k.meta.name = "swendsen_wang";
  k.meta.max_block_size = double(sys->n());
  k.meta.max_selection_prob = 1.0;
  if (build_matrix) k.P = sw_step_composition(enumerate_joint(table));

  const double p = 1.0 - std::exp(-sys->beta);
  const int q = sys->q;
  k.step = [sys, p, q](const Config& sigma, Rng& rng) {
    const Graph& g = sys->graph;
    std::vector<int> parent(static_cast<std::size_t>(g.n));
    for (int v = 0; v < g.n; ++v) parent[static_cast<std::size_t>(v)] = v;
    std::function<int(int)> find = [&](int v) {
      while (parent[static_cast<std::size_t>(v)] != v) v = parent[static_cast<std::size_t>(v)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
      return v;
    };
    for (auto& [u, v] : g.edges)
      if (sigma[u] == sigma[v] && rng.uniform() < p) parent[static_cast<std::size_t>(find(u))] = find(v);
    Config next(g.n);
    std::vector<int> color(static_cast<std::size_t>(g.n), -1);
    for (int v = 0; v < g.n; ++v) {
      int r = find(v);
      if (color[static_cast<std::size_t>(r)] < 0) color[static_cast<std::size_t>(r)] = rng.uniform_int(q);
      next[v] = color[static_cast<std::size_t>(r)];
    }
    return next;
  };
  return k;
}

Kernel select_update(const TablePtr& table, const SelectUpdate& su, double stationarity_tol) {
  Kernel k;
  k.space = table;
  k.meta.name = "select_update";
  const Index m = table->size();
  const int nb = int(su.blocks.size());
  MatrixXd P = MatrixXd::Zero(m, m);
  VectorXd cover = VectorXd::Zero(table->n());
  double M = 0, D = 0;
  for (Index i = 0; i < m; ++i) {
    VectorXd sel = su.selector(i);
    if (sel.size() != nb) throw std::invalid_argument("select_update: selector size mismatch");
    if (std::abs(sel.sum() - 1.0) > 1e-12)
      throw std::invalid_argument("select_update: selector must be a distribution");
    cover.setZero();
    for (int b = 0; b < nb; ++b) {
      if (sel[b] <= 0) continue;
      M = std::max(M, double(su.blocks[static_cast<std::size_t>(b)].size()));
      for (int v : su.blocks[static_cast<std::size_t>(b)]) cover[v] += sel[b];
      VectorXd row = su.updater(i, b);
      if (std::abs(row.sum() - 1.0) > 1e-10)
        throw std::invalid_argument("select_update: update row must be a distribution");
      P.row(i) += sel[b] * row.transpose();
    }
    D = std::max(D, cover.maxCoeff());
  }
  k.meta.max_block_size = M;
  k.meta.max_selection_prob = D;
  k.P = P;
  const VectorXd& mu = table->probs;
  double err = tv_distance(VectorXd(P.transpose() * mu), mu);
  if (err > stationarity_tol)
    throw std::runtime_error("select_update: stationarity check failed, TV = " + format_g17(err));
  // generic sampler: walk the exact row
  k.step = [table, P](const Config& sigma, Rng& rng) {
    Index i = table->find(sigma);
    if (i < 0) throw std::invalid_argument("select_update step: state not in table");
    VectorXd row = P.row(i);
    Index j = rng.discrete(row.data(), int(row.size()));
    return table->states[static_cast<std::size_t>(j)];
  };
  return k;
}

}  // namespace spinlab
