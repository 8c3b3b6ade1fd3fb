#include "spinlab/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace spinlab {

std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::ising: return "ising";
    case ModelKind::potts: return "potts";
    case ModelKind::hardcore: return "hardcore";
    case ModelKind::colorings: return "colorings";
    case ModelKind::general: return "general";
  }
  return "?";
}

bool Pinning::pins(int v) const {
  for (auto& [u, a] : assign)
    if (u == v) return true;
  return false;
}

int Pinning::spin(int v) const {
  for (auto& [u, a] : assign)
    if (u == v) return a;
  return -1;
}

Pinning Pinning::extended(int v, int a) const {
  if (pins(v)) throw std::invalid_argument("pinning: vertex already pinned");
  Pinning out = *this;
  out.assign.push_back({v, a});
  std::sort(out.assign.begin(), out.assign.end());
  return out;
}

std::vector<int> Pinning::vertices() const {
  std::vector<int> vs;
  vs.reserve(assign.size());
  for (auto& [v, a] : assign) vs.push_back(v);
  return vs;
}

std::uint64_t Pinning::encode(int n, int q) const {
  std::uint64_t code = 0;
  for (int v = 0; v < n; ++v) {
    int a = spin(v);
    code = code * std::uint64_t(q + 1) + std::uint64_t(a + 1);
  }
  return code;
}

std::string Pinning::describe() const {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (auto& [v, a] : assign) {
    if (!first) os << ',';
    first = false;
    os << v << ':' << (a + 1);
  }
  os << '}';
  return os.str();
}

double SpinSystem::log_weight(const Config& sigma) const {
  if (sigma.size() != n()) throw std::invalid_argument("log_weight: configuration length mismatch");
  double lw = 0;
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    auto [u, v] = graph.edges[e];
    double t = logA[e](sigma[u], sigma[v]);
    if (t == kNegInf) return kNegInf;
    lw += t;
  }
  for (int v = 0; v < n(); ++v) {
    double t = logB[static_cast<std::size_t>(v)](sigma[v]);
    if (t == kNegInf) return kNegInf;
    lw += t;
  }
  return lw;
}

double SpinSystem::weight(const Config& sigma) const {
  double lw = log_weight(sigma);
  return lw == kNegInf ? 0.0 : std::exp(lw);
}

bool SpinSystem::locally_feasible(int x, int a, const Pinning& tau) const {
  if (B[static_cast<std::size_t>(x)](a) <= 0) return false;
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    auto [u, v] = graph.edges[e];
    int other = -1;
    if (u == x) other = v;
    else if (v == x) other = u;
    else continue;
    int s = tau.spin(other);
    if (s >= 0) {
      double val = (u == x) ? A[e](a, s) : A[e](s, a);
      if (val <= 0) return false;
    }
  }
  return true;
}

namespace {

MatrixXd log_matrix(const MatrixXd& m) {
  MatrixXd out = m;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out(i, j) = m(i, j) > 0 ? std::log(m(i, j)) : kNegInf;
  return out;
}

VectorXd log_vector(const VectorXd& v) {
  VectorXd out = v;
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = v[i] > 0 ? std::log(v[i]) : kNegInf;
  return out;
}

// Boundary spins multiply into the effective vertex fields; the runtime never
// sees boundary vertices again.
void finalize_system(SpinSystem& sys, const std::vector<MatrixXd>& boundary_A, const Caps& caps) {
  const Graph& g = sys.graph;
  for (auto& m : sys.A) {
    if (m.rows() != sys.q || m.cols() != sys.q)
      throw std::invalid_argument("interaction matrix has wrong shape");
    if ((m.array() < 0).any()) throw std::invalid_argument("interaction matrix has negative entries");
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 0)
      throw std::invalid_argument("interaction matrix is not symmetric");
  }
  for (auto& b : sys.B)
    if ((b.array() < 0).any()) throw std::invalid_argument("field vector has negative entries");
  if (!g.boundary_edges.empty()) {
    if (int(g.boundary_spins.size()) != g.num_boundary ||
        std::any_of(g.boundary_spins.begin(), g.boundary_spins.end(),
                    [&](int s) { return s < 0 || s >= sys.q; }))
      throw std::invalid_argument("boundary condition missing or out of range");
    for (std::size_t e = 0; e < g.boundary_edges.size(); ++e) {
      auto [u, b] = g.boundary_edges[e];
      int xi = g.boundary_spins[static_cast<std::size_t>(b)];
      for (int a = 0; a < sys.q; ++a) sys.B[static_cast<std::size_t>(u)](a) *= boundary_A[e](a, xi);
    }
  }
  sys.logA.clear();
  sys.logB.clear();
  for (auto& m : sys.A) sys.logA.push_back(log_matrix(m));
  for (auto& b : sys.B) sys.logB.push_back(log_vector(b));

  // feasibility oracle at construction when the state space is enumerable
  double states = std::pow(double(sys.q), double(sys.n()));
  if (states <= double(caps.state_cap)) {
    bool found = false;
    for_each_feasible(sys, {}, [&](const Config&, double) { found = true; });
    if (!found) throw std::invalid_argument("infeasible system: empty state space");
  }
}

}  // namespace

SpinSystem build_ising(const Graph& g, double beta, double h, const Caps& caps) {
  SpinSystem sys;
  sys.graph = g;
  sys.q = 2;
  sys.kind = ModelKind::ising;
  sys.beta = beta;
  sys.field_h = VectorXd::Constant(1, h);
  MatrixXd A(2, 2);
  A << std::exp(beta), 1, 1, std::exp(beta);
  sys.A.assign(g.edges.size(), A);
  VectorXd B(2);
  B << std::exp(h), std::exp(-h);
  sys.B.assign(static_cast<std::size_t>(g.n), B);
  finalize_system(sys, std::vector<MatrixXd>(g.boundary_edges.size(), A), caps);
  return sys;
}

SpinSystem build_potts(const Graph& g, int q, double beta, const VectorXd& h, const Caps& caps) {
  if (q < 2) throw std::invalid_argument("potts: q >= 2 required");
  SpinSystem sys;
  sys.graph = g;
  sys.q = q;
  sys.kind = ModelKind::potts;
  sys.beta = beta;
  sys.field_h = h.size() ? h : VectorXd::Zero(q);
  if (sys.field_h.size() != q) throw std::invalid_argument("potts: field vector must have q entries");
  MatrixXd A = MatrixXd::Ones(q, q);
  for (int a = 0; a < q; ++a) A(a, a) = std::exp(beta);
  sys.A.assign(g.edges.size(), A);
  VectorXd B = sys.field_h.array().exp();
  sys.B.assign(static_cast<std::size_t>(g.n), B);
  finalize_system(sys, std::vector<MatrixXd>(g.boundary_edges.size(), A), caps);
  return sys;
}

SpinSystem build_hardcore(const Graph& g, double lambda, const Caps& caps) {
  if (lambda <= 0) throw std::invalid_argument("hardcore: lambda > 0 required");
  SpinSystem sys;
  sys.graph = g;
  sys.q = 2;
  sys.kind = ModelKind::hardcore;
  sys.lambda = lambda;
  MatrixXd A(2, 2);
  A << 0, 1, 1, 1;  // spin 0 = occupied
  sys.A.assign(g.edges.size(), A);
  VectorXd B(2);
  B << lambda, 1;
  sys.B.assign(static_cast<std::size_t>(g.n), B);
  finalize_system(sys, std::vector<MatrixXd>(g.boundary_edges.size(), A), caps);
  return sys;
}

SpinSystem build_colorings(const Graph& g, int q, const Caps& caps) {
  if (q < 2) throw std::invalid_argument("colorings: q >= 2 required");
  SpinSystem sys;
  sys.graph = g;
  sys.q = q;
  sys.kind = ModelKind::colorings;
  MatrixXd A = MatrixXd::Ones(q, q) - MatrixXd::Identity(q, q);
  sys.A.assign(g.edges.size(), A);
  sys.B.assign(static_cast<std::size_t>(g.n), VectorXd::Ones(q));
  if (q < g.max_degree + 2)
    sys.warnings.push_back("colorings: q < max_degree + 2, total connectedness not guaranteed");
  finalize_system(sys, std::vector<MatrixXd>(g.boundary_edges.size(), A), caps);
  return sys;
}

SpinSystem build_general(const Graph& g, int q, std::vector<MatrixXd> interactions,
                         std::vector<VectorXd> fields, const Caps& caps) {
  if (q < 2) throw std::invalid_argument("general: q >= 2 required");
  SpinSystem sys;
  sys.graph = g;
  sys.q = q;
  sys.kind = ModelKind::general;
  std::size_t need = g.edges.size() + g.boundary_edges.size();
  if (interactions.size() == 1) interactions.assign(need, interactions[0]);
  if (interactions.size() != need)
    throw std::invalid_argument("general: expected one interaction matrix per edge");
  sys.A.assign(interactions.begin(), interactions.begin() + std::ptrdiff_t(g.edges.size()));
  std::vector<MatrixXd> boundary_A(interactions.begin() + std::ptrdiff_t(g.edges.size()),
                                   interactions.end());
  if (fields.empty()) fields.assign(static_cast<std::size_t>(g.n), VectorXd::Ones(q));
  if (int(fields.size()) != g.n) throw std::invalid_argument("general: expected one field per vertex");
  sys.B = std::move(fields);
  finalize_system(sys, boundary_A, caps);
  return sys;
}

void for_each_feasible(const SpinSystem& sys, const Pinning& tau,
                       const std::function<void(const Config&, double)>& fn) {
  const int n = sys.n();
  const int q = sys.q;
  for (auto& [v, a] : tau.assign)
    if (v < 0 || v >= n || a < 0 || a >= q) throw std::invalid_argument("pinning out of range");

  // factors indexed by the later endpoint so the DFS accumulates each edge once
  std::vector<std::vector<std::pair<int, const MatrixXd*>>> back_edges(static_cast<std::size_t>(n));
  for (std::size_t e = 0; e < sys.graph.edges.size(); ++e) {
    auto [u, v] = sys.graph.edges[e];
    back_edges[static_cast<std::size_t>(std::max(u, v))].push_back({std::min(u, v), &sys.logA[e]});
  }
  Config sigma(n);
  std::vector<int> pinned_spin(static_cast<std::size_t>(n), -1);
  for (auto& [v, a] : tau.assign) pinned_spin[static_cast<std::size_t>(v)] = a;

  // DFS over vertices in index order, pruning at the first zero factor;
  // spins increase innermost-last so visits are lexicographic
  std::function<void(int, double)> rec = [&](int v, double lw) {
    if (v == n) {
      fn(sigma, lw);
      return;
    }
    int forced = pinned_spin[static_cast<std::size_t>(v)];
    int lo = forced >= 0 ? forced : 0;
    int hi = forced >= 0 ? forced + 1 : q;
    for (int a = lo; a < hi; ++a) {
      double w = lw + sys.logB[static_cast<std::size_t>(v)](a);
      if (w == kNegInf) continue;
      for (auto& [u, logAe] : back_edges[static_cast<std::size_t>(v)]) {
        w += (*logAe)(sigma[u], a);
        if (w == kNegInf) break;
      }
      if (w == kNegInf) continue;
      sigma[v] = a;
      rec(v + 1, w);
    }
  };
  rec(0, 0.0);
}

Index unpinned_state_space_size(const SpinSystem& sys, const Pinning& tau) {
  int free_count = sys.n() - tau.size();
  double total = std::pow(double(sys.q), double(free_count));
  return total > 9e18 ? std::numeric_limits<Index>::max() : Index(total);
}

Feasibility check_pinning(const SpinSystem& sys, const Pinning& tau, const Caps& caps) {
  Feasibility out;
  if (unpinned_state_space_size(sys, tau) <= caps.state_cap) {
    bool found = false;
    for_each_feasible(sys, tau, [&](const Config&, double) { found = true; });
    out.feasible = found;
    return out;
  }
  out.local_only = true;
  out.feasible = true;
  for (auto& [v, a] : tau.assign)
    if (!sys.locally_feasible(v, a, tau)) {
      out.feasible = false;
      break;
    }
  return out;
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) {
    for (std::size_t i = 0; i < n; ++i) parent[i] = int(i);
  }
  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

// single-site flip graph connectivity over the given states
bool flip_connected(const std::vector<std::uint64_t>& codes, int n, int q,
                    const std::vector<int>& free_vertices) {
  if (codes.size() <= 1) return true;
  UnionFind uf(codes.size());
  std::vector<std::uint64_t> place(static_cast<std::size_t>(n), 1);
  for (int v = n - 2; v >= 0; --v) place[static_cast<std::size_t>(v)] = place[static_cast<std::size_t>(v) + 1] * std::uint64_t(q);
  // group states by code with one digit removed
  std::vector<std::pair<std::uint64_t, int>> keyed(codes.size());
  for (int v : free_vertices) {
    for (std::size_t i = 0; i < codes.size(); ++i) {
      std::uint64_t digit = (codes[i] / place[static_cast<std::size_t>(v)]) % std::uint64_t(q);
      keyed[i] = {codes[i] - digit * place[static_cast<std::size_t>(v)], int(i)};
    }
    std::sort(keyed.begin(), keyed.end());
    for (std::size_t i = 1; i < keyed.size(); ++i)
      if (keyed[i].first == keyed[i - 1].first) uf.unite(keyed[i].second, keyed[i - 1].second);
  }
  int root = uf.find(0);
  for (std::size_t i = 1; i < codes.size(); ++i)
    if (uf.find(int(i)) != root) return false;
  return true;
}

}  // namespace

ConnectivityResult is_totally_connected(const SpinSystem& sys, const Caps& caps,
                                        std::uint64_t sample_seed) {
  const int n = sys.n();
  const int q = sys.q;
  if (unpinned_state_space_size(sys, {}) > caps.state_cap)
    throw CapExceeded("is_totally_connected: state space exceeds cap");

  std::vector<std::uint64_t> all_codes;
  for_each_feasible(sys, {}, [&](const Config& c, double) { all_codes.push_back(config_code(c, q)); });
  if (all_codes.empty()) throw std::invalid_argument("is_totally_connected: empty state space");

  ConnectivityResult out;
  out.totally_connected = true;

  double pinning_estimate = std::pow(double(q + 1), double(n));
  bool exhaustive = pinning_estimate <= double(caps.pinning_cap);
  out.sampled = !exhaustive;
  if (!exhaustive && !caps.allow_sampled)
    throw CapExceeded("is_totally_connected: pinning sweep exceeds cap");

  std::vector<std::uint64_t> place(static_cast<std::size_t>(n), 1);
  for (int v = n - 2; v >= 0; --v) place[static_cast<std::size_t>(v)] = place[static_cast<std::size_t>(v) + 1] * std::uint64_t(q);

  auto check_subset = [&](const std::vector<int>& U) -> bool {
    std::vector<int> free_vertices;
    for (int v = 0; v < n; ++v)
      if (std::find(U.begin(), U.end(), v) == U.end()) free_vertices.push_back(v);
    // distinct projections onto U = feasible pinnings; bucket states by them
    std::vector<std::pair<std::uint64_t, std::uint64_t>> proj(all_codes.size());
    for (std::size_t i = 0; i < all_codes.size(); ++i) {
      std::uint64_t key = 0;
      for (int v : U) key = key * std::uint64_t(q) + (all_codes[i] / place[static_cast<std::size_t>(v)]) % std::uint64_t(q);
      proj[i] = {key, all_codes[i]};
    }
    std::sort(proj.begin(), proj.end());
    std::size_t i = 0;
    while (i < proj.size()) {
      std::size_t j = i;
      std::vector<std::uint64_t> member;
      while (j < proj.size() && proj[j].first == proj[i].first) member.push_back(proj[j++].second);
      if (!flip_connected(member, n, q, free_vertices)) return false;
      i = j;
    }
    return true;
  };

  if (exhaustive) {
    for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << n); ++mask) {
      std::vector<int> U;
      for (int v = 0; v < n; ++v)
        if (mask >> v & 1) U.push_back(v);
      if (int(U.size()) >= n) continue;
      if (!check_subset(U)) {
        out.totally_connected = false;
        return out;
      }
    }
  } else {
    Rng rng(Rng::mix(sample_seed));
    if (!check_subset({})) { out.totally_connected = false; return out; }
    for (int s = 0; s < caps.pinning_sample; ++s) {
      int k = rng.uniform_int(n);  // 0..n-1 pinned vertices
      std::vector<int> verts(static_cast<std::size_t>(n));
      for (int v = 0; v < n; ++v) verts[static_cast<std::size_t>(v)] = v;
      for (int i = 0; i < k; ++i) std::swap(verts[static_cast<std::size_t>(i)], verts[static_cast<std::size_t>(i + rng.uniform_int(n - i))]);
      std::vector<int> U(verts.begin(), verts.begin() + k);
      std::sort(U.begin(), U.end());
      if (!check_subset(U)) {
        out.totally_connected = false;
        return out;
      }
    }
  }
  return out;
}

}  // namespace spinlab
