#include "spinlab/graph.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "spinlab/rng.hpp"

namespace spinlab {

void Graph::finalize() {
  adj.assign(n, {});
  boundary_adj.assign(n, {});
  std::set<std::pair<int, int>> seen;
  for (auto& [u, v] : edges) {
    if (u == v) throw std::invalid_argument("graph: self-loop");
    if (u > v) std::swap(u, v);
    if (u < 0 || v >= n) throw std::invalid_argument("graph: edge endpoint out of range");
    if (!seen.insert({u, v}).second) throw std::invalid_argument("graph: duplicate edge");
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  std::set<std::pair<int, int>> bseen;
  for (auto& [u, b] : boundary_edges) {
    if (u < 0 || u >= n || b < 0 || b >= num_boundary)
      throw std::invalid_argument("graph: boundary edge must join interior and boundary");
    if (!bseen.insert({u, b}).second) throw std::invalid_argument("graph: duplicate boundary edge");
    boundary_adj[u].push_back(b);
  }
  max_degree = 0;
  for (int v = 0; v < n; ++v) {
    std::sort(adj[v].begin(), adj[v].end());
    max_degree = std::max(max_degree, int(adj[v].size() + boundary_adj[v].size()));
  }
  if (original_label.empty()) {
    original_label.resize(n + num_boundary);
    std::iota(original_label.begin(), original_label.end(), 0);
  }
}

bool Graph::has_edge(int u, int v) const {
  return std::binary_search(adj[u].begin(), adj[u].end(), v);
}

Graph Graph::from_edges(int n, std::vector<std::pair<int, int>> edges) {
  Graph g;
  g.n = n;
  g.edges = std::move(edges);
  g.finalize();
  return g;
}

Graph Graph::path(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i + 1 < n; ++i) e.push_back({i, i + 1});
  return from_edges(n, std::move(e));
}

Graph Graph::cycle(int n) {
  if (n < 3) throw std::invalid_argument("cycle needs n >= 3");
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i) e.push_back({std::min(i, (i + 1) % n), std::max(i, (i + 1) % n)});
  return from_edges(n, std::move(e));
}

Graph Graph::complete(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) e.push_back({i, j});
  return from_edges(n, std::move(e));
}

Graph Graph::complete_bipartite(int a, int b) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < a; ++i)
    for (int j = 0; j < b; ++j) e.push_back({i, a + j});
  return from_edges(a + b, std::move(e));
}

Graph Graph::grid2d(int rows, int cols) {
  auto id = [cols](int r, int c) { return r * cols + c; };
  std::vector<std::pair<int, int>> e;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) e.push_back({id(r, c), id(r, c + 1)});
      if (r + 1 < rows) e.push_back({id(r, c), id(r + 1, c)});
    }
  return from_edges(rows * cols, std::move(e));
}

Graph Graph::random_regular(int degree, int n, std::uint64_t seed) {
  if (std::int64_t(n) * degree % 2 != 0) throw std::invalid_argument("n*degree must be even");
  if (degree >= n) throw std::invalid_argument("degree must be < n");
  Rng rng(Rng::mix(seed ^ 0x9e3779b9ULL));
  for (int attempt = 0; attempt < 20000; ++attempt) {
    std::vector<int> stubs(static_cast<std::size_t>(n) * degree);
    for (int i = 0; i < n * degree; ++i) stubs[static_cast<std::size_t>(i)] = i / degree;
    for (int i = n * degree - 1; i > 0; --i) {
      int j = rng.uniform_int(i + 1);
      std::swap(stubs[static_cast<std::size_t>(i)], stubs[static_cast<std::size_t>(j)]);
    }
    std::set<std::pair<int, int>> es;
    bool ok = true;
    for (int i = 0; i < n * degree; i += 2) {
      int u = stubs[static_cast<std::size_t>(i)], v = stubs[static_cast<std::size_t>(i) + 1];
      if (u == v) { ok = false; break; }
      if (u > v) std::swap(u, v);
      if (!es.insert({u, v}).second) { ok = false; break; }
    }
    if (ok) return from_edges(n, {es.begin(), es.end()});
  }
  throw std::runtime_error("random_regular: pairing failed");
}

Graph Graph::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open graph file: " + path);
  int total = 0, m = 0, kb = 0;
  if (!(in >> total >> m >> kb)) throw std::runtime_error("graph file: bad header");
  std::vector<std::pair<int, int>> raw_edges(static_cast<std::size_t>(m));
  for (auto& [u, v] : raw_edges)
    if (!(in >> u >> v)) throw std::runtime_error("graph file: bad edge line");
  std::vector<std::pair<int, int>> raw_boundary(static_cast<std::size_t>(kb));
  for (auto& [u, s] : raw_boundary) {
    if (!(in >> u >> s)) throw std::runtime_error("graph file: bad boundary line");
    if (s < 1) throw std::runtime_error("graph file: boundary spins are 1-based");
  }
  std::vector<int> is_boundary(static_cast<std::size_t>(total), 0);
  for (auto& [u, s] : raw_boundary) {
    if (u < 0 || u >= total) throw std::runtime_error("graph file: boundary vertex out of range");
    is_boundary[static_cast<std::size_t>(u)] = 1;
  }
  // interior-first remap, original order preserved within each group
  std::vector<int> remap(static_cast<std::size_t>(total), -1);
  Graph g;
  for (int v = 0; v < total; ++v)
    if (!is_boundary[static_cast<std::size_t>(v)]) {
      remap[static_cast<std::size_t>(v)] = g.n++;
      g.original_label.push_back(v);
    }
  for (int v = 0; v < total; ++v)
    if (is_boundary[static_cast<std::size_t>(v)]) {
      remap[static_cast<std::size_t>(v)] = g.num_boundary++;
      g.original_label.push_back(v);
    }
  g.boundary_spins.assign(static_cast<std::size_t>(g.num_boundary), -1);
  for (auto& [u, s] : raw_boundary) g.boundary_spins[static_cast<std::size_t>(remap[static_cast<std::size_t>(u)])] = s - 1;
  for (auto& [u, v] : raw_edges) {
    bool ub = is_boundary[static_cast<std::size_t>(u)], vb = is_boundary[static_cast<std::size_t>(v)];
    if (ub && vb) throw std::invalid_argument("graph file: edge joins two boundary vertices");
    if (!ub && !vb)
      g.edges.push_back({remap[static_cast<std::size_t>(u)], remap[static_cast<std::size_t>(v)]});
    else if (ub)
      g.boundary_edges.push_back({remap[static_cast<std::size_t>(v)], remap[static_cast<std::size_t>(u)]});
    else
      g.boundary_edges.push_back({remap[static_cast<std::size_t>(u)], remap[static_cast<std::size_t>(v)]});
  }
  g.finalize();
  return g;
}

void Graph::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write graph file: " + path);
  out << (n + num_boundary) << ' ' << (edges.size() + boundary_edges.size()) << ' '
      << num_boundary << '\n';
  for (auto& [u, v] : edges) out << original_label[static_cast<std::size_t>(u)] << ' ' << original_label[static_cast<std::size_t>(v)] << '\n';
  for (auto& [u, b] : boundary_edges)
    out << original_label[static_cast<std::size_t>(u)] << ' ' << original_label[static_cast<std::size_t>(n + b)] << '\n';
  for (int b = 0; b < num_boundary; ++b) {
    int s = boundary_spins.empty() ? 0 : boundary_spins[static_cast<std::size_t>(b)];
    out << original_label[static_cast<std::size_t>(n + b)] << ' ' << (s + 1) << '\n';
  }
}

Graph Graph::with_boundary(const std::vector<std::pair<int, int>>& vertex_spin) const {
  if (num_boundary > 0) throw std::invalid_argument("with_boundary: graph already has a boundary");
  std::vector<int> spin_of(static_cast<std::size_t>(n), -1);
  for (auto& [v, s] : vertex_spin) {
    if (v < 0 || v >= n) throw std::invalid_argument("with_boundary: vertex out of range");
    spin_of[static_cast<std::size_t>(v)] = s;
  }
  Graph g;
  std::vector<int> remap(static_cast<std::size_t>(n), -1);
  for (int v = 0; v < n; ++v)
    if (spin_of[static_cast<std::size_t>(v)] < 0) {
      remap[static_cast<std::size_t>(v)] = g.n++;
      g.original_label.push_back(original_label[static_cast<std::size_t>(v)]);
    }
  for (int v = 0; v < n; ++v)
    if (spin_of[static_cast<std::size_t>(v)] >= 0) {
      g.boundary_spins.push_back(spin_of[static_cast<std::size_t>(v)]);
      remap[static_cast<std::size_t>(v)] = g.num_boundary++;
      g.original_label.push_back(original_label[static_cast<std::size_t>(v)]);
    }
  for (auto& [u, v] : edges) {
    bool ub = spin_of[static_cast<std::size_t>(u)] >= 0, vb = spin_of[static_cast<std::size_t>(v)] >= 0;
    if (ub && vb) continue;  // edge entirely inside the boundary drops out
    if (!ub && !vb)
      g.edges.push_back({remap[static_cast<std::size_t>(u)], remap[static_cast<std::size_t>(v)]});
    else if (ub)
      g.boundary_edges.push_back({remap[static_cast<std::size_t>(v)], remap[static_cast<std::size_t>(u)]});
    else
      g.boundary_edges.push_back({remap[static_cast<std::size_t>(u)], remap[static_cast<std::size_t>(v)]});
  }
  g.finalize();
  return g;
}

Partition greedy_partition(const Graph& g) {
  Partition p;
  std::vector<int> color(static_cast<std::size_t>(g.n), -1);
  for (int v = 0; v < g.n; ++v) {
    std::vector<char> used(static_cast<std::size_t>(g.max_degree) + 2, 0);
    for (int u : g.adj[static_cast<std::size_t>(v)])
      if (color[static_cast<std::size_t>(u)] >= 0) used[static_cast<std::size_t>(color[static_cast<std::size_t>(u)])] = 1;
    int c = 0;
    while (used[static_cast<std::size_t>(c)]) ++c;
    color[static_cast<std::size_t>(v)] = c;
    if (c >= int(p.classes.size())) p.classes.resize(static_cast<std::size_t>(c) + 1);
    p.classes[static_cast<std::size_t>(c)].push_back(v);
  }
  return p;
}

Graph make_graph_family(const std::string& family, const std::vector<long>& params,
                        std::uint64_t seed) {
  auto need = [&](std::size_t k) {
    if (params.size() < k) throw std::invalid_argument("graph family " + family + ": missing parameters");
  };
  if (family == "path") { need(1); return Graph::path(int(params[0])); }
  if (family == "cycle") { need(1); return Graph::cycle(int(params[0])); }
  if (family == "complete") { need(1); return Graph::complete(int(params[0])); }
  if (family == "complete_bipartite") { need(2); return Graph::complete_bipartite(int(params[0]), int(params[1])); }
  if (family == "grid2d") { need(2); return Graph::grid2d(int(params[0]), int(params[1])); }
  if (family == "random_regular") {
    need(2);
    std::uint64_t s = params.size() >= 3 ? std::uint64_t(params[2]) : seed;
    return Graph::random_regular(int(params[0]), int(params[1]), s);
  }
  throw std::invalid_argument("unknown graph family: " + family);
}

}  // namespace spinlab
