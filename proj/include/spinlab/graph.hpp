#pragma once

#include <string>
#include <utility>
#include <vector>

#include "spinlab/common.hpp"

namespace spinlab {

// Undirected graph with an optional boundary. Interior vertices are 0..n-1,
// boundary vertices 0..num_boundary-1 in their own index space; boundary edges
// always join one interior and one boundary vertex. original_label maps the
// internal (interior-first) ordering back to the ids used in graph files.
struct Graph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;  // interior-interior, u < v
  std::vector<std::vector<int>> adj;       // interior adjacency lists

  int num_boundary = 0;
  std::vector<std::pair<int, int>> boundary_edges;    // (interior, boundary)
  std::vector<std::vector<int>> boundary_adj;         // per interior vertex
  std::vector<int> boundary_spins;                    // xi, 0-based; empty if unset
  std::vector<int> original_label;                    // size n + num_boundary

  int max_degree = 0;  // interior degree including boundary edges

  void finalize();     // builds adjacency, degree; validates invariants
  bool has_edge(int u, int v) const;

  static Graph from_edges(int n, std::vector<std::pair<int, int>> edges);
  static Graph path(int n);
  static Graph cycle(int n);
  static Graph complete(int n);
  static Graph complete_bipartite(int a, int b);
  static Graph grid2d(int rows, int cols);
  static Graph random_regular(int degree, int n, std::uint64_t seed);

  // Plain-text format: "n m k_boundary", then m lines "u v", then k_boundary
  // lines "u spin" with spins 1..q. Vertices 0-indexed; n counts boundary
  // vertices too.
  static Graph load(const std::string& path);
  void save(const std::string& path) const;

  // Turn the listed interior vertices (by current interior index) into
  // boundary vertices carrying the given 0-based spins.
  Graph with_boundary(const std::vector<std::pair<int, int>>& vertex_spin) const;
};

struct Partition {
  std::vector<std::vector<int>> classes;
  int k() const { return int(classes.size()); }
};

// First-fit greedy coloring in vertex order; classes are independent sets and
// k <= max_degree + 1.
Partition greedy_partition(const Graph& g);

Graph make_graph_family(const std::string& family, const std::vector<long>& params,
                        std::uint64_t seed);

}  // namespace spinlab
