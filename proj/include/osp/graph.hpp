#pragma once

#include "osp/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace osp {

// Undirected simple graph over nodes 0..N-1 with sorted adjacency lists.
// labels[i] keeps the original node label when the graph came from an
// edge-list file; it is empty for generated graphs.
struct Graph {
  std::vector<std::vector<int>> adjacency;
  std::vector<std::string> labels;

  Index node_count() const { return static_cast<Index>(adjacency.size()); }
  Index edge_count() const;
  bool has_edge(int u, int v) const;
};

// Parameters of the power-law cluster generator: n nodes, m edges per
// added node, triangle-closure probability p.
struct GeneratorParams {
  Index n = 0;
  int m = 1;
  double p = 0.0;
  std::uint64_t seed = 0;
};

// Symmetric integer matrix of exact shortest hop counts.
struct HopDistanceMatrix {
  Eigen::MatrixXi entries;

  Index size() const { return entries.rows(); }
};

// Parses whitespace-separated "label label" lines. Lines starting with
// '#' or '%' are comments; self loops and repeated edges are dropped.
// Node ids follow first appearance order.
Graph load_edge_list(std::istream& in);
Graph load_edge_list(const std::string& text);
Graph load_edge_list_file(const std::string& path);

// Growth model: each new node attaches m edges by preferential
// attachment, each after the first preceded by a coin flip (prob p) that
// tries to close a triangle through the previous target instead. Repeat
// endpoints are re-drawn, so the result always has exactly m*(n-m) edges.
Graph powerlaw_cluster_graph(const GeneratorParams& params);

// Induced subgraph on the largest connected component, nodes relabeled
// 0..K-1 in increasing original index order. Size ties keep the component
// holding the smallest original index.
Graph largest_connected_component(const Graph& g);

// BFS from every node. Throws if the graph is disconnected.
HopDistanceMatrix hop_distance_matrix(const Graph& g);

double average_degree(const Graph& g);

// Singular values of a square matrix in descending order.
Eigen::VectorXd singular_value_profile(const Eigen::MatrixXd& m);
Eigen::VectorXd singular_value_profile(const HopDistanceMatrix& h);

}  // namespace osp
