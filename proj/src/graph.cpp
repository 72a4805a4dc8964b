#include "osp/graph.hpp"

#include "osp/rng.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <utility>

namespace osp {

Index Graph::edge_count() const {
  std::size_t endpoints = 0;
  for (const auto& nbrs : adjacency) endpoints += nbrs.size();
  return static_cast<Index>(endpoints / 2);
}

bool Graph::has_edge(int u, int v) const {
  const auto& nbrs = adjacency[static_cast<std::size_t>(u)];
  return std::binary_search(nbrs.begin(), nbrs.end(), v);
}

namespace {

void sort_adjacency(Graph& g) {
  for (auto& nbrs : g.adjacency) std::sort(nbrs.begin(), nbrs.end());
}

}  // namespace

Graph load_edge_list(std::istream& in) {
  std::unordered_map<std::string, int> ids;
  std::vector<std::string> labels;
  std::vector<std::pair<int, int>> edges;
  auto intern = [&](const std::string& token) {
    auto [it, fresh] = ids.try_emplace(token, static_cast<int>(labels.size()));
    if (fresh) labels.push_back(token);
    return it->second;
  };

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream tokens(line);
    std::string a, b, extra;
    if (!(tokens >> a)) continue;  // blank line
    if (a[0] == '#' || a[0] == '%') continue;
    if (!(tokens >> b)) {
      throw std::invalid_argument("edge list line " + std::to_string(line_no) +
                                  ": expected two labels, got one");
    }
    if (tokens >> extra) {
      throw std::invalid_argument("edge list line " + std::to_string(line_no) +
                                  ": expected two labels, got more");
    }
    const int u = intern(a);
    const int v = intern(b);
    if (u != v) edges.emplace_back(std::min(u, v), std::max(u, v));
  }
  if (labels.empty()) throw std::invalid_argument("edge list: empty input");

  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  Graph g;
  g.adjacency.resize(labels.size());
  g.labels = std::move(labels);
  for (const auto& [u, v] : edges) {
    g.adjacency[static_cast<std::size_t>(u)].push_back(v);
    g.adjacency[static_cast<std::size_t>(v)].push_back(u);
  }
  sort_adjacency(g);
  return g;
}

Graph load_edge_list(const std::string& text) {
  std::istringstream in(text);
  return load_edge_list(in);
}

Graph load_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list file: " + path);
  return load_edge_list(in);
}

Graph powerlaw_cluster_graph(const GeneratorParams& params) {
  const Index n = params.n;
  const int m = params.m;
  if (m < 1) {
    throw std::invalid_argument("powerlaw_cluster_graph: m must be >= 1");
  }
  if (n <= m) {
    throw std::invalid_argument("powerlaw_cluster_graph: need m < n, got m=" +
                                std::to_string(m) + " n=" + std::to_string(n));
  }
  if (!(params.p >= 0.0 && params.p <= 1.0)) {
    throw std::invalid_argument("powerlaw_cluster_graph: p must be in [0, 1]");
  }

  Graph g;
  g.adjacency.resize(static_cast<std::size_t>(n));
  // One entry per edge endpoint, so drawing uniformly from this list is
  // degree-proportional. The m seed nodes start with one entry each to
  // make the very first draws possible.
  std::vector<int> repeated;
  repeated.reserve(static_cast<std::size_t>(2 * m * (n - m) + m));
  for (int i = 0; i < m; ++i) repeated.push_back(i);

  std::mt19937_64 gen(params.seed);
  std::vector<int> candidates;
  auto linked = [&](int source, int v) {
    const auto& nbrs = g.adjacency[static_cast<std::size_t>(source)];
    return std::find(nbrs.begin(), nbrs.end(), v) != nbrs.end();
  };
  auto add_edge = [&](int u, int v) {
    g.adjacency[static_cast<std::size_t>(u)].push_back(v);
    g.adjacency[static_cast<std::size_t>(v)].push_back(u);
    repeated.push_back(v);
  };

  for (int source = m; source < static_cast<int>(n); ++source) {
    auto draw_preferential = [&]() {
      for (;;) {
        const int v = repeated[rng::below(gen, repeated.size())];
        if (v != source && !linked(source, v)) return v;
      }
    };
    int target = draw_preferential();
    add_edge(source, target);
    int formed = 1;
    while (formed < m) {
      if (rng::canonical(gen) < params.p) {
        // Triangle step: pick a neighbor of the previous target that the
        // source is not yet tied to. Falls through when none is left.
        candidates.clear();
        for (int w : g.adjacency[static_cast<std::size_t>(target)]) {
          if (w != source && !linked(source, w)) candidates.push_back(w);
        }
        if (!candidates.empty()) {
          add_edge(source, candidates[rng::below(gen, candidates.size())]);
          ++formed;
          continue;
        }
      }
      target = draw_preferential();
      add_edge(source, target);
      ++formed;
    }
    repeated.insert(repeated.end(), static_cast<std::size_t>(m), source);
  }
  sort_adjacency(g);
  return g;
}

Graph largest_connected_component(const Graph& g) {
  const Index n = g.node_count();
  if (n == 0) {
    throw std::invalid_argument("largest_connected_component: empty graph");
  }
  std::vector<int> component(static_cast<std::size_t>(n), -1);
  std::vector<int> queue;
  int best = -1;
  Index best_size = 0;
  int components = 0;
  for (int s = 0; s < static_cast<int>(n); ++s) {
    if (component[static_cast<std::size_t>(s)] >= 0) continue;
    const int id = components++;
    queue.clear();
    queue.push_back(s);
    component[static_cast<std::size_t>(s)] = id;
    Index size = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const int u = queue[head];
      ++size;
      for (int v : g.adjacency[static_cast<std::size_t>(u)]) {
        if (component[static_cast<std::size_t>(v)] < 0) {
          component[static_cast<std::size_t>(v)] = id;
          queue.push_back(v);
        }
      }
    }
    // Strict > keeps the earliest component on ties, which is the one
    // containing the smallest original index.
    if (size > best_size) {
      best_size = size;
      best = id;
    }
  }

  std::vector<int> old_to_new(static_cast<std::size_t>(n), -1);
  std::vector<int> kept;
  kept.reserve(static_cast<std::size_t>(best_size));
  for (int u = 0; u < static_cast<int>(n); ++u) {
    if (component[static_cast<std::size_t>(u)] == best) {
      old_to_new[static_cast<std::size_t>(u)] = static_cast<int>(kept.size());
      kept.push_back(u);
    }
  }

  Graph out;
  out.adjacency.resize(kept.size());
  if (!g.labels.empty()) {
    out.labels.reserve(kept.size());
    for (int u : kept) out.labels.push_back(g.labels[static_cast<std::size_t>(u)]);
  }
  for (std::size_t i = 0; i < kept.size(); ++i) {
    for (int v : g.adjacency[static_cast<std::size_t>(kept[i])]) {
      out.adjacency[i].push_back(old_to_new[static_cast<std::size_t>(v)]);
    }
  }
  sort_adjacency(out);
  return out;
}

HopDistanceMatrix hop_distance_matrix(const Graph& g) {
  const Index n = g.node_count();
  if (n == 0) {
    throw std::invalid_argument("hop_distance_matrix: empty graph");
  }
  Eigen::MatrixXi entries(n, n);
  std::vector<int> dist(static_cast<std::size_t>(n));
  std::vector<int> queue;
  queue.reserve(static_cast<std::size_t>(n));
  for (int s = 0; s < static_cast<int>(n); ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    dist[static_cast<std::size_t>(s)] = 0;
    queue.clear();
    queue.push_back(s);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const int u = queue[head];
      for (int v : g.adjacency[static_cast<std::size_t>(u)]) {
        if (dist[static_cast<std::size_t>(v)] < 0) {
          dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
          queue.push_back(v);
        }
      }
    }
    if (static_cast<Index>(queue.size()) < n) {
      const auto it = std::find(dist.begin(), dist.end(), -1);
      const auto unreachable = static_cast<int>(it - dist.begin());
      throw std::runtime_error("hop_distance_matrix: graph is disconnected, node " +
                               std::to_string(unreachable) + " is unreachable from node " +
                               std::to_string(s));
    }
    for (Index j = 0; j < n; ++j) entries(j, s) = dist[static_cast<std::size_t>(j)];
  }
  return HopDistanceMatrix{std::move(entries)};
}

double average_degree(const Graph& g) {
  const Index n = g.node_count();
  if (n == 0) return 0.0;
  return 2.0 * static_cast<double>(g.edge_count()) / static_cast<double>(n);
}

Eigen::VectorXd singular_value_profile(const Eigen::MatrixXd& m) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw std::invalid_argument("singular_value_profile: matrix must be square and non-empty");
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues();
}

Eigen::VectorXd singular_value_profile(const HopDistanceMatrix& h) {
  return singular_value_profile(h.entries.cast<double>());
}

}  // namespace osp
