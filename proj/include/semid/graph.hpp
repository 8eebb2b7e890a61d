#pragma once

#include <compare>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace semid {

// Vertices are 0-based in the C++ API. Every textual or JSON surface
// (codec strings, graph files, certificates) is 1-based.

using VertexSet = std::vector<int>;  // sorted, no duplicates

struct Edge {
  int from = 0;
  int to = 0;

  auto operator<=>(const Edge&) const = default;
};

using EdgeSet = std::set<Edge>;

class GraphError : public std::invalid_argument {
 public:
  GraphError(const std::string& what, std::vector<std::string> problems);
  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  std::vector<std::string> problems_;
};

// Unvalidated edge lists as they come from a file or a test fixture.
struct GraphSpec {
  int n = 0;
  std::vector<std::pair<int, int>> directed;
  std::vector<std::pair<int, int>> bidirected;
};

// Empty result means the spec is a valid mixed graph.
std::vector<std::string> validate(const GraphSpec& spec);

// Adjacency-matrix form; the bidirected matrix must be symmetric.
std::vector<std::string> validate(const Eigen::MatrixXi& directed,
                                  const Eigen::MatrixXi& bidirected);

class MixedGraph {
 public:
  MixedGraph() = default;
  explicit MixedGraph(int n);

  // Throws GraphError listing every violation.
  static MixedGraph from_spec(const GraphSpec& spec);
  static MixedGraph from_adjacency(const Eigen::MatrixXi& directed,
                                   const Eigen::MatrixXi& bidirected);
  // Convenience for fixtures written with the 1-based labels used in figures.
  static MixedGraph from_one_based(int n, const std::vector<std::pair<int, int>>& directed,
                                   const std::vector<std::pair<int, int>>& bidirected);

  int num_vertices() const noexcept { return n_; }

  bool has_directed(int from, int to) const;
  bool has_bidirected(int u, int v) const;

  void add_directed(int from, int to);
  void add_bidirected(int u, int v);
  void remove_directed(int from, int to);

  const VertexSet& parents(int v) const { return parents_.at(v); }
  const VertexSet& children(int v) const { return children_.at(v); }
  const VertexSet& siblings(int v) const { return siblings_.at(v); }

  // Sorted by (from, to).
  std::vector<Edge> directed_edges() const;
  // Canonical u < v, sorted.
  std::vector<Edge> bidirected_edges() const;
  std::size_t num_directed() const noexcept { return num_directed_; }
  std::size_t num_bidirected() const noexcept { return num_bidirected_; }

  bool is_acyclic() const;
  MixedGraph transposed() const;  // every directed edge reversed

  GraphSpec to_spec() const;
  bool operator==(const MixedGraph& other) const;

 private:
  void check_vertex(int v) const;

  int n_ = 0;
  std::vector<std::uint8_t> directed_;    // row-major n x n
  std::vector<std::uint8_t> bidirected_;  // symmetric n x n
  std::vector<VertexSet> parents_;
  std::vector<VertexSet> children_;
  std::vector<VertexSet> siblings_;
  std::size_t num_directed_ = 0;
  std::size_t num_bidirected_ = 0;
};

struct Neighborhood {
  VertexSet pa;
  VertexSet sib;
  VertexSet des;  // heads of non-empty directed paths
  VertexSet tr;   // endpoints of non-empty treks
  VertexSet htr;  // endpoints of non-empty half-treks
};

Neighborhood neighborhoods(const MixedGraph& g, int v);

VertexSet descendants(const MixedGraph& g, int v);

// Trek / half-trek reachability. With include_trivial the empty trek counts,
// so v itself is always a member. The identification and non-identification
// rules need the inclusive sets.
VertexSet trek_reachable(const MixedGraph& g, int v, bool include_trivial);
VertexSet half_trek_reachable(const MixedGraph& g, int v, bool include_trivial);

struct GraphId {
  int n = 0;
  std::uint64_t d = 0;
  std::uint64_t b = 0;

  auto operator<=>(const GraphId&) const = default;
};

// Codec supports n <= 8 so that d fits in 64 bits.
inline constexpr int kMaxCodecVertices = 8;

MixedGraph decode_id(const GraphId& id);
GraphId encode_id(const MixedGraph& g);
GraphId parse_graph_id(const std::string& text);  // "n:d:b"
std::string format_graph_id(const GraphId& id);

struct Subdivision {
  MixedGraph graph;
  // Entry k describes the vertex n + k: the bidirected pair it replaced.
  std::vector<Edge> replaced;
};

Subdivision bidirected_subdivision(const MixedGraph& g);

// Helpers for set algebra on sorted vertex lists.
VertexSet set_union(const VertexSet& a, const VertexSet& b);
VertexSet set_intersection(const VertexSet& a, const VertexSet& b);
VertexSet set_difference(const VertexSet& a, const VertexSet& b);
bool contains(const VertexSet& s, int v);
bool is_subset(const VertexSet& a, const VertexSet& b);

}  // namespace semid
