#pragma once

#include <span>
#include <utility>
#include <vector>

#include "semid/graph.hpp"

namespace semid {

// Directed network with unit arc capacities and per-node capacities of one or
// unbounded. Node capacities are enforced by splitting every node into an
// in/out pair inside max_flow.
class FlowNetwork {
 public:
  static constexpr int kUnbounded = -1;

  FlowNetwork() = default;
  explicit FlowNetwork(int num_nodes, int node_capacity = 1);

  int add_node(int capacity = 1);
  // Throws on a duplicate arc or a dangling endpoint.
  void add_arc(int from, int to);
  bool has_arc(int from, int to) const;

  int num_nodes() const noexcept { return static_cast<int>(capacity_.size()); }
  int node_capacity(int node) const { return capacity_.at(node); }
  const std::vector<std::pair<int, int>>& arcs() const noexcept { return arcs_; }
  const std::vector<int>& out_arcs(int node) const { return out_.at(node); }  // arc indices

 private:
  std::vector<int> capacity_;
  std::vector<std::pair<int, int>> arcs_;
  std::vector<std::vector<int>> out_;
};

struct FlowWitness {
  int value = 0;
  std::vector<std::vector<int>> paths;  // node sequences, source first
};

struct FlowResult {
  FlowWitness witness;
  // Capacity-limited nodes on the source side of the residual frontier: a
  // minimum vertex cut whenever every node has unit capacity.
  std::vector<int> cut;
};

// Edmonds-Karp on the split network. Deterministic in the arc insertion order
// and in the order of the source list.
FlowResult max_flow_with_cut(const FlowNetwork& net, std::span<const int> sources,
                             std::span<const int> sinks);
FlowWitness max_flow(const FlowNetwork& net, std::span<const int> sources,
                     std::span<const int> sinks);

// Doubled network on {0..n-1} (unprimed, left trek side) and {n..2n-1}
// (primed, right trek side).
struct TrekFlowGraph {
  int n = 0;
  FlowNetwork network;

  int primed(int v) const { return n + v; }
  bool is_primed(int node) const { return node >= n; }
  int vertex_of(int node) const { return node >= n ? node - n : node; }
};

TrekFlowGraph build_flow_graph(const MixedGraph& g);

// Left-side arcs from `left`, right-side arcs from `right`; both must be
// subsets of the directed edges of g.
TrekFlowGraph build_restricted_flow_graph(const MixedGraph& g, const EdgeSet& left,
                                          const EdgeSet& right);

// Max flow from the unprimed sources to the primed copies of the targets.
FlowWitness trek_flow(const TrekFlowGraph& fg, const VertexSet& sources, const VertexSet& targets);

int generic_rank(const MixedGraph& g, const VertexSet& rows, const VertexSet& cols);

struct TSeparation {
  VertexSet left;   // L
  VertexSet right;  // R
};

TSeparation t_separating_cut(const MixedGraph& g, const VertexSet& rows, const VertexSet& cols);

}  // namespace semid
