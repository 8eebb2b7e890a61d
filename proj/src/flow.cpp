#include "semid/flow.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <stdexcept>
#include <string>

namespace semid {

FlowNetwork::FlowNetwork(int num_nodes, int node_capacity)
    : capacity_(num_nodes, node_capacity), out_(num_nodes) {}

int FlowNetwork::add_node(int capacity) {
  if (capacity != 1 && capacity != kUnbounded)
    throw std::invalid_argument("node capacity must be 1 or unbounded");
  capacity_.push_back(capacity);
  out_.emplace_back();
  return num_nodes() - 1;
}

void FlowNetwork::add_arc(int from, int to) {
  if (from < 0 || from >= num_nodes() || to < 0 || to >= num_nodes())
    throw std::out_of_range("arc references a missing node");
  if (has_arc(from, to))
    throw std::invalid_argument("duplicate arc " + std::to_string(from) + "->" + std::to_string(to));
  out_[from].push_back(static_cast<int>(arcs_.size()));
  arcs_.emplace_back(from, to);
}

bool FlowNetwork::has_arc(int from, int to) const {
  for (int a : out_.at(from))
    if (arcs_[a].second == to) return true;
  return false;
}

namespace {

constexpr int kInf = std::numeric_limits<int>::max() / 4;

struct Residual {
  struct Arc {
    int to;
    int cap;
    int rev;
    bool forward;
  };
  std::vector<std::vector<Arc>> adj;

  explicit Residual(int size) : adj(size) {}

  void add(int from, int to, int cap) {
    adj[from].push_back({to, cap, static_cast<int>(adj[to].size()), true});
    adj[to].push_back({from, 0, static_cast<int>(adj[from].size()) - 1, false});
  }
};

int in_node(int x) { return 2 * x; }
int out_node(int x) { return 2 * x + 1; }

}  // namespace

FlowResult max_flow_with_cut(const FlowNetwork& net, std::span<const int> sources,
                             std::span<const int> sinks) {
  const int nodes = net.num_nodes();
  const int source = 2 * nodes;
  const int sink = 2 * nodes + 1;
  Residual r(2 * nodes + 2);

  for (int x = 0; x < nodes; ++x) {
    int cap = net.node_capacity(x) == FlowNetwork::kUnbounded ? kInf : net.node_capacity(x);
    r.add(in_node(x), out_node(x), cap);
  }
  for (auto [u, v] : net.arcs()) r.add(out_node(u), in_node(v), 1);

  std::vector<char> is_source(nodes, 0), is_sink(nodes, 0);
  for (int s : sources) {
    if (s < 0 || s >= nodes) throw std::out_of_range("source node out of range");
    if (!is_source[s]) {
      is_source[s] = 1;
      r.add(source, in_node(s), kInf);
    }
  }
  for (int t : sinks) {
    if (t < 0 || t >= nodes) throw std::out_of_range("sink node out of range");
    if (!is_sink[t]) {
      is_sink[t] = 1;
      r.add(out_node(t), sink, kInf);
    }
  }

  const int size = 2 * nodes + 2;
  std::vector<std::pair<int, int>> pred(size);  // (node, arc index in adj[node])
  int value = 0;
  for (;;) {
    std::fill(pred.begin(), pred.end(), std::pair{-1, -1});
    pred[source] = {source, -1};
    std::deque<int> queue{source};
    while (!queue.empty() && pred[sink].first < 0) {
      int u = queue.front();
      queue.pop_front();
      for (int i = 0; i < static_cast<int>(r.adj[u].size()); ++i) {
        const auto& a = r.adj[u][i];
        if (a.cap > 0 && pred[a.to].first < 0) {
          pred[a.to] = {u, i};
          queue.push_back(a.to);
        }
      }
    }
    if (pred[sink].first < 0) break;
    int bottleneck = kInf;
    for (int v = sink; v != source; v = pred[v].first) {
      auto [u, i] = pred[v];
      bottleneck = std::min(bottleneck, r.adj[u][i].cap);
    }
    if (bottleneck >= kInf) throw std::invalid_argument("unbounded flow: an uncapacitated node is both source and sink");
    for (int v = sink; v != source; v = pred[v].first) {
      auto [u, i] = pred[v];
      auto& a = r.adj[u][i];
      a.cap -= bottleneck;
      r.adj[v][a.rev].cap += bottleneck;
    }
    value += bottleneck;
  }

  FlowResult result;
  result.witness.value = value;

  // Residual reachability for the source-side cut.
  std::vector<char> reach(size, 0);
  {
    std::deque<int> queue{source};
    reach[source] = 1;
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      for (const auto& a : r.adj[u]) {
        if (a.cap > 0 && !reach[a.to]) {
          reach[a.to] = 1;
          queue.push_back(a.to);
        }
      }
    }
  }
  for (int x = 0; x < nodes; ++x) {
    if (net.node_capacity(x) != FlowNetwork::kUnbounded && reach[in_node(x)] && !reach[out_node(x)])
      result.cut.push_back(x);
  }

  // Path decomposition by walking positive-flow arcs from the super source.
  // The flow on a forward arc is the residual capacity of its twin.
  std::vector<std::vector<int>> remaining(size);
  for (int u = 0; u < size; ++u) {
    remaining[u].assign(r.adj[u].size(), 0);
    for (int i = 0; i < static_cast<int>(r.adj[u].size()); ++i) {
      const auto& a = r.adj[u][i];
      if (a.forward) remaining[u][i] = r.adj[a.to][a.rev].cap;
    }
  }

  for (int k = 0; k < value; ++k) {
    std::vector<int> path;
    int u = source;
    while (u != sink) {
      int next = -1;
      for (int i = 0; i < static_cast<int>(r.adj[u].size()); ++i) {
        if (remaining[u][i] > 0) {
          --remaining[u][i];
          next = r.adj[u][i].to;
          break;
        }
      }
      if (next < 0) throw std::logic_error("flow decomposition failed");
      if (next != sink && next % 2 == 0) {
        int x = next / 2;
        auto it = std::find(path.begin(), path.end(), x);
        if (it != path.end()) path.erase(it + 1, path.end());  // loop erasure
        else path.push_back(x);
      }
      u = next;
    }
    result.witness.paths.push_back(std::move(path));
  }
  return result;
}

FlowWitness max_flow(const FlowNetwork& net, std::span<const int> sources, std::span<const int> sinks) {
  return max_flow_with_cut(net, sources, sinks).witness;
}

namespace {

TrekFlowGraph make_flow_graph(const MixedGraph& g, const EdgeSet* left, const EdgeSet* right) {
  const int n = g.num_vertices();
  TrekFlowGraph fg{n, FlowNetwork(2 * n, 1)};
  auto& net = fg.network;
  // left side: i -> j when j -> i is allowed on the left
  for (int i = 0; i < n; ++i)
    for (int j : g.parents(i))
      if (!left || left->contains({j, i})) net.add_arc(i, j);
  for (int i = 0; i < n; ++i) net.add_arc(i, n + i);
  for (int i = 0; i < n; ++i)
    for (int j : g.siblings(i)) net.add_arc(i, n + j);
  for (int i = 0; i < n; ++i)
    for (int j : g.children(i))
      if (!right || right->contains({i, j})) net.add_arc(n + i, n + j);
  return fg;
}

void check_subset(const MixedGraph& g, const EdgeSet& edges, const char* which) {
  for (auto e : edges) {
    if (e.from < 0 || e.from >= g.num_vertices() || e.to < 0 || e.to >= g.num_vertices() ||
        !g.has_directed(e.from, e.to))
      throw std::invalid_argument(std::string(which) + " edge set is not a subset of the directed edges");
  }
}

}  // namespace

TrekFlowGraph build_flow_graph(const MixedGraph& g) { return make_flow_graph(g, nullptr, nullptr); }

TrekFlowGraph build_restricted_flow_graph(const MixedGraph& g, const EdgeSet& left, const EdgeSet& right) {
  check_subset(g, left, "left");
  check_subset(g, right, "right");
  return make_flow_graph(g, &left, &right);
}

FlowWitness trek_flow(const TrekFlowGraph& fg, const VertexSet& sources, const VertexSet& targets) {
  std::vector<int> sinks;
  sinks.reserve(targets.size());
  for (int t : targets) {
    if (t < 0 || t >= fg.n) throw std::out_of_range("target vertex out of range");
    sinks.push_back(fg.primed(t));
  }
  for (int s : sources)
    if (s < 0 || s >= fg.n) throw std::out_of_range("source vertex out of range");
  return max_flow(fg.network, sources, sinks);
}

int generic_rank(const MixedGraph& g, const VertexSet& rows, const VertexSet& cols) {
  return trek_flow(build_flow_graph(g), rows, cols).value;
}

TSeparation t_separating_cut(const MixedGraph& g, const VertexSet& rows, const VertexSet& cols) {
  auto fg = build_flow_graph(g);
  std::vector<int> sinks;
  for (int t : cols) {
    if (t < 0 || t >= fg.n) throw std::out_of_range("target vertex out of range");
    sinks.push_back(fg.primed(t));
  }
  for (int s : rows)
    if (s < 0 || s >= fg.n) throw std::out_of_range("source vertex out of range");
  auto result = max_flow_with_cut(fg.network, rows, sinks);
  TSeparation sep;
  for (int node : result.cut) {
    if (fg.is_primed(node)) sep.right.push_back(fg.vertex_of(node));
    else sep.left.push_back(node);
  }
  std::sort(sep.left.begin(), sep.left.end());
  std::sort(sep.right.begin(), sep.right.end());
  if (static_cast<int>(sep.left.size() + sep.right.size()) != result.witness.value)
    throw std::logic_error("cut size differs from max-flow value");
  return sep;
}

}  // namespace semid
