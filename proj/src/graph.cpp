#include "semid/graph.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <sstream>

namespace semid {

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += "; ";
    out += p;
  }
  return out;
}

std::string pair_text(int u, int v, const char* arrow) {
  std::ostringstream os;
  os << u << arrow << v;
  return os.str();
}

void insert_sorted(VertexSet& s, int v) {
  auto it = std::lower_bound(s.begin(), s.end(), v);
  if (it == s.end() || *it != v) s.insert(it, v);
}

void erase_sorted(VertexSet& s, int v) {
  auto it = std::lower_bound(s.begin(), s.end(), v);
  if (it != s.end() && *it == v) s.erase(it);
}

}  // namespace

GraphError::GraphError(const std::string& what, std::vector<std::string> problems)
    : std::invalid_argument(problems.empty() ? what : what + ": " + join(problems)),
      problems_(std::move(problems)) {}

// Spec endpoints are 0-based here; the readers convert from 1-based text.
std::vector<std::string> validate(const GraphSpec& spec) {
  std::vector<std::string> problems;
  if (spec.n < 0) {
    problems.push_back("negative vertex count");
    return problems;
  }
  auto in_range = [&](int v) { return v >= 0 && v < spec.n; };
  for (auto [u, v] : spec.directed) {
    if (!in_range(u) || !in_range(v)) {
      problems.push_back("out-of-range endpoint in directed edge " +
                         pair_text(u + 1, v + 1, "->"));
    } else if (u == v) {
      problems.push_back("self-loop " + pair_text(u + 1, v + 1, "->"));
    }
  }
  for (auto [u, v] : spec.bidirected) {
    if (!in_range(u) || !in_range(v)) {
      problems.push_back("out-of-range endpoint in bidirected edge " +
                         pair_text(u + 1, v + 1, "<->"));
    } else if (u == v) {
      problems.push_back("self-loop " + pair_text(u + 1, v + 1, "<->"));
    }
  }
  return problems;
}

std::vector<std::string> validate(const Eigen::MatrixXi& directed,
                                  const Eigen::MatrixXi& bidirected) {
  std::vector<std::string> problems;
  if (directed.rows() != directed.cols() || bidirected.rows() != bidirected.cols() ||
      directed.rows() != bidirected.rows()) {
    problems.push_back("adjacency matrices must be square and of equal size");
    return problems;
  }
  const auto n = directed.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (directed(i, i) != 0) problems.push_back("self-loop " + pair_text(i + 1, i + 1, "->"));
    if (bidirected(i, i) != 0) problems.push_back("self-loop " + pair_text(i + 1, i + 1, "<->"));
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if ((bidirected(i, j) != 0) != (bidirected(j, i) != 0)) {
        problems.push_back("asymmetric bidirected entry " + pair_text(i + 1, j + 1, "<->"));
      }
    }
  }
  return problems;
}

MixedGraph::MixedGraph(int n)
    : n_(n),
      directed_(static_cast<std::size_t>(n) * n, 0),
      bidirected_(static_cast<std::size_t>(n) * n, 0),
      parents_(n),
      children_(n),
      siblings_(n) {
  if (n < 0) throw std::invalid_argument("negative vertex count");
}

MixedGraph MixedGraph::from_spec(const GraphSpec& spec) {
  auto problems = validate(spec);
  if (!problems.empty()) throw GraphError("invalid mixed graph", std::move(problems));
  MixedGraph g(spec.n);
  for (auto [u, v] : spec.directed) g.add_directed(u, v);
  for (auto [u, v] : spec.bidirected) g.add_bidirected(u, v);
  return g;
}

MixedGraph MixedGraph::from_adjacency(const Eigen::MatrixXi& directed,
                                      const Eigen::MatrixXi& bidirected) {
  auto problems = validate(directed, bidirected);
  if (!problems.empty()) throw GraphError("invalid mixed graph", std::move(problems));
  MixedGraph g(static_cast<int>(directed.rows()));
  for (int i = 0; i < g.n_; ++i) {
    for (int j = 0; j < g.n_; ++j) {
      if (directed(i, j) != 0) g.add_directed(i, j);
      if (j > i && bidirected(i, j) != 0) g.add_bidirected(i, j);
    }
  }
  return g;
}

MixedGraph MixedGraph::from_one_based(int n, const std::vector<std::pair<int, int>>& directed,
                                      const std::vector<std::pair<int, int>>& bidirected) {
  GraphSpec spec{n, {}, {}};
  for (auto [u, v] : directed) spec.directed.emplace_back(u - 1, v - 1);
  for (auto [u, v] : bidirected) spec.bidirected.emplace_back(u - 1, v - 1);
  return from_spec(spec);
}

void MixedGraph::check_vertex(int v) const {
  if (v < 0 || v >= n_) throw std::out_of_range("vertex " + std::to_string(v + 1) + " out of range");
}

bool MixedGraph::has_directed(int from, int to) const {
  check_vertex(from);
  check_vertex(to);
  return directed_[static_cast<std::size_t>(from) * n_ + to] != 0;
}

bool MixedGraph::has_bidirected(int u, int v) const {
  check_vertex(u);
  check_vertex(v);
  return bidirected_[static_cast<std::size_t>(u) * n_ + v] != 0;
}

void MixedGraph::add_directed(int from, int to) {
  check_vertex(from);
  check_vertex(to);
  if (from == to) throw GraphError("invalid mixed graph", {"self-loop " + pair_text(from + 1, to + 1, "->")});
  auto& cell = directed_[static_cast<std::size_t>(from) * n_ + to];
  if (cell) return;
  cell = 1;
  ++num_directed_;
  insert_sorted(parents_[to], from);
  insert_sorted(children_[from], to);
}

void MixedGraph::add_bidirected(int u, int v) {
  check_vertex(u);
  check_vertex(v);
  if (u == v) throw GraphError("invalid mixed graph", {"self-loop " + pair_text(u + 1, v + 1, "<->")});
  auto& cell = bidirected_[static_cast<std::size_t>(u) * n_ + v];
  if (cell) return;
  cell = 1;
  bidirected_[static_cast<std::size_t>(v) * n_ + u] = 1;
  ++num_bidirected_;
  insert_sorted(siblings_[u], v);
  insert_sorted(siblings_[v], u);
}

void MixedGraph::remove_directed(int from, int to) {
  if (!has_directed(from, to)) return;
  directed_[static_cast<std::size_t>(from) * n_ + to] = 0;
  --num_directed_;
  erase_sorted(parents_[to], from);
  erase_sorted(children_[from], to);
}

std::vector<Edge> MixedGraph::directed_edges() const {
  std::vector<Edge> out;
  out.reserve(num_directed_);
  for (int u = 0; u < n_; ++u)
    for (int v : children_[u]) out.push_back({u, v});
  return out;
}

std::vector<Edge> MixedGraph::bidirected_edges() const {
  std::vector<Edge> out;
  out.reserve(num_bidirected_);
  for (int u = 0; u < n_; ++u)
    for (int v : siblings_[u])
      if (u < v) out.push_back({u, v});
  return out;
}

bool MixedGraph::is_acyclic() const {
  std::vector<int> indegree(n_);
  for (int v = 0; v < n_; ++v) indegree[v] = static_cast<int>(parents_[v].size());
  std::deque<int> queue;
  for (int v = 0; v < n_; ++v)
    if (indegree[v] == 0) queue.push_back(v);
  int seen = 0;
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    ++seen;
    for (int w : children_[u])
      if (--indegree[w] == 0) queue.push_back(w);
  }
  return seen == n_;
}

MixedGraph MixedGraph::transposed() const {
  MixedGraph t(n_);
  for (auto e : directed_edges()) t.add_directed(e.to, e.from);
  for (auto e : bidirected_edges()) t.add_bidirected(e.from, e.to);
  return t;
}

GraphSpec MixedGraph::to_spec() const {
  GraphSpec spec{n_, {}, {}};
  for (auto e : directed_edges()) spec.directed.emplace_back(e.from, e.to);
  for (auto e : bidirected_edges()) spec.bidirected.emplace_back(e.from, e.to);
  return spec;
}

bool MixedGraph::operator==(const MixedGraph& other) const {
  return n_ == other.n_ && directed_ == other.directed_ && bidirected_ == other.bidirected_;
}

VertexSet descendants(const MixedGraph& g, int v) {
  const int n = g.num_vertices();
  std::vector<char> seen(n, 0);
  std::deque<int> queue;
  for (int c : g.children(v)) {
    if (!seen[c]) {
      seen[c] = 1;
      queue.push_back(c);
    }
  }
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    for (int c : g.children(u)) {
      if (!seen[c]) {
        seen[c] = 1;
        queue.push_back(c);
      }
    }
  }
  VertexSet out;
  for (int u = 0; u < n; ++u)
    if (seen[u]) out.push_back(u);
  return out;
}

namespace {

// Breadth-first search over the doubled trek-flow topology: unprimed node i
// (left side of a trek) and primed node i' (right side). Arcs are
//   i -> j   for j -> i in G     (walk up the left side)
//   i -> i'                      (switch sides at a directed top)
//   i -> j'  for i <-> j in G    (switch sides across a bidirected edge)
//   i'-> j'  for i -> j in G     (walk down the right side)
// Primed nodes reached from v are exactly the trek endpoints. The state also
// tracks whether a graph edge has been used, which separates the empty trek.
VertexSet reach_on_flow_topology(const MixedGraph& g, int v, bool allow_left, bool include_trivial) {
  const int n = g.num_vertices();
  if (v < 0 || v >= n) throw std::out_of_range("vertex " + std::to_string(v + 1) + " out of range");
  // state index: (node * 2 + used_edge), node in [0, 2n)
  std::vector<char> seen(static_cast<std::size_t>(4 * n), 0);
  std::deque<std::pair<int, int>> queue;
  auto push = [&](int node, int used) {
    auto idx = static_cast<std::size_t>(node * 2 + used);
    if (!seen[idx]) {
      seen[idx] = 1;
      queue.emplace_back(node, used);
    }
  };
  push(v, 0);
  while (!queue.empty()) {
    auto [node, used] = queue.front();
    queue.pop_front();
    if (node < n) {
      const int i = node;
      if (allow_left)
        for (int j : g.parents(i)) push(j, 1);
      push(n + i, used);
      for (int j : g.siblings(i)) push(n + j, 1);
    } else {
      const int i = node - n;
      for (int j : g.children(i)) push(n + j, 1);
    }
  }
  VertexSet out;
  for (int w = 0; w < n; ++w) {
    bool nonempty = seen[static_cast<std::size_t>((n + w) * 2 + 1)] != 0;
    bool trivial = include_trivial && w == v;
    if (nonempty || trivial) out.push_back(w);
  }
  return out;
}

}  // namespace

VertexSet trek_reachable(const MixedGraph& g, int v, bool include_trivial) {
  return reach_on_flow_topology(g, v, true, include_trivial);
}

VertexSet half_trek_reachable(const MixedGraph& g, int v, bool include_trivial) {
  return reach_on_flow_topology(g, v, false, include_trivial);
}

Neighborhood neighborhoods(const MixedGraph& g, int v) {
  if (v < 0 || v >= g.num_vertices())
    throw std::out_of_range("vertex " + std::to_string(v + 1) + " out of range");
  Neighborhood nb;
  nb.pa = g.parents(v);
  nb.sib = g.siblings(v);
  nb.des = descendants(g, v);
  nb.tr = trek_reachable(g, v, false);
  nb.htr = half_trek_reachable(g, v, false);
  return nb;
}

MixedGraph decode_id(const GraphId& id) {
  const int n = id.n;
  if (n < 0 || n > kMaxCodecVertices)
    throw std::out_of_range("graph id vertex count must be in [0, " + std::to_string(kMaxCodecVertices) + "]");
  const int dbits = n * (n - 1);
  const int bbits = dbits / 2;
  if (dbits < 64 && (id.d >> dbits) != 0) throw std::out_of_range("directed code out of range");
  if (bbits < 64 && (id.b >> bbits) != 0) throw std::out_of_range("bidirected code out of range");
  MixedGraph g(n);
  std::uint64_t d = id.d;
  for (int v = 0; v < n; ++v) {
    for (int w = 0; w < n; ++w) {
      if (w == v) continue;
      if (d % 2 == 1) g.add_directed(v, w);
      d /= 2;
    }
  }
  std::uint64_t b = id.b;
  for (int v = 0; v + 1 < n; ++v) {
    for (int w = v + 1; w < n; ++w) {
      if (b % 2 == 1) g.add_bidirected(v, w);
      b /= 2;
    }
  }
  return g;
}

GraphId encode_id(const MixedGraph& g) {
  const int n = g.num_vertices();
  if (n > kMaxCodecVertices)
    throw std::out_of_range("graph id supports at most " + std::to_string(kMaxCodecVertices) + " vertices");
  GraphId id{n, 0, 0};
  int bit = 0;
  for (int v = 0; v < n; ++v) {
    for (int w = 0; w < n; ++w) {
      if (w == v) continue;
      if (g.has_directed(v, w)) id.d |= std::uint64_t{1} << bit;
      ++bit;
    }
  }
  bit = 0;
  for (int v = 0; v + 1 < n; ++v) {
    for (int w = v + 1; w < n; ++w) {
      if (g.has_bidirected(v, w)) id.b |= std::uint64_t{1} << bit;
      ++bit;
    }
  }
  return id;
}

GraphId parse_graph_id(const std::string& text) {
  GraphId id;
  auto first = text.find(':');
  auto second = first == std::string::npos ? std::string::npos : text.find(':', first + 1);
  if (second == std::string::npos || text.find(':', second + 1) != std::string::npos)
    throw std::invalid_argument("graph id must have the form n:d:b, got '" + text + "'");
  auto parse_part = [&](std::size_t begin, std::size_t end, auto& out) {
    const char* b = text.data() + begin;
    const char* e = text.data() + end;
    auto [ptr, ec] = std::from_chars(b, e, out);
    if (ec != std::errc{} || ptr != e || b == e)
      throw std::invalid_argument("malformed number at column " + std::to_string(begin + 1) +
                                  " of graph id '" + text + "'");
  };
  parse_part(0, first, id.n);
  parse_part(first + 1, second, id.d);
  parse_part(second + 1, text.size(), id.b);
  decode_id(id);  // range check
  return id;
}

std::string format_graph_id(const GraphId& id) {
  return std::to_string(id.n) + ":" + std::to_string(id.d) + ":" + std::to_string(id.b);
}

Subdivision bidirected_subdivision(const MixedGraph& g) {
  const int n = g.num_vertices();
  auto pairs = g.bidirected_edges();
  Subdivision out{MixedGraph(n + static_cast<int>(pairs.size())), pairs};
  for (auto e : g.directed_edges()) out.graph.add_directed(e.from, e.to);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const int fresh = n + static_cast<int>(k);
    out.graph.add_directed(fresh, pairs[k].from);
    out.graph.add_directed(fresh, pairs[k].to);
  }
  return out;
}

VertexSet set_union(const VertexSet& a, const VertexSet& b) {
  VertexSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

VertexSet set_intersection(const VertexSet& a, const VertexSet& b) {
  VertexSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

VertexSet set_difference(const VertexSet& a, const VertexSet& b) {
  VertexSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool contains(const VertexSet& s, int v) { return std::binary_search(s.begin(), s.end(), v); }

bool is_subset(const VertexSet& a, const VertexSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace semid
