#include "semid/identify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace semid {

const char* to_string(Method m) {
  switch (m) {
    case Method::htc: return "htc";
    case Method::eid: return "eid";
    case Method::tsid: return "tsid";
    case Method::joint: return "joint";
  }
  return "?";
}

const char* to_string(EdgeStatus s) {
  switch (s) {
    case EdgeStatus::identifiable: return "identifiable";
    case EdgeStatus::infinite_to_one: return "infinite_to_one";
    case EdgeStatus::unknown: return "unknown";
  }
  return "?";
}

namespace {

// Calls f(subset) for every k-subset of pool in lexicographic order; stops
// early when f returns true. Returns whether f ever returned true.
template <typename F>
bool for_each_subset(const VertexSet& pool, std::size_t k, F&& f) {
  if (k > pool.size()) return false;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  VertexSet subset(k);
  for (;;) {
    for (std::size_t i = 0; i < k; ++i) subset[i] = pool[idx[i]];
    if (f(subset)) return true;
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == pool.size() - k + i - 1) --i;
    if (i == 0) return false;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

VertexSet all_vertices(int n) {
  VertexSet v(n);
  for (int i = 0; i < n; ++i) v[i] = i;
  return v;
}

VertexSet solved_parents(const MixedGraph& g, const SolverState& state, int v) {
  VertexSet out;
  for (int p : g.parents(v))
    if (state.is_solved({p, v})) out.push_back(p);
  return out;
}

VertexSet unsolved_parents(const MixedGraph& g, const SolverState& state, int v) {
  VertexSet out;
  for (int p : g.parents(v))
    if (!state.is_solved({p, v})) out.push_back(p);
  return out;
}

bool all_incoming_solved(const MixedGraph& g, const SolverState& state, int y) {
  for (int p : g.parents(y))
    if (!state.is_solved({p, y})) return false;
  return true;
}

int effective_set_size(const MixedGraph& g, int max_set_size) {
  return max_set_size <= 0 ? g.num_vertices() : std::min(max_set_size, g.num_vertices());
}

// Instruments aligned with the targets, read off the half-trek system.
std::vector<int> instruments_for(const HalfTrekSystemSearch& search, const std::vector<int>& targets) {
  std::vector<int> out;
  out.reserve(targets.size());
  for (int t : targets) {
    auto it = std::find_if(search.system.begin(), search.system.end(),
                           [t](const HalfTrek& h) { return h.right.back() == t; });
    if (it == search.system.end()) throw std::logic_error("half-trek system misses a target");
    out.push_back(it->source);
  }
  return out;
}

}  // namespace

// --- Half-trek systems -------------------------------------------------------

HalfTrekSystemSearch half_trek_system_exists(const MixedGraph& g, const VertexSet& sources,
                                             const VertexSet& targets, const VertexSet& avoid) {
  if (!set_intersection(sources, avoid).empty())
    throw std::invalid_argument("half-trek sources intersect the avoided vertices");
  HalfTrekSystemSearch result;
  if (targets.empty()) {
    result.exists = true;
    return result;
  }
  if (sources.size() < targets.size()) return result;
  EdgeSet right;
  for (auto e : g.directed_edges()) right.insert(e);
  const auto fg = build_restricted_flow_graph(g, {}, right);
  const auto flow = trek_flow(fg, sources, targets);
  if (flow.value != static_cast<int>(targets.size())) return result;
  result.exists = true;
  for (const auto& path : flow.paths) {
    if (path.size() < 2 || fg.is_primed(path.front())) throw std::logic_error("malformed half-trek flow path");
    HalfTrek h;
    h.source = path.front();
    h.bidirected_start = fg.vertex_of(path[1]) != h.source;
    for (std::size_t i = 1; i < path.size(); ++i) h.right.push_back(fg.vertex_of(path[i]));
    result.system.push_back(std::move(h));
  }
  return result;
}

// --- Solver state ------------------------------------------------------------

std::optional<std::size_t> SolverState::step_of(Edge e) const {
  auto it = step_of_.find(e);
  if (it == step_of_.end()) return std::nullopt;
  return it->second;
}

void SolverState::apply(IdentificationStep step) {
  for (auto e : step.prerequisites)
    if (!is_solved(e)) throw std::logic_error("step consumes an unsolved edge");
  if (step.solved.empty()) throw std::logic_error("step solves no edge");
  for (auto e : step.solved)
    if (is_solved(e)) throw std::logic_error("step re-solves an edge");
  const std::size_t index = steps_.size();
  for (auto e : step.solved) {
    solved_.insert(e);
    step_of_[e] = index;
  }
  steps_.push_back(std::move(step));
}

// --- HTC ---------------------------------------------------------------------

SolverState htc_identify(const MixedGraph& g, SolverState state) {
  const int n = g.num_vertices();
  std::vector<VertexSet> htr(n);
  for (int v = 0; v < n; ++v) htr[v] = half_trek_reachable(g, v, false);

  for (bool changed = true; changed;) {
    changed = false;
    for (int v = 0; v < n; ++v) {
      auto unsolved = unsolved_parents(g, state, v);
      if (unsolved.empty()) continue;
      const VertexSet& pa = g.parents(v);
      const VertexSet avoid = set_union({v}, g.siblings(v));
      VertexSet allowed;
      for (int y = 0; y < n; ++y) {
        if (contains(avoid, y)) continue;
        if (!contains(htr[v], y) || all_incoming_solved(g, state, y)) allowed.push_back(y);
      }
      auto search = half_trek_system_exists(g, allowed, pa, avoid);
      if (!search.exists) continue;

      HalfTrekSystem sys;
      sys.head = v;
      sys.targets = pa;
      sys.instruments = instruments_for(search, pa);
      IdentificationStep step;
      step.method = Method::htc;
      for (int y : sys.instruments) {
        VertexSet h = contains(htr[v], y) ? g.parents(y) : VertexSet{};
        for (int p : h) step.prerequisites.push_back({p, y});
        sys.instrument_parents.push_back(std::move(h));
      }
      for (int w : unsolved) step.solved.push_back({w, v});
      step.witness = std::move(sys);
      state.apply(std::move(step));
      changed = true;
    }
  }
  return state;
}

// --- EID ---------------------------------------------------------------------

SolverState eid_identify(const MixedGraph& g, SolverState state) {
  const int n = g.num_vertices();
  std::vector<VertexSet> htr(n), tr(n);
  for (int v = 0; v < n; ++v) {
    htr[v] = half_trek_reachable(g, v, true);
    tr[v] = trek_reachable(g, v, true);
  }

  for (bool changed = true; changed;) {
    changed = false;
    for (int v = 0; v < n; ++v) {
      for (bool progress = true; progress;) {
        progress = false;
        const auto unsolved = unsolved_parents(g, state, v);
        if (unsolved.empty()) break;
        const VertexSet avoid = set_union({v}, g.siblings(v));

        VertexSet maybe_allowed;
        for (int y = 0; y < n; ++y) {
          if (contains(avoid, y)) continue;
          bool ok = true;
          for (int z : set_intersection(htr[v], g.parents(y)))
            if (!state.is_solved({z, y})) ok = false;
          if (ok) maybe_allowed.push_back(y);
        }

        for (std::size_t k = unsolved.size(); k >= 1 && !progress; --k) {
          for_each_subset(unsolved, k, [&](const VertexSet& e) {
            VertexSet allowed;
            for (int y : maybe_allowed)
              if (is_subset(set_intersection(tr[y], unsolved), e)) allowed.push_back(y);
            auto search = half_trek_system_exists(g, allowed, e, avoid);
            if (!search.exists) return false;

            HalfTrekSystem sys;
            sys.head = v;
            sys.targets = e;
            sys.solved_parents = solved_parents(g, state, v);
            sys.instruments = instruments_for(search, e);
            IdentificationStep step;
            step.method = Method::eid;
            for (int s : sys.solved_parents) step.prerequisites.push_back({s, v});
            for (int y : sys.instruments) {
              VertexSet h = set_intersection(g.parents(y), htr[v]);
              for (int p : h) step.prerequisites.push_back({p, y});
              sys.instrument_parents.push_back(std::move(h));
            }
            for (int w : e) step.solved.push_back({w, v});
            step.witness = std::move(sys);
            state.apply(std::move(step));
            progress = true;
            return true;
          });
        }
        if (progress) changed = true;
      }
    }
  }
  return state;
}

// --- TSID --------------------------------------------------------------------

namespace {

void check_tsid_arguments(const MixedGraph& g, Edge edge, const VertexSet& known, const VertexSet& rows,
                          const VertexSet& cols) {
  if (!g.has_directed(edge.from, edge.to)) throw std::invalid_argument("edge is not in the graph");
  for (int w : known)
    if (w == edge.from || !g.has_directed(w, edge.to))
      throw std::invalid_argument("known parent is not another parent of the head");
  if (rows.size() != cols.size() + 1) throw std::invalid_argument("need |S| == |T| + 1");
  if (contains(cols, edge.to) || contains(cols, edge.from))
    throw std::invalid_argument("T may not contain the edge endpoints");
}

EdgeSet right_without_head_edges(const MixedGraph& g, Edge edge, const VertexSet& known) {
  EdgeSet right;
  for (auto e : g.directed_edges()) right.insert(e);
  right.erase(edge);
  for (int w : known) right.erase({w, edge.to});
  return right;
}

bool tsid_flow_conditions(const TrekFlowGraph& full, const TrekFlowGraph& restricted, Edge edge,
                          const VertexSet& rows, const VertexSet& cols) {
  const int k = static_cast<int>(rows.size());
  if (trek_flow(full, rows, set_union(cols, {edge.from})).value != k) return false;
  return trek_flow(restricted, rows, set_union(cols, {edge.to})).value < k;
}

}  // namespace

bool tsid_accepts(const MixedGraph& g, Edge edge, const VertexSet& known_parents, const VertexSet& rows,
                  const VertexSet& cols) {
  check_tsid_arguments(g, edge, known_parents, rows, cols);
  const auto des = descendants(g, edge.to);
  if (!set_intersection(des, set_union(cols, {edge.to})).empty()) return false;
  EdgeSet left;
  for (auto e : g.directed_edges()) left.insert(e);
  const auto restricted = build_restricted_flow_graph(g, left, right_without_head_edges(g, edge, known_parents));
  return tsid_flow_conditions(build_flow_graph(g), restricted, edge, rows, cols);
}

bool tsid_accepts_simple(const MixedGraph& g, Edge edge, const VertexSet& known_parents, const VertexSet& rows,
                         const VertexSet& cols) {
  check_tsid_arguments(g, edge, known_parents, rows, cols);
  const auto des = descendants(g, edge.to);
  if (!set_intersection(des, set_union(set_union(rows, cols), {edge.to})).empty()) return false;
  MixedGraph removed = g;
  removed.remove_directed(edge.from, edge.to);
  for (int w : known_parents) removed.remove_directed(w, edge.to);
  return tsid_flow_conditions(build_flow_graph(g), build_flow_graph(removed), edge, rows, cols);
}

SolverState tsid_identify(const MixedGraph& g, SolverState state, int max_set_size) {
  const int n = g.num_vertices();
  const int m = effective_set_size(g, max_set_size);
  const auto full = build_flow_graph(g);
  const auto vertices = all_vertices(n);
  EdgeSet left;
  for (auto e : g.directed_edges()) left.insert(e);

  for (bool changed = true; changed;) {
    changed = false;
    std::vector<Edge> order = g.directed_edges();
    std::sort(order.begin(), order.end(),
              [](Edge a, Edge b) { return std::pair{a.to, a.from} < std::pair{b.to, b.from}; });
    for (auto edge : order) {
      if (state.is_solved(edge)) continue;
      const int v = edge.to;
      const int w0 = edge.from;
      const auto des = descendants(g, v);
      if (contains(des, v)) continue;
      VertexSet known = solved_parents(g, state, v);
      const auto restricted = build_restricted_flow_graph(g, left, right_without_head_edges(g, edge, known));
      const VertexSet col_pool = set_difference(vertices, set_union(des, set_union({v}, {w0})));

      std::optional<RatioFormula> found;
      for (int k = 1; k <= m && !found; ++k) {
        for_each_subset(vertices, static_cast<std::size_t>(k), [&](const VertexSet& rows) {
          return for_each_subset(col_pool, static_cast<std::size_t>(k - 1), [&](const VertexSet& cols) {
            if (!tsid_flow_conditions(full, restricted, edge, rows, cols)) return false;
            found = RatioFormula{rows, cols, v, w0, known};
            return true;
          });
        });
      }
      if (!found) continue;
      IdentificationStep step;
      step.method = Method::tsid;
      for (int w : known) step.prerequisites.push_back({w, v});
      step.solved = {edge};
      step.witness = std::move(*found);
      state.apply(std::move(step));
      changed = true;
    }
  }
  return state;
}

SolverState eid_tsid_identify(const MixedGraph& g, int max_set_size) {
  SolverState state;
  for (;;) {
    const auto before = state.solved().size();
    state = eid_identify(g, std::move(state));
    state = tsid_identify(g, std::move(state), max_set_size);
    if (state.solved().size() == before) break;
  }
  return state;
}

// --- Non-identifiability -----------------------------------------------------

InfiniteToOneRecord edge_infinite_to_one(const MixedGraph& g, Edge edge) {
  if (edge.from < 0 || edge.from >= g.num_vertices() || edge.to < 0 || edge.to >= g.num_vertices() ||
      !g.has_directed(edge.from, edge.to))
    throw std::invalid_argument("edge is not a directed edge of the graph");
  InfiniteToOneRecord record;
  record.edge = edge;
  record.holds = true;
  const int w = edge.to;
  for (int z = 0; z < g.num_vertices(); ++z) {
    if (z == w) continue;
    InfiniteToOneRecord::Entry entry{z, InfiniteToOneRecord::Reason::violated};
    if (g.has_bidirected(z, w)) entry.reason = InfiniteToOneRecord::Reason::sibling_of_head;
    else if (!contains(half_trek_reachable(g, z, true), edge.from))
      entry.reason = InfiniteToOneRecord::Reason::not_half_trek_reachable;
    else record.holds = false;
    record.entries.push_back(entry);
  }
  return record;
}

// --- Replay ------------------------------------------------------------------

KnownCoefficients replay(const SolverState& state, const Eigen::MatrixXd& sigma, double tolerance) {
  KnownCoefficients known;
  for (const auto& step : state.steps()) {
    std::map<int, double> values;
    if (const auto* sys = std::get_if<HalfTrekSystem>(&step.witness)) {
      values = solve_htc_system(sigma, *sys, known, tolerance);
    } else if (const auto* ratio = std::get_if<RatioFormula>(&step.witness)) {
      values[ratio->target] = recover_edge_ratio(sigma, *ratio, known, tolerance);
    } else {
      const auto& joint = std::get<JointSystem>(step.witness);
      values = solve_determinantal_system(sigma, joint.rows, joint.head, joint.targets, tolerance);
    }
    for (auto e : step.solved) {
      auto it = values.find(e.from);
      if (it == values.end()) throw std::logic_error("step witness does not cover a solved edge");
      known[e] = it->second;
    }
  }
  return known;
}

ReplaySample replay_at_seed(const MixedGraph& g, const SolverState& state, std::uint64_t seed, int attempts) {
  for (int attempt = 0; attempt <= attempts; ++attempt) {
    const std::uint64_t s = attempt == 0 ? seed : resample_seed(seed, attempt);
    try {
      ReplaySample sample;
      sample.seed = s;
      sample.truth = sample_parameters(g, s);
      sample.recovered = replay(state, covariance(sample.truth));
      return sample;
    } catch (const NonGenericPoint&) {
    }
  }
  throw NonGenericPoint("every resampled point was degenerate for seed " + std::to_string(seed));
}

RecoveryErrors recovery_errors(const MixedGraph& g, const SolverState& state, std::uint64_t base_seed, int seeds) {
  RecoveryErrors errors;
  errors.seeds = seeds;
  for (auto e : state.solved()) errors.max_rel_err[e] = 0.0;
  for (int i = 0; i < seeds; ++i) {
    const auto sample = replay_at_seed(g, state, base_seed + static_cast<std::uint64_t>(i));
    for (const auto& [e, value] : sample.recovered) {
      const double truth = sample.truth.lambda(e.from, e.to);
      const double err = std::abs(value - truth) / std::max(std::abs(truth), 1e-12);
      errors.max_rel_err[e] = std::max(errors.max_rel_err[e], err);
    }
  }
  return errors;
}

// --- Certification -----------------------------------------------------------

bool CertificationReport::all_identifiable() const {
  return std::all_of(certificates.begin(), certificates.end(),
                     [](const EdgeCertificate& c) { return c.status == EdgeStatus::identifiable; });
}

bool CertificationReport::any_infinite_to_one() const {
  return std::any_of(certificates.begin(), certificates.end(),
                     [](const EdgeCertificate& c) { return c.status == EdgeStatus::infinite_to_one; });
}

bool CertificationReport::any_unknown() const {
  return std::any_of(certificates.begin(), certificates.end(),
                     [](const EdgeCertificate& c) { return c.status == EdgeStatus::unknown; });
}

CertificationReport certify(const MixedGraph& g, const CertifyOptions& options) {
  CertificationReport report;
  report.state = eid_tsid_identify(g, options.max_set_size);

  for (int attempt = 0;; ++attempt) {
    const std::uint64_t s = attempt == 0 ? options.seed : resample_seed(options.seed, attempt);
    try {
      report.jacobian = jacobian_rank(g, sample_parameters(g, s));
      break;
    } catch (const NonGenericPoint&) {
      if (attempt >= 5) throw;
    }
  }
  report.globally_infinite_to_one = !report.jacobian.full_column_rank();

  std::optional<RecoveryErrors> errors;
  if (options.verify && !report.state.solved().empty())
    errors = recovery_errors(g, report.state, options.seed, options.verify_seeds);

  for (auto edge : g.directed_edges()) {
    EdgeCertificate cert;
    cert.edge = edge;
    if (auto step = report.state.step_of(edge)) {
      const auto& s = report.state.steps()[*step];
      cert.status = EdgeStatus::identifiable;
      cert.method = s.method;
      cert.step = step;
      cert.prerequisites = s.prerequisites;
      if (errors) {
        const double err = errors->max_rel_err.at(edge);
        if (!(err <= options.tolerance)) {
          std::ostringstream msg;
          msg << "recovered coefficient of " << edge.from + 1 << "->" << edge.to + 1 << " misses by relative error "
              << err;
          throw VerificationFailure(msg.str());
        }
        cert.verification = Verification{errors->seeds, err};
      }
    } else {
      auto record = edge_infinite_to_one(g, edge);
      cert.status = record.holds ? EdgeStatus::infinite_to_one : EdgeStatus::unknown;
      cert.infinite_to_one = std::move(record);
    }
    report.certificates.push_back(std::move(cert));
  }
  return report;
}

}  // namespace semid
