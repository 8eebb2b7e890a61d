#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "semid/flow.hpp"
#include "semid/graph.hpp"
#include "semid/nonidentifiability.hpp"
#include "semid/numeric.hpp"

namespace semid {

enum class Method { htc, eid, tsid, joint };
enum class EdgeStatus { identifiable, infinite_to_one, unknown };

const char* to_string(Method m);
const char* to_string(EdgeStatus s);

// --- Half-trek systems -------------------------------------------------------

struct HalfTrek {
  int source = 0;
  bool bidirected_start = false;  // source <-> right.front()
  std::vector<int> right;         // right side; right.front() == source for a directed start
};

struct HalfTrekSystemSearch {
  bool exists = false;
  std::vector<HalfTrek> system;  // one per target, in flow order
};

// Half-trek system with no sided intersection from a subset of `sources`
// onto all of `targets`. Left sides are singletons, so the check reduces to
// right-side vertex disjointness: a max flow on the trek network without
// left-side arcs.
HalfTrekSystemSearch half_trek_system_exists(const MixedGraph& g, const VertexSet& sources,
                                             const VertexSet& targets, const VertexSet& avoid = {});

// --- Certificates ------------------------------------------------------------

struct JointSystem {
  int head = 0;
  std::vector<int> targets;
  std::vector<DeterminantalRow> rows;
};

using Witness = std::variant<HalfTrekSystem, RatioFormula, JointSystem>;

struct IdentificationStep {
  Method method = Method::htc;
  Witness witness;
  std::vector<Edge> solved;         // edges identified by this step
  std::vector<Edge> prerequisites;  // edges whose coefficients the step consumes
};

class SolverState {
 public:
  const EdgeSet& solved() const noexcept { return solved_; }
  const std::vector<IdentificationStep>& steps() const noexcept { return steps_; }
  bool is_solved(Edge e) const { return solved_.contains(e); }
  std::optional<std::size_t> step_of(Edge e) const;

  // Prerequisites must already be solved and `solved` must be new; throws
  // std::logic_error otherwise so that the replay order stays topological.
  void apply(IdentificationStep step);

 private:
  EdgeSet solved_;
  std::vector<IdentificationStep> steps_;
  std::map<Edge, std::size_t> step_of_;
};

// Half-trek criterion applied vertex by vertex until nothing changes.
SolverState htc_identify(const MixedGraph& g, SolverState state = {});

// Edgewise identification: subsets of a vertex's unsolved parents,
// largest first and lexicographic within a size.
SolverState eid_identify(const MixedGraph& g, SolverState state = {});

// Trek-separation identification with |S| = |T| + 1 <= max_set_size
// (max_set_size <= 0 means n).
SolverState tsid_identify(const MixedGraph& g, SolverState state = {}, int max_set_size = 0);

// Alternates the two previous passes until neither adds an edge.
SolverState eid_tsid_identify(const MixedGraph& g, int max_set_size = 0);

// Acceptance tests for a single (S, T) pair and edge w0 -> v with known
// parents w1..wl. The "restricted" form only removes the right-side copies
// of the edges into v and needs des(v) disjoint from T + v; the "simple"
// form removes the edges outright and needs des(v) disjoint from S + T + v.
bool tsid_accepts(const MixedGraph& g, Edge edge, const VertexSet& known_parents, const VertexSet& rows,
                  const VertexSet& cols);
bool tsid_accepts_simple(const MixedGraph& g, Edge edge, const VertexSet& known_parents, const VertexSet& rows,
                         const VertexSet& cols);

// Coefficients recovered by replaying every step in order.
KnownCoefficients replay(const SolverState& state, const Eigen::MatrixXd& sigma, double tolerance = 1e-10);

struct ReplaySample {
  std::uint64_t seed = 0;  // seed actually used after resampling
  Parameters truth;
  KnownCoefficients recovered;
};

// Samples parameters, replays, and resamples up to `attempts` times when a
// determinant or system matrix degenerates at the sampled point.
ReplaySample replay_at_seed(const MixedGraph& g, const SolverState& state, std::uint64_t seed, int attempts = 5);

// --- Certification -----------------------------------------------------------

class VerificationFailure : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct Verification {
  int seeds = 0;
  double max_rel_err = 0.0;
};

struct EdgeCertificate {
  Edge edge;
  EdgeStatus status = EdgeStatus::unknown;
  std::optional<Method> method;
  std::optional<std::size_t> step;
  std::vector<Edge> prerequisites;
  std::optional<InfiniteToOneRecord> infinite_to_one;
  std::optional<Verification> verification;
};

struct CertifyOptions {
  int max_set_size = 0;  // <= 0 means n
  bool verify = true;
  std::uint64_t seed = 0;
  int verify_seeds = 3;
  double tolerance = 1e-6;  // relative recovery error
};

struct CertificationReport {
  SolverState state;
  std::vector<EdgeCertificate> certificates;  // sorted by edge
  JacobianRank jacobian;
  bool globally_infinite_to_one = false;  // Jacobian of the parameterization is rank deficient

  bool all_identifiable() const;
  bool any_infinite_to_one() const;
  bool any_unknown() const;
};

// Throws VerificationFailure when a replayed certificate misses the sampled
// coefficient by more than the tolerance.
CertificationReport certify(const MixedGraph& g, const CertifyOptions& options = {});

struct RecoveryErrors {
  std::map<Edge, double> max_rel_err;
  int seeds = 0;
};

// Replays over seeds base, base + 1, ..., recording the worst relative error
// per solved edge.
RecoveryErrors recovery_errors(const MixedGraph& g, const SolverState& state, std::uint64_t base_seed, int seeds);

}  // namespace semid
