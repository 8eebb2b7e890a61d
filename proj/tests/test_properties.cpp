#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "semid/flow.hpp"
#include "semid/identify.hpp"
#include "semid/numeric.hpp"

using namespace semid;

namespace {

constexpr int kCases = 200;

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& m, const VertexSet& rows, const VertexSet& cols) {
  Eigen::MatrixXd out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = m(rows[i], cols[j]);
  return out;
}

int random_n(std::mt19937_64& rng, int lo = 2, int hi = 6) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

}  // namespace

TEST_SUITE_BEGIN("properties");

TEST_CASE("trek rule: covariance entries are sums of trek monomials") {
  std::mt19937_64 rng(101);
  for (int rep = 0; rep < kCases; ++rep) {
    auto g = fixtures::random_graph(rng, random_n(rng), 0.4, 0.3, true);
    auto p = sample_parameters(g, rep);
    auto sigma = covariance(p);
    const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
    for (int v = 0; v < g.num_vertices(); ++v)
      for (int w = v; w < g.num_vertices(); ++w) {
        double sum = 0.0;
        for (const auto& t : enumerate_treks(g, v, w)) sum += trek_monomial(t, p);
        CHECK(std::abs(sum - sigma(v, w)) < 1e-9 * scale);
      }
  }
}

TEST_CASE("numeric rank of covariance submatrices equals the flow rank") {
  std::mt19937_64 rng(103);
  for (int rep = 0; rep < kCases; ++rep) {
    const int n = random_n(rng, 3, 6);
    auto g = fixtures::random_graph(rng, n, 0.35, 0.3, rep % 2 == 0);
    auto sigma = covariance(sample_parameters(g, rep));
    for (int q = 0; q < 4; ++q) {
      auto rows = fixtures::random_subset(rng, n, 3);
      auto cols = fixtures::random_subset(rng, n, 3);
      CHECK(numeric_rank(submatrix(sigma, rows, cols)) == generic_rank(g, rows, cols));
    }
  }
}

TEST_CASE("restricted flow below k forces a vanishing restricted minor") {
  std::mt19937_64 rng(107);
  std::bernoulli_distribution keep(0.6);
  int vanishing = 0;
  for (int rep = 0; rep < kCases; ++rep) {
    const int n = random_n(rng, 3, 6);
    auto g = fixtures::random_graph(rng, n, 0.4, 0.3, rep % 2 == 0);
    EdgeSet left, right;
    for (auto e : g.directed_edges()) {
      if (keep(rng)) left.insert(e);
      if (keep(rng)) right.insert(e);
    }
    const auto p = sample_parameters(g, rep);
    Eigen::MatrixXd gamma;
    try {
      gamma = restricted_covariance(p, left, right);
    } catch (const NonGenericPoint&) {
      continue;  // a restricted I - Lambda can be singular on cyclic graphs
    }
    const int k = std::uniform_int_distribution<int>(1, std::min(3, n))(rng);
    auto rows = fixtures::random_subset(rng, n, k);
    auto cols = fixtures::random_subset(rng, n, k);
    if (rows.size() != cols.size()) continue;
    const int flow = trek_flow(build_restricted_flow_graph(g, left, right), rows, cols).value;
    if (flow < static_cast<int>(rows.size())) {
      ++vanishing;
      CHECK(std::abs(subdeterminant(gamma, rows, cols)) < 1e-9 * determinant_scale(gamma, rows.size()));
    }
  }
  CHECK(vanishing > 20);
}

TEST_CASE("a half-trek system makes the instrument matrix invertible") {
  std::mt19937_64 rng(109);
  int systems = 0;
  for (int rep = 0; rep < kCases; ++rep) {
    const int n = random_n(rng, 3, 6);
    auto g = fixtures::random_graph(rng, n, 0.4, 0.3, rep % 2 == 0);
    const auto p = sample_parameters(g, rep);
    const auto sigma = covariance(p);
    const int k = std::uniform_int_distribution<int>(1, std::min(3, n - 1))(rng);
    auto targets = fixtures::random_subset(rng, n, k);
    auto sources = fixtures::random_subset(rng, n, k);
    if (sources.size() != targets.size()) continue;
    auto search = half_trek_system_exists(g, sources, targets);
    if (!search.exists) continue;
    ++systems;
    HalfTrekSystem sys;
    sys.targets.assign(targets.begin(), targets.end());
    sys.instruments.assign(sources.begin(), sources.end());
    KnownCoefficients known;
    for (auto e : g.directed_edges()) known[e] = p.lambda(e.from, e.to);
    for (int y : sources) sys.instrument_parents.push_back(g.parents(y));
    auto a = htc_system_matrix(sigma, sys, known);
    CHECK(std::abs(a.determinant()) > 1e-8 * determinant_scale(sigma, targets.size()));
  }
  CHECK(systems > 50);
}

TEST_CASE("subdivision preserves restricted max-flow values") {
  std::mt19937_64 rng(31);
  std::bernoulli_distribution keep(0.6);
  for (int rep = 0; rep < kCases; ++rep) {
    auto g = fixtures::random_graph(rng, 5, 0.3, 0.35, rep % 2 == 0);
    auto sub = bidirected_subdivision(g);
    EdgeSet left, right;
    for (auto e : g.directed_edges()) {
      if (keep(rng)) left.insert(e);
      if (keep(rng)) right.insert(e);
    }
    EdgeSet sub_left = left, sub_right = right;
    for (std::size_t k = 0; k < sub.replaced.size(); ++k) {
      const int fresh = g.num_vertices() + static_cast<int>(k);
      for (int end : {sub.replaced[k].from, sub.replaced[k].to}) {
        sub_left.insert({fresh, end});
        sub_right.insert({fresh, end});
      }
    }
    auto rows = fixtures::random_subset(rng, 5, 3);
    auto cols = fixtures::random_subset(rng, 5, 3);
    const int original = trek_flow(build_restricted_flow_graph(g, left, right), rows, cols).value;
    const int subdivided = trek_flow(build_restricted_flow_graph(sub.graph, sub_left, sub_right), rows, cols).value;
    CHECK(original == subdivided);
  }
}

TEST_CASE("HTC solves a subset of what edgewise identification solves") {
  std::mt19937_64 rng(113);
  for (int rep = 0; rep < kCases; ++rep) {
    auto g = fixtures::random_graph(rng, random_n(rng), 0.35, 0.35, rep % 2 == 0);
    auto htc = htc_identify(g).solved();
    auto eid = eid_identify(g).solved();
    CHECK(std::includes(eid.begin(), eid.end(), htc.begin(), htc.end()));
  }
  for (const auto& g : fixtures::table1()) {
    auto htc = htc_identify(g).solved();
    auto eid = eid_identify(g).solved();
    CHECK(std::includes(eid.begin(), eid.end(), htc.begin(), htc.end()));
  }
}

TEST_CASE("descendant-free separation pairs are accepted by the restricted test") {
  std::mt19937_64 rng(127);
  int accepted = 0;
  for (int rep = 0; rep < kCases * 5; ++rep) {
    const int n = random_n(rng, 3, 6);
    auto g = fixtures::random_graph(rng, n, 0.4, 0.35, rep % 2 == 0);
    auto d = g.directed_edges();
    if (d.empty()) continue;
    const Edge edge = d[std::uniform_int_distribution<std::size_t>(0, d.size() - 1)(rng)];
    VertexSet known;
    for (int w : g.parents(edge.to))
      if (w != edge.from && std::bernoulli_distribution(0.5)(rng)) known.push_back(w);
    const int k = std::uniform_int_distribution<int>(1, std::min(3, n - 1))(rng);
    auto rows = fixtures::random_subset(rng, n, k);
    VertexSet pool;
    for (int x = 0; x < n; ++x)
      if (x != edge.from && x != edge.to) pool.push_back(x);
    std::shuffle(pool.begin(), pool.end(), rng);
    if (pool.size() + 1 < rows.size()) continue;
    VertexSet cols(pool.begin(), pool.begin() + (rows.size() - 1));
    std::sort(cols.begin(), cols.end());
    if (tsid_accepts_simple(g, edge, known, rows, cols)) {
      ++accepted;
      CHECK(tsid_accepts(g, edge, known, rows, cols));
    }
  }
  CHECK(accepted > 20);
}

TEST_CASE("certificates are sound on random graphs") {
  std::mt19937_64 rng(131);
  int identified = 0, infinite = 0;
  for (int rep = 0; rep < kCases; ++rep) {
    auto g = fixtures::random_graph(rng, random_n(rng), 0.35, 0.35, rep % 3 != 0);
    CertifyOptions options;
    options.seed = static_cast<std::uint64_t>(rep);
    CertificationReport report;
    REQUIRE_NOTHROW(report = certify(g, options));
    for (const auto& c : report.certificates) {
      if (c.status == EdgeStatus::identifiable) {
        ++identified;
        CHECK_FALSE(edge_infinite_to_one(g, c.edge).holds);
        REQUIRE(c.verification.has_value());
        CHECK(c.verification->max_rel_err < 1e-6);
      } else if (c.status == EdgeStatus::infinite_to_one) {
        ++infinite;
        CHECK(report.globally_infinite_to_one);
        const auto p = sample_parameters(g, rep);
        auto alt = alternative_parameters(g, p, c.edge, p.lambda(c.edge.from, c.edge.to) + 0.05);
        REQUIRE(alt.has_value());
        CHECK(alt->max_sigma_difference < 1e-9 * std::max(1.0, covariance(p).cwiseAbs().maxCoeff()));
      }
    }
  }
  CHECK(identified > 100);
  CHECK(infinite > 10);
}

TEST_CASE("analytic and finite-difference Jacobians agree") {
  std::mt19937_64 rng(137);
  for (int rep = 0; rep < kCases; ++rep) {
    auto g = fixtures::random_graph(rng, random_n(rng), 0.35, 0.35, rep % 2 == 0);
    const auto p = sample_parameters(g, rep);
    auto a = jacobian(g, p);
    auto f = jacobian_finite_difference(g, p);
    CHECK((a - f).cwiseAbs().maxCoeff() < 1e-6 * std::max(1.0, a.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("identification passes only grow the solved set") {
  std::mt19937_64 rng(139);
  for (int rep = 0; rep < kCases; ++rep) {
    auto g = fixtures::random_graph(rng, random_n(rng), 0.35, 0.35, rep % 2 == 0);
    SolverState state;
    std::size_t rounds = 0;
    for (;;) {
      const auto before = state.solved();
      state = eid_identify(g, state);
      CHECK(std::includes(state.solved().begin(), state.solved().end(), before.begin(), before.end()));
      const auto middle = state.solved();
      state = tsid_identify(g, state);
      CHECK(std::includes(state.solved().begin(), state.solved().end(), middle.begin(), middle.end()));
      ++rounds;
      if (state.solved() == before) break;
    }
    CHECK(rounds <= g.num_directed() + 1);
    CHECK(state.solved() == eid_tsid_identify(g).solved());
  }
}

TEST_SUITE_END();
