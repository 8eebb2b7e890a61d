#include "semid/numeric.hpp"

#include <algorithm>
#include <functional>
#include <random>

#include "semid/nonidentifiability.hpp"

namespace semid {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t resample_seed(std::uint64_t base, int attempt) {
  if (attempt == 0) return base;
  return splitmix64(base ^ (0xd1b54a32d192ed03ULL * static_cast<std::uint64_t>(attempt)));
}

Parameters sample_parameters(const MixedGraph& g, std::uint64_t seed, const SamplingConfig& config) {
  const int n = g.num_vertices();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> magnitude(config.min_magnitude, config.max_magnitude);
  std::uniform_real_distribution<double> off_diagonal(-config.max_error_covariance, config.max_error_covariance);
  std::uniform_real_distribution<double> margin(config.min_diagonal_margin, config.max_diagonal_margin);
  std::bernoulli_distribution negative(0.5);

  Parameters p{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n)};
  const auto edges = g.directed_edges();
  const bool acyclic = g.is_acyclic();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  for (int attempt = 0;; ++attempt) {
    if (attempt >= config.rejection_budget)
      throw std::runtime_error("parameter sampling: rejection budget exhausted");
    for (auto e : edges) {
      double m = magnitude(rng);
      p.lambda(e.from, e.to) = negative(rng) ? -m : m;
    }
    if (acyclic || std::abs((id - p.lambda).determinant()) > config.rejection_tolerance) break;
  }

  for (auto e : g.bidirected_edges()) {
    double x = off_diagonal(rng);
    p.omega(e.from, e.to) = x;
    p.omega(e.to, e.from) = x;
  }
  for (int v = 0; v < n; ++v) p.omega(v, v) = p.omega.row(v).cwiseAbs().sum() + margin(rng);
  return p;
}

std::vector<std::string> check_parameters(const MixedGraph& g, const Parameters& p, double tolerance) {
  std::vector<std::string> problems;
  const int n = g.num_vertices();
  if (p.lambda.rows() != n || p.lambda.cols() != n || p.omega.rows() != n || p.omega.cols() != n) {
    problems.push_back("parameter matrices have the wrong shape");
    return problems;
  }
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      if (p.lambda(u, v) != 0.0 && !g.has_directed(u, v))
        problems.push_back("lambda has support outside the directed edges");
      if (u != v && p.omega(u, v) != 0.0 && !g.has_bidirected(u, v))
        problems.push_back("omega has support outside the bidirected edges");
      if (std::abs(p.omega(u, v) - p.omega(v, u)) > tolerance) problems.push_back("omega is not symmetric");
    }
  }
  if (n > 0) {
    Eigen::LLT<Eigen::MatrixXd> llt(p.omega);
    if (llt.info() != Eigen::Success) problems.push_back("omega is not positive definite");
    if (std::abs((Eigen::MatrixXd::Identity(n, n) - p.lambda).determinant()) <= tolerance)
      problems.push_back("I - Lambda is not invertible");
  }
  std::sort(problems.begin(), problems.end());
  problems.erase(std::unique(problems.begin(), problems.end()), problems.end());
  return problems;
}

namespace {

std::vector<int> with_column(const VertexSet& cols, int extra) {
  std::vector<int> out(cols.begin(), cols.end());
  out.push_back(extra);
  return out;
}

double known_value(const KnownCoefficients& known, Edge e) {
  auto it = known.find(e);
  if (it == known.end())
    throw std::invalid_argument("missing known coefficient for edge " + std::to_string(e.from + 1) + "->" +
                                std::to_string(e.to + 1));
  return it->second;
}

}  // namespace

double recover_edge_ratio(const Eigen::MatrixXd& sigma, const RatioFormula& f, const KnownCoefficients& known,
                          double tolerance) {
  if (f.rows.size() != f.cols.size() + 1) throw std::invalid_argument("ratio formula needs |S| = |T| + 1");
  const std::vector<int> rows(f.rows.begin(), f.rows.end());
  const double scale = determinant_scale(sigma, rows.size());
  const double denominator = subdeterminant(sigma, rows, with_column(f.cols, f.target));
  if (std::abs(denominator) <= tolerance * scale) throw NonGenericPoint("ratio denominator vanishes at this point");
  double numerator = subdeterminant(sigma, rows, with_column(f.cols, f.head));
  for (int w : f.known_parents)
    numerator -= known_value(known, {w, f.head}) * subdeterminant(sigma, rows, with_column(f.cols, w));
  return numerator / denominator;
}

Eigen::MatrixXd htc_system_matrix(const Eigen::MatrixXd& sigma, const HalfTrekSystem& s,
                                  const KnownCoefficients& known) {
  const auto k = static_cast<Eigen::Index>(s.targets.size());
  if (s.instruments.size() != s.targets.size() || s.instrument_parents.size() != s.instruments.size())
    throw std::invalid_argument("half-trek system needs |Y| = |E| and one parent set per instrument");
  Eigen::MatrixXd a(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const int y = s.instruments[i];
    for (Eigen::Index j = 0; j < k; ++j) {
      const int w = s.targets[j];
      double value = sigma(y, w);
      for (int h : s.instrument_parents[i]) value -= sigma(h, w) * known_value(known, {h, y});
      a(i, j) = value;
    }
  }
  return a;
}

std::map<int, double> solve_htc_system(const Eigen::MatrixXd& sigma, const HalfTrekSystem& s,
                                       const KnownCoefficients& known, double tolerance) {
  std::map<int, double> out;
  const auto k = static_cast<Eigen::Index>(s.targets.size());
  if (k == 0) return out;
  const Eigen::MatrixXd a = htc_system_matrix(sigma, s, known);
  Eigen::VectorXd rhs(k);
  const int v = s.head;
  for (Eigen::Index i = 0; i < k; ++i) {
    const int y = s.instruments[i];
    const auto& hs = s.instrument_parents[i];
    double value = sigma(y, v);
    for (int h : hs) value -= known_value(known, {h, y}) * sigma(h, v);
    for (int p : s.solved_parents) {
      double coeff = sigma(y, p);
      for (int h : hs) coeff -= known_value(known, {h, y}) * sigma(h, p);
      value -= coeff * known_value(known, {p, v});
    }
    rhs(i) = value;
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  if (std::abs(lu.determinant()) <= tolerance * determinant_scale(sigma, static_cast<std::size_t>(k)))
    throw NonGenericPoint("half-trek system matrix is singular at this point");
  const Eigen::VectorXd x = lu.solve(rhs);
  for (Eigen::Index j = 0; j < k; ++j) out[s.targets[j]] = x(j);
  return out;
}

std::map<int, double> solve_determinantal_system(const Eigen::MatrixXd& sigma, const std::vector<DeterminantalRow>& rows,
                                                 int head, const std::vector<int>& targets, double tolerance) {
  if (rows.size() != targets.size()) throw std::invalid_argument("determinantal system needs one row per target");
  const auto k = static_cast<Eigen::Index>(targets.size());
  std::map<int, double> out;
  if (k == 0) return out;
  Eigen::MatrixXd m(k, k);
  Eigen::VectorXd rhs(k);
  double scale = 1.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto& r = rows[i];
    if (r.rows.size() != r.cols.size() + 1) throw std::invalid_argument("determinantal row needs |S| = |T| + 1");
    const std::vector<int> rs(r.rows.begin(), r.rows.end());
    scale = std::max(scale, determinant_scale(sigma, rs.size()));
    for (Eigen::Index j = 0; j < k; ++j) m(i, j) = subdeterminant(sigma, rs, with_column(r.cols, targets[j]));
    rhs(i) = subdeterminant(sigma, rs, with_column(r.cols, head));
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
  using std::pow;
  if (std::abs(lu.determinant()) <= tolerance * pow(scale, static_cast<double>(k)))
    throw NonGenericPoint("determinantal system is singular at this point");
  const Eigen::VectorXd x = lu.solve(rhs);
  for (Eigen::Index j = 0; j < k; ++j) out[targets[j]] = x(j);
  return out;
}

std::vector<Trek> enumerate_treks(const MixedGraph& g, int v, int w) {
  if (!g.is_acyclic()) throw std::invalid_argument("trek enumeration requires an acyclic directed part");
  const int n = g.num_vertices();
  if (v < 0 || v >= n || w < 0 || w >= n) throw std::out_of_range("vertex out of range");

  // paths[z][x]: all directed paths z -> ... -> x, including the empty one.
  std::vector<std::vector<std::vector<std::vector<int>>>> paths(n, std::vector<std::vector<std::vector<int>>>(n));
  std::function<void(int, std::vector<int>&)> extend = [&](int start, std::vector<int>& current) {
    paths[start][current.back()].push_back(current);
    for (int c : g.children(current.back())) {
      current.push_back(c);
      extend(start, current);
      current.pop_back();
    }
  };
  for (int z = 0; z < n; ++z) {
    std::vector<int> current{z};
    extend(z, current);
  }

  std::vector<Trek> out;
  auto emit = [&](int left_top, int right_top, std::optional<Edge> bidirected) {
    for (const auto& lp : paths[left_top][v]) {
      for (const auto& rp : paths[right_top][w]) {
        Trek t;
        t.left.assign(lp.rbegin(), lp.rend());
        t.right = rp;
        t.bidirected_top = bidirected;
        out.push_back(std::move(t));
      }
    }
  };
  for (int z = 0; z < n; ++z) emit(z, z, std::nullopt);
  for (int u = 0; u < n; ++u)
    for (int z : g.siblings(u)) emit(u, z, Edge{u, z});
  return out;
}

ParameterIndex parameter_index(const MixedGraph& g) {
  ParameterIndex idx;
  idx.directed = g.directed_edges();
  for (int v = 0; v < g.num_vertices(); ++v) idx.omega.push_back({v, v});
  for (auto e : g.bidirected_edges()) idx.omega.push_back(e);
  return idx;
}

namespace {

Eigen::VectorXd vech(const Eigen::MatrixXd& m) {
  const auto n = m.rows();
  Eigen::VectorXd out(n * (n + 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j; i < n; ++i) out(k++) = m(i, j);
  return out;
}

}  // namespace

Eigen::MatrixXd jacobian(const MixedGraph& g, const Parameters& p) {
  const int n = g.num_vertices();
  const auto idx = parameter_index(g);
  const Eigen::MatrixXd sigma = covariance(p);
  const Eigen::MatrixXd m = (Eigen::MatrixXd::Identity(n, n) - p.lambda).inverse();
  Eigen::MatrixXd jac(n * (n + 1) / 2, static_cast<Eigen::Index>(idx.size()));
  Eigen::Index col = 0;
  for (auto e : idx.directed) {
    // dSigma = M^T E_vu Sigma + Sigma E_uv M
    const Eigen::MatrixXd d = m.row(e.to).transpose() * sigma.row(e.from) + sigma.col(e.from) * m.row(e.to);
    jac.col(col++) = vech(d);
  }
  for (auto e : idx.omega) {
    Eigen::MatrixXd d = m.row(e.from).transpose() * m.row(e.to);
    if (e.from != e.to) d += m.row(e.to).transpose() * m.row(e.from);
    jac.col(col++) = vech(d);
  }
  return jac;
}

Eigen::MatrixXd jacobian_finite_difference(const MixedGraph& g, const Parameters& p, double step) {
  const int n = g.num_vertices();
  const auto idx = parameter_index(g);
  Eigen::MatrixXd jac(n * (n + 1) / 2, static_cast<Eigen::Index>(idx.size()));
  Eigen::Index col = 0;
  auto central = [&](auto&& perturb) {
    Parameters plus = p, minus = p;
    perturb(plus, step);
    perturb(minus, -step);
    jac.col(col++) = (vech(covariance(plus)) - vech(covariance(minus))) / (2.0 * step);
  };
  for (auto e : idx.directed) central([&](Parameters& q, double h) { q.lambda(e.from, e.to) += h; });
  for (auto e : idx.omega) {
    central([&](Parameters& q, double h) {
      q.omega(e.from, e.to) += h;
      if (e.from != e.to) q.omega(e.to, e.from) += h;
    });
  }
  return jac;
}

int numeric_rank(const Eigen::MatrixXd& m, double relative_threshold) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > relative_threshold * s(0)) ++rank;
  return rank;
}

JacobianRank jacobian_rank(const MixedGraph& g, const Parameters& p, double relative_threshold) {
  const auto jac = jacobian(g, p);
  return {numeric_rank(jac, relative_threshold), static_cast<int>(jac.cols())};
}

Eigen::MatrixXd restricted_covariance(const Parameters& p, const EdgeSet& left, const EdgeSet& right) {
  const auto n = p.lambda.rows();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n, n);
  for (auto e : left) l(e.from, e.to) = p.lambda(e.from, e.to);
  for (auto e : right) r(e.from, e.to) = p.lambda(e.from, e.to);
  return two_sided_covariance<double>(l, p.omega, r);
}

std::optional<AlternativeParameters> alternative_parameters(const MixedGraph& g, const Parameters& p, Edge edge,
                                                            double gamma, double tolerance) {
  if (!edge_infinite_to_one(g, edge).holds) return std::nullopt;
  const int n = g.num_vertices();
  const Eigen::MatrixXd sigma = covariance(p);
  const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());

  AlternativeParameters alt;
  alt.params.lambda = p.lambda;
  alt.params.lambda(edge.from, edge.to) = gamma;
  const Eigen::MatrixXd i_minus = Eigen::MatrixXd::Identity(n, n) - alt.params.lambda;
  if (std::abs(i_minus.determinant()) <= tolerance) throw NonGenericPoint("I - Gamma is singular");
  Eigen::MatrixXd psi = i_minus.transpose() * sigma * i_minus;
  psi = (psi + psi.transpose()) / 2.0;
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) {
      if (x == y || g.has_bidirected(x, y)) continue;
      if (std::abs(psi(x, y)) > tolerance * scale)
        throw std::logic_error("alternative error covariance leaves the bidirected support");
      psi(x, y) = 0.0;
    }
  }
  if (n > 0 && Eigen::LLT<Eigen::MatrixXd>(psi).info() != Eigen::Success)
    throw NonGenericPoint("alternative error covariance is not positive definite");
  alt.params.omega = psi;
  alt.max_sigma_difference = n > 0 ? (covariance(alt.params) - sigma).cwiseAbs().maxCoeff() : 0.0;
  if (alt.max_sigma_difference > tolerance * scale)
    throw std::logic_error("alternative parameters do not reproduce the covariance");
  return alt;
}

}  // namespace semid
