#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "semid/graph.hpp"

namespace semid {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Raised when a tolerance check trips at a sampled point. The caller is
// expected to resample; it does not indicate a wrong certificate.
class NonGenericPoint : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename Scalar>
struct BasicParameters {
  Matrix<Scalar> lambda;  // lambda(u, v) is the coefficient of u -> v
  Matrix<Scalar> omega;   // symmetric positive definite, support B + diagonal
};

using Parameters = BasicParameters<double>;

struct SamplingConfig {
  double min_magnitude = 0.3;
  double max_magnitude = 1.0;
  double max_error_covariance = 0.5;
  double min_diagonal_margin = 0.5;
  double max_diagonal_margin = 1.5;
  double rejection_tolerance = 1e-3;  // on |det(I - Lambda)|
  int rejection_budget = 1000;
};

// Deterministic in (g, seed, config).
Parameters sample_parameters(const MixedGraph& g, std::uint64_t seed, const SamplingConfig& config = {});

// Seeds for resampling after a NonGenericPoint; pure function of the base.
std::uint64_t resample_seed(std::uint64_t base, int attempt);

// Checks zero pattern, positive definiteness and invertibility of I - Lambda.
std::vector<std::string> check_parameters(const MixedGraph& g, const Parameters& p, double tolerance = 1e-9);

// (I - lambda_left)^{-T} omega (I - lambda_right)^{-1}, by two LU solves.
template <typename Scalar>
Matrix<Scalar> two_sided_covariance(const Matrix<Scalar>& lambda_left, const Matrix<Scalar>& omega,
                                    const Matrix<Scalar>& lambda_right, Scalar det_tolerance = Scalar(1e-12)) {
  const auto n = omega.rows();
  const Matrix<Scalar> id = Matrix<Scalar>::Identity(n, n);
  Eigen::PartialPivLU<Matrix<Scalar>> left((id - lambda_left).transpose());
  Eigen::PartialPivLU<Matrix<Scalar>> right((id - lambda_right).transpose());
  using std::abs;
  if (abs(left.determinant()) <= det_tolerance || abs(right.determinant()) <= det_tolerance)
    throw NonGenericPoint("I - Lambda is numerically singular");
  // X = (I - L)^{-T} omega; result = X (I - R)^{-1} = ((I - R)^{-T} X^T)^T
  const Matrix<Scalar> x = left.solve(omega);
  return right.solve(x.transpose()).transpose();
}

template <typename Scalar>
Matrix<Scalar> covariance(const BasicParameters<Scalar>& p) {
  Matrix<Scalar> sigma = two_sided_covariance<Scalar>(p.lambda, p.omega, p.lambda);
  return (sigma + sigma.transpose()) / Scalar(2);
}

// Determinant of sigma restricted to the ordered rows and columns. Swapping
// two rows or two columns flips the sign.
template <typename Derived>
typename Derived::Scalar subdeterminant(const Eigen::MatrixBase<Derived>& sigma, const std::vector<int>& rows,
                                        const std::vector<int>& cols) {
  using Scalar = typename Derived::Scalar;
  if (rows.size() != cols.size()) throw std::invalid_argument("subdeterminant needs |rows| == |cols|");
  const auto k = static_cast<Eigen::Index>(rows.size());
  if (k == 0) return Scalar(1);
  Matrix<Scalar> sub(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) sub(i, j) = sigma(rows[i], cols[j]);
  if (k == 1) return sub(0, 0);
  return Eigen::PartialPivLU<Matrix<Scalar>>(sub).determinant();
}

// Scale used when comparing a k x k subdeterminant against a tolerance.
template <typename Derived>
typename Derived::Scalar determinant_scale(const Eigen::MatrixBase<Derived>& sigma, std::size_t k) {
  using Scalar = typename Derived::Scalar;
  using std::pow;
  Scalar m = sigma.cwiseAbs().maxCoeff();
  if (m < Scalar(1)) m = Scalar(1);
  return pow(m, static_cast<int>(k));
}

using KnownCoefficients = std::map<Edge, double>;

struct RatioFormula {
  VertexSet rows;                // S, |S| = |T| + 1
  VertexSet cols;                // T
  int head = 0;                  // v
  int target = 0;                // w0
  std::vector<int> known_parents;  // w1..wl, coefficients supplied by the caller
};

// (|S_{S,T+v}| - sum_i lambda_{w_i v} |S_{S,T+w_i}|) / |S_{S,T+w0}|, with the
// extra column appended after T in every determinant.
double recover_edge_ratio(const Eigen::MatrixXd& sigma, const RatioFormula& formula, const KnownCoefficients& known,
                          double tolerance = 1e-10);

struct HalfTrekSystem {
  int head = 0;                               // v
  std::vector<int> targets;                   // E = {w_1..w_k}, unknown parents of v
  std::vector<int> solved_parents;            // S, parents of v with known coefficients
  std::vector<int> instruments;               // Y = {y_1..y_k}
  std::vector<std::vector<int>> instrument_parents;  // H_i, parents of y_i with known coefficients
};

// Builds A_ij = S_{y_i w_j} - sum_h S_{h w_j} lambda_{h y_i} and the matching
// right-hand side, solves for lambda_{w_j v}.
std::map<int, double> solve_htc_system(const Eigen::MatrixXd& sigma, const HalfTrekSystem& system,
                                       const KnownCoefficients& known, double tolerance = 1e-10);

// The k x k matrix A on its own (for invertibility checks).
Eigen::MatrixXd htc_system_matrix(const Eigen::MatrixXd& sigma, const HalfTrekSystem& system,
                                  const KnownCoefficients& known);

struct DeterminantalRow {
  VertexSet rows;  // S_i
  VertexSet cols;  // T_i, |S_i| = |T_i| + 1
};

// Solves sum_j |S_{S_i, T_i + w_j}| lambda_{w_j v} = |S_{S_i, T_i + v}|.
std::map<int, double> solve_determinantal_system(const Eigen::MatrixXd& sigma, const std::vector<DeterminantalRow>& rows,
                                                 int head, const std::vector<int>& targets, double tolerance = 1e-10);

// --- Trek rule oracle --------------------------------------------------------

struct Trek {
  // left: source v first, walking up to the top side.
  // right: top side first, walking down to the target w.
  // With a directed top, left ends and right begins at the top vertex.
  std::vector<int> left;
  std::vector<int> right;
  std::optional<Edge> bidirected_top;  // (left end, right start) when present

  bool operator==(const Trek&) const = default;
};

// All treks from v to w; requires an acyclic directed part.
std::vector<Trek> enumerate_treks(const MixedGraph& g, int v, int w);

template <typename Scalar>
Scalar trek_monomial(const Trek& t, const BasicParameters<Scalar>& p) {
  Scalar value = t.bidirected_top ? p.omega(t.bidirected_top->from, t.bidirected_top->to)
                                  : p.omega(t.left.back(), t.left.back());
  for (std::size_t i = 0; i + 1 < t.left.size(); ++i) value *= p.lambda(t.left[i + 1], t.left[i]);
  for (std::size_t i = 0; i + 1 < t.right.size(); ++i) value *= p.lambda(t.right[i], t.right[i + 1]);
  return value;
}

// --- Jacobian ----------------------------------------------------------------

struct ParameterIndex {
  std::vector<Edge> directed;  // columns 0..|D|-1
  std::vector<Edge> omega;     // then (v, v) for each v and each bidirected pair (u < v)
  std::size_t size() const { return directed.size() + omega.size(); }
};

ParameterIndex parameter_index(const MixedGraph& g);

// Rows are vech(Sigma) (lower triangle, column-major), columns follow
// parameter_index.
Eigen::MatrixXd jacobian(const MixedGraph& g, const Parameters& p);
Eigen::MatrixXd jacobian_finite_difference(const MixedGraph& g, const Parameters& p, double step = 1e-6);

int numeric_rank(const Eigen::MatrixXd& m, double relative_threshold = 1e-8);

struct JacobianRank {
  int rank = 0;
  int num_parameters = 0;
  bool full_column_rank() const { return rank == num_parameters; }
};

JacobianRank jacobian_rank(const MixedGraph& g, const Parameters& p, double relative_threshold = 1e-8);

// --- Restricted two-sided covariance (left/right edge subsets) -------------

Eigen::MatrixXd restricted_covariance(const Parameters& p, const EdgeSet& left, const EdgeSet& right);

// --- Alternative parameters for infinite-to-one edges -------------------

struct AlternativeParameters {
  Parameters params;
  double max_sigma_difference = 0.0;
};

// Returns nullopt when the edge fails the infinite-to-one hypothesis.
// Otherwise replaces lambda(v, w) by gamma, sets Psi = (I - Gamma)^T Sigma (I - Gamma)
// and checks support, positive definiteness and reproduction of Sigma.
// Singular I - Gamma or an indefinite Psi throws NonGenericPoint (gamma too
// far from lambda); a support or reproduction failure is a logic_error.
std::optional<AlternativeParameters> alternative_parameters(const MixedGraph& g, const Parameters& p, Edge edge,
                                                            double gamma, double tolerance = 1e-9);

}  // namespace semid
