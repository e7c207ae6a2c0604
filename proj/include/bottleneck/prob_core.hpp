#pragma once

// Finite discrete distributions and the information quantities built on them.
// Everything here works in nats; conversion to bits happens at output time.

#include <Eigen/Dense>

#include <optional>
#include <string_view>

namespace bottleneck {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kDefaultSmoothing = 1e-9;
inline constexpr double kNormTolerance = 1e-12;

enum class Variable { X, Xhat, Y, Yhat };

std::string_view to_string(Variable v);

// Row-stochastic matrix p(outcome | condition). Rows are validated at
// construction: nonnegative and summing to 1 within kNormTolerance.
class ConditionalDistribution {
 public:
  ConditionalDistribution(Matrix rows, Variable given, Variable outcome);

  const Matrix& rows() const noexcept { return rows_; }
  Index conditions() const noexcept { return rows_.rows(); }
  Index outcomes() const noexcept { return rows_.cols(); }
  double operator()(Index condition, Index outcome) const { return rows_(condition, outcome); }
  Variable given() const noexcept { return given_; }
  Variable outcome() const noexcept { return outcome_; }

 private:
  Matrix rows_;
  Variable given_;
  Variable outcome_;
};

// The rule p(x,y). Immutable; marginals and conditionals are derived once.
//
// Every p(y|x) is strictly positive after construction. Rows containing a
// zero are smoothed as (p + eps) / (1 + n_y eps) when a smoothing epsilon is
// given; without one a zero is a ValidationError. Rows with p(x) = 0 are
// rejected.
class JointDistribution {
 public:
  static JointDistribution from_conditional(const Vector& p_x, const Matrix& p_y_given_x,
                                            std::optional<double> smoothing = kDefaultSmoothing);
  static JointDistribution from_joint(const Matrix& p_xy,
                                      std::optional<double> smoothing = kDefaultSmoothing);

  Index n_x() const noexcept { return p_xy_.rows(); }
  Index n_y() const noexcept { return p_xy_.cols(); }

  const Matrix& joint() const noexcept { return p_xy_; }
  const Vector& p_x() const noexcept { return p_x_; }
  const Vector& p_y() const noexcept { return p_y_; }
  // (x, y) -> p(y|x)
  const Matrix& p_y_given_x() const noexcept { return p_y_given_x_; }
  const Matrix& log_p_y_given_x() const noexcept { return log_p_y_given_x_; }
  // (x, y) -> p(x|y)
  const Matrix& p_x_given_y() const noexcept { return p_x_given_y_; }

  double entropy_x() const;
  double entropy_y() const;
  double mutual_information() const;

 private:
  JointDistribution() = default;

  Matrix p_xy_;
  Vector p_x_;
  Vector p_y_;
  Matrix p_y_given_x_;
  Matrix log_p_y_given_x_;
  Matrix p_x_given_y_;
};

double entropy(const Eigen::Ref<const Vector>& p);

// I(A;B) of a normalized nonnegative joint matrix, in nats.
double mutual_information(const Matrix& joint);

// D[p || q] in nats. Throws DivergenceUndefined if q vanishes where p > 0.
double kl_divergence(const Eigen::Ref<const Vector>& p, const Eigen::Ref<const Vector>& q);

// Arithmetic mixture p(y|xhat) = sum_x p(y|x) p(x|xhat).
ConditionalDistribution bayes_decoder(const JointDistribution& joint,
                                      const ConditionalDistribution& inverse_encoder);

struct GeometricDecoder {
  ConditionalDistribution decoder;
  Vector log_partition;  // log Z_{y|xhat} per row
};

// Normalized weighted geometric mean p(y|xhat) ∝ prod_x p(y|x)^{p(x|xhat)},
// accumulated in log space.
GeometricDecoder geometric_decoder(const JointDistribution& joint,
                                   const ConditionalDistribution& inverse_encoder);

namespace detail {
// Stable log-sum-exp of a row.
double log_sum_exp(const Eigen::Ref<const Eigen::RowVectorXd>& row);
}  // namespace detail

}  // namespace bottleneck
