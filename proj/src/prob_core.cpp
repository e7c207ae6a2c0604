#include "bottleneck/prob_core.hpp"

#include "bottleneck/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace bottleneck {
namespace {

constexpr double kInputTolerance = 1e-9;

void require_nonnegative(const Matrix& m, const std::string& field) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (!std::isfinite(m(i, j)) || m(i, j) < 0.0) {
        throw ValidationError(field + "[" + std::to_string(i) + "][" + std::to_string(j) + "]",
                              "probability must be finite and nonnegative");
      }
    }
  }
}

}  // namespace

std::string_view to_string(Variable v) {
  switch (v) {
    case Variable::X:
      return "x";
    case Variable::Xhat:
      return "xhat";
    case Variable::Y:
      return "y";
    case Variable::Yhat:
      return "yhat";
  }
  return "?";
}

ConditionalDistribution::ConditionalDistribution(Matrix rows, Variable given, Variable outcome)
    : rows_(std::move(rows)), given_(given), outcome_(outcome) {
  const std::string field =
      "p(" + std::string(to_string(outcome_)) + "|" + std::string(to_string(given_)) + ")";
  require_nonnegative(rows_, field);
  for (Index i = 0; i < rows_.rows(); ++i) {
    const double s = rows_.row(i).sum();
    if (std::abs(s - 1.0) > kNormTolerance) {
      throw ValidationError(field + "[" + std::to_string(i) + "]",
                            "row sums to " + std::to_string(s) + ", expected 1");
    }
  }
}

JointDistribution JointDistribution::from_conditional(const Vector& p_x, const Matrix& p_y_given_x,
                                                      std::optional<double> smoothing) {
  if (p_x.size() != p_y_given_x.rows()) {
    throw DimensionMismatch("p_x has " + std::to_string(p_x.size()) + " entries but p_y_given_x has " +
                            std::to_string(p_y_given_x.rows()) + " rows");
  }
  if (p_y_given_x.rows() == 0 || p_y_given_x.cols() == 0) {
    throw ValidationError("p_y_given_x", "empty alphabet");
  }
  require_nonnegative(p_x, "p_x");
  require_nonnegative(p_y_given_x, "p_y_given_x");
  if (smoothing && (*smoothing < 0.0 || !std::isfinite(*smoothing))) {
    throw ValidationError("smoothing_epsilon", "must be a nonnegative number");
  }

  const double px_sum = p_x.sum();
  if (std::abs(px_sum - 1.0) > 1e-6) {
    throw ValidationError("p_x", "sums to " + std::to_string(px_sum) + ", expected 1");
  }
  Vector px = p_x / px_sum;
  for (Index x = 0; x < px.size(); ++x) {
    if (px(x) <= 0.0) {
      throw ValidationError("p_x[" + std::to_string(x) + "]", "zero-probability input");
    }
  }

  const Index n_y = p_y_given_x.cols();
  Matrix cond = p_y_given_x;
  for (Index x = 0; x < cond.rows(); ++x) {
    const double s = cond.row(x).sum();
    if (std::abs(s - 1.0) > 1e-6) {
      throw ValidationError("p_y_given_x[" + std::to_string(x) + "]",
                            "sums to " + std::to_string(s) + ", expected 1");
    }
    cond.row(x) /= s;
    if (cond.row(x).minCoeff() <= 0.0) {
      const double eps = smoothing.value_or(0.0);
      if (eps <= 0.0) {
        throw ValidationError("p_y_given_x[" + std::to_string(x) + "]",
                              "zero conditional probability and smoothing disabled");
      }
      cond.row(x) = (cond.row(x).array() + eps) / (1.0 + static_cast<double>(n_y) * eps);
      cond.row(x) /= cond.row(x).sum();
    }
  }

  JointDistribution j;
  j.p_x_ = px;
  j.p_y_given_x_ = cond;
  j.log_p_y_given_x_ = cond.array().log();
  j.p_xy_ = px.asDiagonal() * cond;
  j.p_y_ = j.p_xy_.colwise().sum().transpose();
  j.p_x_given_y_ = j.p_xy_ * j.p_y_.cwiseInverse().asDiagonal();
  return j;
}

JointDistribution JointDistribution::from_joint(const Matrix& p_xy, std::optional<double> smoothing) {
  require_nonnegative(p_xy, "p_xy");
  const double total = p_xy.sum();
  if (std::abs(total - 1.0) > 1e-6) {
    throw ValidationError("p_xy", "sums to " + std::to_string(total) + ", expected 1");
  }
  Vector px = p_xy.rowwise().sum() / total;
  Matrix cond(p_xy.rows(), p_xy.cols());
  for (Index x = 0; x < p_xy.rows(); ++x) {
    if (px(x) <= 0.0) {
      throw ValidationError("p_xy[" + std::to_string(x) + "]", "zero-probability input");
    }
    cond.row(x) = p_xy.row(x) / p_xy.row(x).sum();
  }
  return from_conditional(px, cond, smoothing);
}

double JointDistribution::entropy_x() const { return entropy(p_x_); }
double JointDistribution::entropy_y() const { return entropy(p_y_); }
double JointDistribution::mutual_information() const { return bottleneck::mutual_information(p_xy_); }

double entropy(const Eigen::Ref<const Vector>& p) {
  double h = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    if (p(i) > 0.0) h -= p(i) * std::log(p(i));
  }
  return h;
}

double mutual_information(const Matrix& joint) {
  require_nonnegative(joint, "joint");
  const double total = joint.sum();
  if (std::abs(total - 1.0) > kInputTolerance) {
    throw ValidationError("joint", "sums to " + std::to_string(total) + ", expected 1");
  }
  const Vector pa = joint.rowwise().sum();
  const Eigen::RowVectorXd pb = joint.colwise().sum();
  double mi = 0.0;
  for (Index a = 0; a < joint.rows(); ++a) {
    for (Index b = 0; b < joint.cols(); ++b) {
      const double pab = joint(a, b);
      if (pab > 0.0) mi += pab * std::log(pab / (pa(a) * pb(b)));
    }
  }
  // Roundoff can leave a tiny negative for independent inputs.
  return mi < 0.0 && mi > -1e-15 ? 0.0 : mi;
}

double kl_divergence(const Eigen::Ref<const Vector>& p, const Eigen::Ref<const Vector>& q) {
  if (p.size() != q.size()) {
    throw DimensionMismatch("kl_divergence: sizes " + std::to_string(p.size()) + " and " +
                            std::to_string(q.size()));
  }
  if (p.minCoeff() < 0.0 || std::abs(p.sum() - 1.0) > kInputTolerance) {
    throw ValidationError("p", "not a probability vector");
  }
  if (q.minCoeff() < 0.0) throw ValidationError("q", "negative entry");
  double d = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    if (p(i) == 0.0) continue;
    if (q(i) <= 0.0) {
      throw DivergenceUndefined("kl_divergence: q[" + std::to_string(i) + "] = 0 where p > 0");
    }
    d += p(i) * std::log(p(i) / q(i));
  }
  return d;
}

ConditionalDistribution bayes_decoder(const JointDistribution& joint,
                                      const ConditionalDistribution& inverse_encoder) {
  if (inverse_encoder.outcomes() != joint.n_x()) {
    throw DimensionMismatch("inverse encoder has " + std::to_string(inverse_encoder.outcomes()) +
                            " columns, problem has n_x = " + std::to_string(joint.n_x()));
  }
  Matrix dec = inverse_encoder.rows() * joint.p_y_given_x();
  for (Index k = 0; k < dec.rows(); ++k) dec.row(k) /= dec.row(k).sum();
  return {std::move(dec), Variable::Xhat, Variable::Y};
}

GeometricDecoder geometric_decoder(const JointDistribution& joint,
                                   const ConditionalDistribution& inverse_encoder) {
  if (inverse_encoder.outcomes() != joint.n_x()) {
    throw DimensionMismatch("inverse encoder has " + std::to_string(inverse_encoder.outcomes()) +
                            " columns, problem has n_x = " + std::to_string(joint.n_x()));
  }
  const Matrix& log_rule = joint.log_p_y_given_x();
  if (!log_rule.allFinite()) throw DivergenceUndefined("geometric_decoder: zero entry in p(y|x)");
  const Matrix logits = inverse_encoder.rows() * log_rule;
  Matrix dec(logits.rows(), logits.cols());
  Vector log_z(logits.rows());
  for (Index k = 0; k < logits.rows(); ++k) {
    const double lse = detail::log_sum_exp(logits.row(k));
    log_z(k) = lse;
    dec.row(k) = (logits.row(k).array() - lse).exp();
    dec.row(k) /= dec.row(k).sum();
  }
  return {ConditionalDistribution(std::move(dec), Variable::Xhat, Variable::Y), std::move(log_z)};
}

namespace detail {

double log_sum_exp(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  const double m = row.maxCoeff();
  if (m == -std::numeric_limits<double>::infinity()) return m;
  return m + std::log((row.array() - m).exp().sum());
}

}  // namespace detail
}  // namespace bottleneck
