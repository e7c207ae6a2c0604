#include "bottleneck/expfam.hpp"

#include "bottleneck/errors.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <string>

namespace bottleneck {
namespace {

// log sum_y exp(-sum_r params(y, r) features(r)) for every row of `features`.
Vector log_normalizers(const Matrix& features, const Matrix& params) {
  const Matrix logits = -(features * params.transpose());
  Vector out(logits.rows());
  for (Index i = 0; i < logits.rows(); ++i) out(i) = detail::log_sum_exp(logits.row(i));
  return out;
}

ExpFamilyModel checked(ExpFamilyModel model, const JointDistribution& joint) {
  const double res = model.residual(joint);
  if (!(res < kExactFitTolerance)) {
    throw ExactFitError("exponential form misses the rule by " + std::to_string(res) + " (d = " +
                            std::to_string(model.d()) + ")",
                        res);
  }
  return model;
}

double information_x(const Vector& p_x, const Matrix& encoder, const Vector& marginal) {
  double s = 0.0;
  for (Index x = 0; x < encoder.rows(); ++x) {
    for (Index k = 0; k < encoder.cols(); ++k) {
      const double e = encoder(x, k);
      if (e > 0.0) s += p_x(x) * e * std::log(e / marginal(k));
    }
  }
  return s;
}

}  // namespace

ExpFamilyModel ExpFamilyModel::from_parameters(Matrix features, Matrix params, Vector p_x) {
  if (features.cols() != params.cols()) {
    throw ValidationError("exp_family", "features have " + std::to_string(features.cols()) +
                                            " columns but params have " + std::to_string(params.cols()));
  }
  if (features.rows() == 0) throw ValidationError("exp_family.features", "needs at least one x");
  if (params.rows() == 0) throw ValidationError("exp_family.params", "needs at least one y");
  if (!features.allFinite()) throw ValidationError("exp_family.features", "non-finite entry");
  if (!params.allFinite()) throw ValidationError("exp_family.params", "non-finite entry");
  if (p_x.size() != features.rows()) {
    throw ValidationError("exp_family.p_x", "length " + std::to_string(p_x.size()) + " does not match n_x = " +
                                                std::to_string(features.rows()));
  }
  if ((p_x.array() <= 0.0).any() || !p_x.allFinite()) {
    throw ValidationError("exp_family.p_x", "entries must be positive");
  }
  if (std::abs(p_x.sum() - 1.0) > 1e-6) throw ValidationError("exp_family.p_x", "does not sum to 1");
  ExpFamilyModel m;
  m.normalizers_ = log_normalizers(features, params);
  m.features_ = std::move(features);
  m.params_ = std::move(params);
  m.p_x_ = p_x / p_x.sum();
  return m;
}

Matrix ExpFamilyModel::reconstruct() const {
  Matrix logp = -(features_ * params_.transpose());
  logp.colwise() -= normalizers_;
  return logp.array().exp();
}

JointDistribution ExpFamilyModel::to_joint() const {
  Matrix rows = reconstruct();
  for (Index x = 0; x < rows.rows(); ++x) rows.row(x) /= rows.row(x).sum();
  return JointDistribution::from_conditional(p_x_, rows);
}

double ExpFamilyModel::residual(const JointDistribution& joint) const {
  if (joint.n_x() != n_x() || joint.n_y() != n_y()) {
    throw DimensionMismatch("model is " + std::to_string(n_x()) + "x" + std::to_string(n_y()) + ", rule is " +
                            std::to_string(joint.n_x()) + "x" + std::to_string(joint.n_y()));
  }
  return (reconstruct() - joint.p_y_given_x()).cwiseAbs().maxCoeff();
}

ExpFamilyModel from_conditional(const JointDistribution& joint, std::optional<Index> d) {
  const Matrix& lp = joint.log_p_y_given_x();
  if (!d && joint.n_y() == 2) {
    Matrix features(joint.n_x(), 1);
    features.col(0) = -(lp.col(1) - lp.col(0));
    Matrix params(2, 1);
    params << 0.0, 1.0;
    return checked(ExpFamilyModel::from_parameters(std::move(features), std::move(params), joint.p_x()), joint);
  }
  const Index rank = d.value_or(joint.n_y() - 1);
  if (rank < 0) throw ValidationError("d", "must be >= 0");
  Matrix centred = lp;
  centred.colwise() -= lp.rowwise().mean();
  Matrix features(joint.n_x(), rank);
  Matrix params(joint.n_y(), rank);
  if (rank > 0) {
    Eigen::JacobiSVD<Matrix> svd(centred, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Index avail = svd.singularValues().size();
    features.setZero();
    params.setZero();
    const Index use = std::min(rank, avail);
    features.leftCols(use) = svd.matrixU().leftCols(use) * svd.singularValues().head(use).asDiagonal();
    params.leftCols(use) = -svd.matrixV().leftCols(use);
  }
  return checked(ExpFamilyModel::from_parameters(std::move(features), std::move(params), joint.p_x()), joint);
}

ExpFamilyModel from_conditional(const JointDistribution& joint, const Matrix& features, const Matrix& params) {
  return checked(ExpFamilyModel::from_parameters(features, params, joint.p_x()), joint);
}

ExpState exp_state(const ExpFamilyModel& model, double beta, const Matrix& encoder) {
  if (encoder.rows() != model.n_x()) {
    throw DimensionMismatch("encoder has " + std::to_string(encoder.rows()) + " rows, n_x = " +
                            std::to_string(model.n_x()));
  }
  ExpState s;
  s.beta = beta;
  s.encoder = encoder;
  s.marginal = encoder.transpose() * model.p_x();
  const Index k = encoder.cols();
  // p(x|xhat), falling back to p(x) for frozen clusters
  Matrix inverse(k, model.n_x());
  for (Index j = 0; j < k; ++j) {
    if (s.marginal(j) >= kDeadClusterMass) {
      inverse.row(j) = encoder.col(j).cwiseProduct(model.p_x()).transpose() / s.marginal(j);
    } else {
      inverse.row(j) = model.p_x().transpose();
    }
  }
  s.cluster_features = inverse * model.features();
  s.cluster_normalizers = log_normalizers(s.cluster_features, model.params());
  s.cluster_params = exp_decoder(s, model).rows() * model.params();
  return s;
}

ConditionalDistribution exp_decoder(const ExpState& state, const ExpFamilyModel& model) {
  Matrix logp = -(state.cluster_features * model.params().transpose());
  logp.colwise() -= state.cluster_normalizers;
  Matrix dec = logp.array().exp();
  for (Index k = 0; k < dec.rows(); ++k) dec.row(k) /= dec.row(k).sum();
  return {std::move(dec), Variable::Xhat, Variable::Y};
}

ExpEncoderUpdate exp_encoder(const ExpState& state, const ExpFamilyModel& model) {
  const Index k = state.clusters();
  const Matrix& a = model.features();
  // beta * lambda_beta(xhat) . A_beta(xhat), one scalar per cluster
  const Vector centre = (state.cluster_params.cwiseProduct(state.cluster_features)).rowwise().sum();
  Eigen::RowVectorXd base(k);
  for (Index j = 0; j < k; ++j) {
    base(j) = (state.marginal(j) > 0.0 ? std::log(state.marginal(j)) : -std::numeric_limits<double>::infinity()) +
              state.beta * state.cluster_normalizers(j) + state.beta * centre(j);
  }
  const Matrix proj = a * state.cluster_params.transpose();  // (x, xhat): sum_r lambda_beta A_r(x)
  Matrix enc(a.rows(), k);
  Vector log_z(a.rows());
  for (Index x = 0; x < a.rows(); ++x) {
    Eigen::RowVectorXd logits = base - state.beta * proj.row(x);
    const double lse = detail::log_sum_exp(logits);
    if (!std::isfinite(lse)) throw std::runtime_error("exp_encoder: degenerate row " + std::to_string(x));
    log_z(x) = lse;
    enc.row(x) = (logits.array() - lse).exp();
    enc.row(x) /= enc.row(x).sum();
  }
  return {ConditionalDistribution(std::move(enc), Variable::X, Variable::Xhat), std::move(log_z)};
}

namespace {

double exp_functional(const ExpState& s, const ExpFamilyModel& model) {
  const Matrix proj = model.features() * s.cluster_params.transpose();
  const Vector centre = (s.cluster_params.cwiseProduct(s.cluster_features)).rowwise().sum();
  double expected = 0.0;
  for (Index x = 0; x < s.encoder.rows(); ++x) {
    for (Index j = 0; j < s.encoder.cols(); ++j) {
      const double e = s.encoder(x, j);
      if (e <= 0.0) continue;
      const double dist = model.normalizers()(x) - s.cluster_normalizers(j) + proj(x, j) - centre(j);
      expected += model.p_x()(x) * e * dist;
    }
  }
  return information_x(model.p_x(), s.encoder, s.marginal) + s.beta * expected;
}

}  // namespace

ExpSolveReport exp_solve(const ExpFamilyModel& model, double beta, const Matrix& init_encoder,
                         const SolveOptions& options) {
  if (!(options.tol > 0.0)) throw ValidationError("tol", "must be positive");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ValidationError("beta", "must be finite and >= 0");
  ExpSolveReport report;
  // Only d-dimensional aggregates are touched inside the loop.
  ExpState state = exp_state(model, beta, ConditionalDistribution(init_encoder, Variable::X, Variable::Xhat).rows());
  if (options.record_trace) report.functional_trace.push_back(exp_functional(state, model));
  for (std::size_t it = 0; it < options.max_iter; ++it) {
    ExpEncoderUpdate upd = exp_encoder(state, model);
    const double change = (upd.encoder.rows() - state.encoder).cwiseAbs().maxCoeff();
    state = exp_state(model, beta, upd.encoder.rows());
    report.iterations = it + 1;
    if (options.record_trace) report.functional_trace.push_back(exp_functional(state, model));
    if (change < options.tol) {
      report.converged = true;
      break;
    }
  }
  report.i_x = information_x(model.p_x(), state.encoder, state.marginal);
  const JointDistribution joint = model.to_joint();
  report.i_y = label_information(joint, state.encoder);
  report.state = std::move(state);
  return report;
}

ExpInformation exp_information(const ExpState& state, const ExpFamilyModel& model) {
  ExpInformation info;
  const ExpEncoderUpdate upd = exp_encoder(state, model);
  const Vector& m = state.marginal;
  info.i_x_closed = state.beta * m.dot(state.cluster_normalizers) - model.p_x().dot(upd.log_partition);
  info.i_x_direct = information_x(model.p_x(), state.encoder, m);

  const JointDistribution joint = model.to_joint();
  const Vector log_py = joint.p_y().array().log();
  const Matrix dec = exp_decoder(state, model).rows();
  const Eigen::RowVectorXd pbar = m.transpose() * dec;
  const Vector centre = (state.cluster_params.cwiseProduct(state.cluster_features)).rowwise().sum();
  info.i_dec_closed = -pbar.dot(log_py) - m.dot(centre + state.cluster_normalizers);
  double direct = 0.0;
  for (Index k = 0; k < dec.rows(); ++k) {
    for (Index y = 0; y < dec.cols(); ++y) {
      if (m(k) > 0.0 && dec(k, y) > 0.0) direct += m(k) * dec(k, y) * (std::log(dec(k, y)) - log_py(y));
    }
  }
  info.i_dec_direct = direct;
  return info;
}

}  // namespace bottleneck
