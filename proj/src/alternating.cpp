#include "alternating.hpp"

#include "bottleneck/dual_solver.hpp"
#include "bottleneck/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace bottleneck::detail {

Matrix ib_distortions(const JointDistribution& joint, const Matrix& decoder) {
  const Matrix& rule = joint.p_y_given_x();
  const Vector neg_entropy = (rule.array() * joint.log_p_y_given_x().array()).rowwise().sum();
  const Matrix log_dec = decoder.array().log();
  Matrix d = -(rule * log_dec.transpose());
  d.colwise() += neg_entropy;
  return d;
}

Matrix dual_distortions(const JointDistribution& joint, const Matrix& decoder) {
  Eigen::RowVectorXd neg_entropy(decoder.rows());
  for (Index k = 0; k < decoder.rows(); ++k) {
    double s = 0.0;
    for (Index y = 0; y < decoder.cols(); ++y) {
      const double r = decoder(k, y);
      if (r > 0.0) s += r * std::log(r);
    }
    neg_entropy(k) = s;
  }
  Matrix d = -(joint.log_p_y_given_x() * decoder.transpose());
  d.rowwise() += neg_entropy;
  return d;
}

Matrix distortions(const JointDistribution& joint, Framework framework, const Matrix& decoder) {
  return framework == Framework::IB ? ib_distortions(joint, decoder) : dual_distortions(joint, decoder);
}

EncoderUpdate encoder_update(const Matrix& distortions, const Vector& marginal, double beta) {
  const Index n_x = distortions.rows();
  const Index k = distortions.cols();
  Eigen::RowVectorXd log_m(k);
  for (Index j = 0; j < k; ++j) {
    log_m(j) = marginal(j) > 0.0 ? std::log(marginal(j)) : -std::numeric_limits<double>::infinity();
  }
  Matrix enc(n_x, k);
  Vector log_z(n_x);
  for (Index x = 0; x < n_x; ++x) {
    Eigen::RowVectorXd logits = log_m - beta * distortions.row(x);
    const double lse = log_sum_exp(logits);
    if (!std::isfinite(lse)) {
      throw std::runtime_error("encoder_update: degenerate row " + std::to_string(x));
    }
    log_z(x) = lse;
    enc.row(x) = (logits.array() - lse).exp();
    enc.row(x) /= enc.row(x).sum();
  }
  return {ConditionalDistribution(std::move(enc), Variable::X, Variable::Xhat), std::move(log_z)};
}

Matrix framework_decoder(const JointDistribution& joint, Framework framework,
                         const ConditionalDistribution& inverse_encoder) {
  if (framework == Framework::IB) return bayes_decoder(joint, inverse_encoder).rows();
  return geometric_decoder(joint, inverse_encoder).decoder.rows();
}

double functional(const BottleneckState& state, const JointDistribution& joint) {
  return state.framework == Framework::IB ? ib_functional(state, joint) : dual_functional(state, joint);
}

SolveReport alternate(const JointDistribution& joint, Framework framework, double beta,
                      const BottleneckState& init, const SolveOptions& options) {
  if (!(options.tol > 0.0)) throw ValidationError("tol", "must be positive");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ValidationError("beta", "must be finite and >= 0");
  if (init.encoder.conditions() != joint.n_x()) {
    throw DimensionMismatch("initial encoder has " + std::to_string(init.encoder.conditions()) +
                            " rows, problem has n_x = " + std::to_string(joint.n_x()));
  }

  // Re-derive marginal/decoder so the first step starts from a consistent point.
  BottleneckState state =
      make_state(joint, framework, beta, init.encoder.rows(), &init.decoder.rows());

  SolveReport report{state, 0, false, {}, 0.0, 0.0};
  if (options.record_trace) report.functional_trace.push_back(functional(state, joint));

  for (std::size_t it = 0; it < options.max_iter; ++it) {
    const Matrix d = distortions(joint, framework, state.decoder.rows());
    EncoderUpdate upd = encoder_update(d, state.marginal, beta);
    const double change = (upd.encoder.rows() - state.encoder.rows()).cwiseAbs().maxCoeff();
    state = make_state(joint, framework, beta, upd.encoder.rows(), &state.decoder.rows());
    report.iterations = it + 1;
    if (options.record_trace) report.functional_trace.push_back(functional(state, joint));
#ifndef NDEBUG
    if (framework == Framework::DualIB && report.iterations % 100 == 0) dual_decomposition(state, joint);
#endif
    if (change < options.tol) {
      report.converged = true;
      break;
    }
  }

  if (framework == Framework::DualIB && report.converged) dual_decomposition(state, joint);
  report.i_x = compression_information(joint, state.encoder.rows());
  report.i_y = label_information(joint, state.encoder.rows());
  report.state = std::move(state);
  return report;
}

}  // namespace bottleneck::detail
