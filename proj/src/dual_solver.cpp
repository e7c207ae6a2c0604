#include "bottleneck/dual_solver.hpp"

#include "alternating.hpp"
#include "bottleneck/errors.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace bottleneck {

double dual_distortion(const BottleneckState& state, const JointDistribution& joint, Index x, Index xhat) {
  return kl_divergence(state.decoder.rows().row(xhat).transpose(), joint.p_y_given_x().row(x).transpose());
}

double expected_dual_distortion(const BottleneckState& state, const JointDistribution& joint) {
  const Matrix d = detail::dual_distortions(joint, state.decoder.rows());
  const Matrix p_x_xhat = joint.p_x().asDiagonal() * state.encoder.rows();
  return (p_x_xhat.array() * d.array()).sum();
}

double dual_functional(const BottleneckState& state, const JointDistribution& joint) {
  return compression_information(joint, state.encoder.rows()) +
         state.beta * expected_dual_distortion(state, joint);
}

EncoderUpdate dual_encoder_update(const BottleneckState& state, const JointDistribution& joint) {
  return detail::encoder_update(detail::dual_distortions(joint, state.decoder.rows()), state.marginal,
                                state.beta);
}

SolveReport dual_solve(const JointDistribution& joint, double beta, const BottleneckState& init,
                       const SolveOptions& options) {
  return detail::alternate(joint, Framework::DualIB, beta, init, options);
}

Vector decoder_log_partition(const BottleneckState& state, const JointDistribution& joint) {
  return geometric_decoder(joint, state.inverse_encoder(joint)).log_partition;
}

DualDecomposition dual_decomposition(const BottleneckState& state, const JointDistribution& joint) {
  const Matrix& dec = state.decoder.rows();        // p(yhat|xhat)
  const Matrix& enc = state.encoder.rows();        // p(xhat|x)
  const Matrix& rule = joint.p_y_given_x();        // p(y|x)
  const Vector& px = joint.p_x();
  const Vector& m = state.marginal;

  const Matrix yhat_given_x = enc * dec;           // p(yhat|x)
  const Matrix p_xhat_yhat = m.asDiagonal() * dec;
  const Matrix p_x_yhat = px.asDiagonal() * yhat_given_x;

  const double term_a = mutual_information(p_xhat_yhat / p_xhat_yhat.sum()) -
                        mutual_information(p_x_yhat / p_x_yhat.sum());
  double term_b = 0.0;
  for (Index x = 0; x < rule.rows(); ++x) {
    term_b += px(x) * kl_divergence(yhat_given_x.row(x).transpose() / yhat_given_x.row(x).sum(),
                                    rule.row(x).transpose());
  }
  const double expected = expected_dual_distortion(state, joint);
  if (std::abs(expected - (term_a + term_b)) > 1e-9) {
    throw std::logic_error("dual_decomposition: E[d_dual] = " + std::to_string(expected) +
                           " but term_a + term_b = " + std::to_string(term_a + term_b));
  }
  return {term_a, term_b, expected};
}

}  // namespace bottleneck
