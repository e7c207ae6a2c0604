#include "bottleneck/ib_solver.hpp"

#include "alternating.hpp"
#include "bottleneck/errors.hpp"

#include <cmath>
#include <random>
#include <string>

namespace bottleneck {

std::string_view to_string(Framework f) { return f == Framework::IB ? "ib" : "dual"; }

Framework parse_framework(std::string_view name) {
  if (name == "ib") return Framework::IB;
  if (name == "dual" || name == "dualib") return Framework::DualIB;
  throw ValidationError("framework", "unknown framework '" + std::string(name) + "'");
}

Index BottleneckState::live_clusters() const {
  Index n = 0;
  for (Index k = 0; k < marginal.size(); ++k) n += is_live(k) ? 1 : 0;
  return n;
}

ConditionalDistribution BottleneckState::inverse_encoder(const JointDistribution& joint) const {
  const Index k = clusters();
  Matrix inv(k, joint.n_x());
  for (Index j = 0; j < k; ++j) {
    inv.row(j) = encoder.rows().col(j).cwiseProduct(joint.p_x()).transpose();
    const double s = inv.row(j).sum();
    if (s > 0.0) {
      inv.row(j) /= s;
    } else {
      inv.row(j) = joint.p_x().transpose();
    }
  }
  return {std::move(inv), Variable::Xhat, Variable::X};
}

BottleneckState make_state(const JointDistribution& joint, Framework framework, double beta,
                           const Matrix& encoder, const Matrix* frozen_decoder) {
  ConditionalDistribution enc(encoder, Variable::X, Variable::Xhat);
  if (enc.conditions() != joint.n_x()) {
    throw DimensionMismatch("encoder has " + std::to_string(enc.conditions()) + " rows, n_x = " +
                            std::to_string(joint.n_x()));
  }
  Vector marginal = encoder.transpose() * joint.p_x();
  BottleneckState state{framework, beta, enc, marginal,
                        ConditionalDistribution(Matrix::Constant(encoder.cols(), joint.n_y(),
                                                                 1.0 / static_cast<double>(joint.n_y())),
                                                Variable::Xhat, Variable::Y)};
  Matrix dec = detail::framework_decoder(joint, framework, state.inverse_encoder(joint));
  if (frozen_decoder != nullptr && frozen_decoder->rows() == dec.rows() &&
      frozen_decoder->cols() == dec.cols()) {
    for (Index k = 0; k < dec.rows(); ++k) {
      if (!state.is_live(k)) dec.row(k) = frozen_decoder->row(k);
    }
  }
  state.decoder = ConditionalDistribution(std::move(dec), Variable::Xhat, Variable::Y);
  return state;
}

BottleneckState random_state(const JointDistribution& joint, Framework framework, double beta,
                             Index n_clusters, std::uint64_t seed) {
  if (n_clusters < 1) throw ValidationError("clusters", "must be at least 1");
  std::mt19937_64 rng(seed);
  Matrix enc(joint.n_x(), n_clusters);
  for (Index x = 0; x < enc.rows(); ++x) {
    for (Index k = 0; k < n_clusters; ++k) {
      // Dirichlet(1) = normalized unit exponentials; u in (0, 1].
      const double u = (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
      enc(x, k) = -std::log(u);
    }
    enc.row(x) /= enc.row(x).sum();
  }
  return make_state(joint, framework, beta, enc);
}

double compression_information(const JointDistribution& joint, const Matrix& encoder) {
  const Vector m = encoder.transpose() * joint.p_x();
  double mi = 0.0;
  for (Index x = 0; x < encoder.rows(); ++x) {
    for (Index k = 0; k < encoder.cols(); ++k) {
      const double e = encoder(x, k);
      if (e > 0.0) mi += joint.p_x()(x) * e * std::log(e / m(k));
    }
  }
  return mi < 0.0 && mi > -1e-15 ? 0.0 : mi;
}

double label_information(const JointDistribution& joint, const Matrix& encoder) {
  const Matrix p_xhat_y = encoder.transpose() * joint.joint();
  return mutual_information(p_xhat_y / p_xhat_y.sum());
}

double ib_distortion(const BottleneckState& state, const JointDistribution& joint, Index x, Index xhat) {
  return kl_divergence(joint.p_y_given_x().row(x).transpose(), state.decoder.rows().row(xhat).transpose());
}

double expected_ib_distortion(const BottleneckState& state, const JointDistribution& joint) {
  const Matrix d = detail::ib_distortions(joint, state.decoder.rows());
  const Matrix p_x_xhat = joint.p_x().asDiagonal() * state.encoder.rows();
  return (p_x_xhat.array() * d.array()).sum();
}

double ib_functional(const BottleneckState& state, const JointDistribution& joint) {
  return compression_information(joint, state.encoder.rows()) -
         state.beta * label_information(joint, state.encoder.rows());
}

EncoderUpdate ib_encoder_update(const BottleneckState& state, const JointDistribution& joint) {
  return detail::encoder_update(detail::ib_distortions(joint, state.decoder.rows()), state.marginal,
                                state.beta);
}

SolveReport ib_solve(const JointDistribution& joint, double beta, const BottleneckState& init,
                     const SolveOptions& options) {
  return detail::alternate(joint, Framework::IB, beta, init, options);
}

}  // namespace bottleneck
