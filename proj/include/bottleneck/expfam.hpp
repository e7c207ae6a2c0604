#pragma once

// Rules of exponential form p(y|x) = exp(-sum_r lambda^r(y) A_r(x) - lambda0_x)
// and the dualIB solved on the d feature expectations alone.

#include "bottleneck/ib_solver.hpp"

#include <optional>
#include <vector>

namespace bottleneck {

class ExpFamilyModel {
 public:
  // Explicit model. features: n_x x d, params: n_y x d. p_x is renormalized
  // (it must sum to 1 within 1e-6) and must be positive.
  static ExpFamilyModel from_parameters(Matrix features, Matrix params, Vector p_x);

  Index n_x() const noexcept { return features_.rows(); }
  Index n_y() const noexcept { return params_.rows(); }
  Index d() const noexcept { return features_.cols(); }

  const Matrix& features() const noexcept { return features_; }      // A_r(x)
  const Matrix& params() const noexcept { return params_; }          // lambda^r(y)
  const Vector& normalizers() const noexcept { return normalizers_; } // lambda0_x
  const Vector& p_x() const noexcept { return p_x_; }

  // p(y|x) rebuilt from the parameters, (x, y).
  Matrix reconstruct() const;
  // The full-table problem this model describes (no smoothing applied).
  JointDistribution to_joint() const;
  // max |reconstruct() - p(y|x)| over the table.
  double residual(const JointDistribution& joint) const;

 private:
  ExpFamilyModel() = default;

  Matrix features_;
  Matrix params_;
  Vector normalizers_;
  Vector p_x_;
};

inline constexpr double kExactFitTolerance = 1e-10;

// Binary rules with d unset: the logistic form A_1(x) = -log(p(y1|x)/p(y0|x)),
// lambda^1(y0) = 0, lambda^1(y1) = 1. Otherwise a rank-d fit of the
// row-centred log table; d = 0 only represents the uniform rule.
// Throws ExactFitError when the reconstruction misses by kExactFitTolerance
// or more.
ExpFamilyModel from_conditional(const JointDistribution& joint, std::optional<Index> d = std::nullopt);

// Explicit features and params checked against a given rule.
ExpFamilyModel from_conditional(const JointDistribution& joint, const Matrix& features, const Matrix& params);

struct ExpState {
  double beta = 0.0;
  Vector marginal;              // p(xhat)
  Matrix cluster_features;      // A_{r,beta}(xhat), k x d
  Matrix cluster_params;        // lambda^r_beta(xhat), k x d
  Vector cluster_normalizers;   // lambda0_beta(xhat)
  Matrix encoder;               // p(xhat|x), n_x x k

  Index clusters() const noexcept { return encoder.cols(); }
};

// Aggregates for an encoder: marginal, A_{r,beta}, lambda0_beta and
// lambda^r_beta, the last taken under the exponential-form decoder.
ExpState exp_state(const ExpFamilyModel& model, double beta, const Matrix& encoder);

ConditionalDistribution exp_decoder(const ExpState& state, const ExpFamilyModel& model);

struct ExpEncoderUpdate {
  ConditionalDistribution encoder;
  Vector log_partition;
};
// Uses only A_r(x) and the cluster aggregates.
ExpEncoderUpdate exp_encoder(const ExpState& state, const ExpFamilyModel& model);

struct ExpSolveReport {
  ExpState state;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> functional_trace;  // I_x + beta E[d_dual] per iteration
  double i_x = 0.0;
  double i_y = 0.0;  // I(Y;Xhat) through the rebuilt table, after the loop
};

ExpSolveReport exp_solve(const ExpFamilyModel& model, double beta, const Matrix& init_encoder,
                         const SolveOptions& options = {});

// Information in closed form from the aggregates next to the same quantities
// summed over the assembled distributions.
//   I(X;Xhat)  = beta E_{p(xhat)}[lambda0_beta] - E_{p(x)}[log Z_{xhat|x}]
//   I_dec      = sum p(xhat) p(y|xhat) log(p(y|xhat) / p(y))
//              = -sum_y pbar(y) log p(y) - E_{p(xhat)}[sum_r lambda^r_beta A_{r,beta} + lambda0_beta]
// with pbar(y) = sum_xhat p(xhat) p(y|xhat). I_dec equals I(Y;Xhat) only when
// the decoder is the Bayes mixture; for the geometric decoder it is the
// decoder-side information.
// log Z_{xhat|x} comes from one encoder update on the state's aggregates, so
// the I(X;Xhat) pair agrees only at a fixed point.
struct ExpInformation {
  double i_x_closed = 0.0;
  double i_x_direct = 0.0;
  double i_dec_closed = 0.0;
  double i_dec_direct = 0.0;
};
ExpInformation exp_information(const ExpState& state, const ExpFamilyModel& model);

}  // namespace bottleneck
