#pragma once

// Fixed-beta dual Information Bottleneck: the encoder uses the reversed
// distortion D[p(y|xhat) || p(y|x)] and the decoder is the encoder-weighted
// geometric mean of the rule rows.

#include "bottleneck/ib_solver.hpp"

namespace bottleneck {

struct DualDecomposition {
  double term_a;               // I(Xhat;Yhat) - I(X;Yhat)
  double term_b;               // E_{p(x)} D[p(yhat|x) || p(y=yhat|x)]
  double expected_distortion;  // E_{p(x,xhat)} d_dual
};

// D[p(y|xhat) || p(y|x)].
double dual_distortion(const BottleneckState& state, const JointDistribution& joint, Index x, Index xhat);
double expected_dual_distortion(const BottleneckState& state, const JointDistribution& joint);
// I(X;Xhat) + beta E[d_dual].
double dual_functional(const BottleneckState& state, const JointDistribution& joint);

EncoderUpdate dual_encoder_update(const BottleneckState& state, const JointDistribution& joint);

SolveReport dual_solve(const JointDistribution& joint, double beta, const BottleneckState& init,
                       const SolveOptions& options = {});

// Splits the expected dual distortion through the prediction variable Yhat,
// whose conditional given xhat is the state's decoder. Throws std::logic_error
// if the two sides disagree by more than 1e-9.
DualDecomposition dual_decomposition(const BottleneckState& state, const JointDistribution& joint);

// log Z_{y|xhat} of the geometric decoder for every cluster.
Vector decoder_log_partition(const BottleneckState& state, const JointDistribution& joint);

}  // namespace bottleneck
