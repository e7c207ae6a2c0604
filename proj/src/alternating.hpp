#pragma once

// Shared Blahut-Arimoto machinery for both frameworks.

#include "bottleneck/ib_solver.hpp"

namespace bottleneck::detail {

// (x, xhat) -> D[p(y|x) || p(y|xhat)]
Matrix ib_distortions(const JointDistribution& joint, const Matrix& decoder);
// (x, xhat) -> D[p(y|xhat) || p(y|x)]
Matrix dual_distortions(const JointDistribution& joint, const Matrix& decoder);

Matrix distortions(const JointDistribution& joint, Framework framework, const Matrix& decoder);

// p(xhat|x) ∝ p(xhat) exp(-beta d(x, xhat)) with a max-shifted softmax per row.
EncoderUpdate encoder_update(const Matrix& distortions, const Vector& marginal, double beta);

Matrix framework_decoder(const JointDistribution& joint, Framework framework,
                         const ConditionalDistribution& inverse_encoder);

double functional(const BottleneckState& state, const JointDistribution& joint);

SolveReport alternate(const JointDistribution& joint, Framework framework, double beta,
                      const BottleneckState& init, const SolveOptions& options);

}  // namespace bottleneck::detail
