#pragma once

// Fixed-beta Information Bottleneck: the three self-consistent equations
// iterated as a generalized Blahut-Arimoto alternation.

#include "bottleneck/prob_core.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace bottleneck {

enum class Framework { IB, DualIB };

std::string_view to_string(Framework f);
Framework parse_framework(std::string_view name);

// Clusters whose marginal falls below this are frozen: their decoder row
// is kept as is and they are excluded from cluster counts.
inline constexpr double kDeadClusterMass = 1e-12;

struct SolveOptions {
  double tol = 1e-10;
  std::size_t max_iter = 200000;
  bool record_trace = true;
};

// Encoder p(xhat|x), marginal p(xhat) and decoder p(y|xhat) at one beta.
struct BottleneckState {
  Framework framework;
  double beta;
  ConditionalDistribution encoder;  // (x, xhat)
  Vector marginal;                  // p(xhat)
  ConditionalDistribution decoder;  // (xhat, y)

  Index clusters() const noexcept { return encoder.outcomes(); }
  Index live_clusters() const;
  bool is_live(Index xhat) const { return marginal(xhat) >= kDeadClusterMass; }

  // p(x|xhat). Rows of frozen clusters fall back to p(x).
  ConditionalDistribution inverse_encoder(const JointDistribution& joint) const;
};

// Builds a consistent state: marginal and the framework's decoder derived
// from `encoder`. Frozen clusters copy their row from `frozen_decoder` when
// given, else from the freshly computed decoder.
BottleneckState make_state(const JointDistribution& joint, Framework framework, double beta,
                           const Matrix& encoder, const Matrix* frozen_decoder = nullptr);

// Encoder rows drawn from a symmetric Dirichlet(1), deterministic in `seed`.
BottleneckState random_state(const JointDistribution& joint, Framework framework, double beta,
                             Index n_clusters, std::uint64_t seed);

struct SolveReport {
  BottleneckState state;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> functional_trace;
  double i_x = 0.0;  // I(X;Xhat), nats
  double i_y = 0.0;  // I(Y;Xhat) through the Markov chain, nats
};

struct EncoderUpdate {
  ConditionalDistribution encoder;
  Vector log_partition;  // log Z(x; beta) per x
};

// I(X;Xhat) for an encoder under p(x).
double compression_information(const JointDistribution& joint, const Matrix& encoder);
// I(Y;Xhat) = I of the joint p(y, xhat) = sum_x p(x,y) p(xhat|x).
double label_information(const JointDistribution& joint, const Matrix& encoder);

// D[p(y|x) || p(y|xhat)].
double ib_distortion(const BottleneckState& state, const JointDistribution& joint, Index x, Index xhat);
// E_{p(x,xhat)} d_IB.
double expected_ib_distortion(const BottleneckState& state, const JointDistribution& joint);
// I(X;Xhat) - beta I(Y;Xhat).
double ib_functional(const BottleneckState& state, const JointDistribution& joint);

EncoderUpdate ib_encoder_update(const BottleneckState& state, const JointDistribution& joint);

SolveReport ib_solve(const JointDistribution& joint, double beta, const BottleneckState& init,
                     const SolveOptions& options = {});

}  // namespace bottleneck
