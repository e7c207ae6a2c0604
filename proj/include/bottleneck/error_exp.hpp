#pragma once

// Multi-class prediction with a trained bottleneck and the Chernoff
// quantities behind its error exponent.

#include "bottleneck/anneal.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace bottleneck {

// M classes over n_x inputs: row i of class_conditionals is p(x|y_i).
class ClassificationProblem {
 public:
  // Rows must sum to 1 within 1e-6 and are renormalized. Rows with a zero
  // are smoothed like rule rows; without a smoothing epsilon a zero is a
  // ValidationError. The prior defaults to uniform.
  static ClassificationProblem create(Matrix class_conditionals, std::optional<Vector> prior = std::nullopt,
                                      std::optional<double> smoothing = kDefaultSmoothing);

  Index classes() const noexcept { return conditionals_.rows(); }
  Index n_x() const noexcept { return conditionals_.cols(); }
  const Matrix& class_conditionals() const noexcept { return conditionals_; }
  const Vector& prior() const noexcept { return prior_; }

  // p(x, y_i) = p(y_i) p_i(x), laid out (x, y).
  JointDistribution joint() const;

 private:
  ClassificationProblem() = default;

  Matrix conditionals_;
  Vector prior_;
};

// Class conditionals drawn from a symmetric Dirichlet(1) over n_x inputs,
// uniform prior; deterministic in `seed`.
ClassificationProblem dirichlet_classes(Index classes, Index n_x, std::uint64_t seed);

struct ChernoffResult {
  double exponent = 0.0;     // -min_lambda log sum_x p0^lambda p1^(1-lambda) >= 0
  double lambda_star = 0.5;
};

// Golden-section search over lambda in (0, 1) down to `tol`. Identical
// inputs give exponent 0 with lambda_star = 0.5.
ChernoffResult chernoff_information(const Vector& p0, const Vector& p1, double tol = 1e-10);

// p_lambda(x) ∝ p0^lambda p1^(1-lambda).
Vector geometric_interpolation(const Vector& p0, const Vector& p1, double lambda);

struct ExponentBound {
  double bound = 0.0;            // E_{p(xhat) p(y|xhat)} D[p(x|xhat) || p(x|y)]
  double rate_distortion = 0.0;  // I(X;Xhat) + E[d_dual]
  double dual_functional = 0.0;  // I(X;Xhat) + beta E[d_dual]
};

// Evaluates the bound at `state`. It never exceeds rate_distortion (a
// std::logic_error is thrown past 1e-9); it stays below dual_functional
// whenever beta >= 1.
ExponentBound mean_exponent_bound(const BottleneckState& state, const JointDistribution& joint);

struct ErrorCurve {
  Framework framework = Framework::IB;
  double beta = 0.0;
  std::vector<std::size_t> n_values;
  std::vector<double> p_err;
  std::vector<double> ci_halfwidth;  // 1.96 sqrt(p (1 - p) / trials)
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::size_t clusters = 0;  // live clusters of the trained encoder
};

struct ExperimentConfig {
  std::vector<Framework> frameworks{Framework::IB, Framework::DualIB};
  std::vector<double> betas{2.0, 4.0, 8.0, 16.0, 32.0, 64.0};
  std::vector<std::size_t> n_values{1, 2, 4, 8, 16, 32, 64, 128, 256};
  std::size_t trials = 10000;
  std::uint64_t seed = 0;
  // Training anneals over this grid merged with `betas`.
  GridSpec training_grid{0.25, 64.0, 161, Spacing::Log};
  SplitConfig split{};
  SolveOptions options{1e-10, 200000, false};
};

struct TrainedEncoder {
  Framework framework;
  double beta;
  BottleneckState state;
  bool converged;
};

struct ExperimentResult {
  std::vector<ErrorCurve> curves;       // framework-major, then beta in config order
  std::vector<TrainedEncoder> encoders; // same order
};

// Per trial t a generator seeded from (seed, t) draws the class and then
// max(n_values) inputs once; every n uses a prefix of that stream and every
// framework and beta sees the same streams. A test sample is assigned to
// argmin_i D[phat(xhat) || p(xhat|y_i)] with ties to the lowest index and
// infinite divergences excluded.
ExperimentResult run_prediction_experiment(const ClassificationProblem& problem, const ExperimentConfig& config);

// Columns: framework, beta, n, p_err, ci_halfwidth, trials, seed.
void write_error_csv(const std::vector<ErrorCurve>& curves, const std::filesystem::path& path);

}  // namespace bottleneck
