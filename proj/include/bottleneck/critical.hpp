#pragma once

// Per-cluster linear stability of IB and dualIB fixed points. A cluster
// becomes unstable (splits) where beta * lambda2 = 1, lambda2 being the
// leading nontrivial eigenvalue of its stability matrix.

#include "bottleneck/anneal.hpp"

#include <complex>
#include <optional>
#include <vector>

namespace bottleneck {

// C_xx = A B and C_yy = B A with A: n_x x n_y and B: n_y x n_x, so the two
// share their nonzero spectrum.
struct StabilityFactors {
  Matrix a;
  Matrix b;
};

struct StabilityMatrices {
  Framework framework;
  Index cluster;
  double beta;
  Matrix c_xx;
  Matrix c_yy;
};

// IB factors with the normalization mode projected out:
//   A_xy = p(y|x),  B_yx = p(x|xhat) (p(y|x) / p(y|xhat) - 1).
// The unprojected matrices (see ib_raw_matrices) are stochastic and carry an
// eigenvalue 1 along the direction that only rescales the whole row; the
// projection moves that eigenvalue to 0 and leaves the rest untouched.
std::optional<StabilityFactors> ib_factors(const BottleneckState& state, const JointDistribution& joint,
                                           Index cluster);
// A_xy = p(y|xhat) sum_x~ p(x~|xhat) log(p(y|x) / p(y|x~)),
// B_yx = p(x|xhat) sum_y~ p(y~|xhat) log(p(y|x) / p(y~|x)).
std::optional<StabilityFactors> dual_factors(const BottleneckState& state, const JointDistribution& joint,
                                             Index cluster);

// All builders return nullopt for a frozen cluster (marginal below
// kDeadClusterMass).
std::optional<StabilityMatrices> build_ib_matrices(const BottleneckState& state, const JointDistribution& joint,
                                                   Index cluster);
// C_xx' = sum_y p(y|x) p(x'|xhat) p(y|x') / p(y|xhat) and its y-side twin.
std::optional<StabilityMatrices> ib_raw_matrices(const BottleneckState& state, const JointDistribution& joint,
                                                 Index cluster);
std::optional<StabilityMatrices> build_dual_matrices(const BottleneckState& state, const JointDistribution& joint,
                                                     Index cluster);
// Binary labels only: the log-odds form in which the inner sum over y~
// collapses to (1 - p(y|xhat)) log(p(y|x) / (1 - p(y|x))).
std::optional<StabilityMatrices> build_dual_matrices_binary(const BottleneckState& state,
                                                            const JointDistribution& joint, Index cluster);
// Dispatches on state.framework.
std::optional<StabilityMatrices> build_matrices(const BottleneckState& state, const JointDistribution& joint,
                                                Index cluster);

// Binary labels: lambda2 = p(y0|xhat) p(y1|xhat) sum_{x,x~} p(x|xhat) p(x~|xhat)
//   log(p(y0|x)/p(y1|x)) [log(p(y0|x)/p(y0|x~)) - log(p(y1|x)/p(y1|x~))].
std::optional<double> binary_dual_lambda2(const BottleneckState& state, const JointDistribution& joint,
                                          Index cluster);

struct Spectrum {
  std::vector<std::complex<double>> eigenvalues;
  double lambda1 = 0.0;   // smallest magnitude
  double lambda2 = 0.0;   // largest real part of the rest (0 for a 1x1 matrix)
  double max_imag = 0.0;  // largest |imag| over the spectrum
};

// For matrices larger than 2x2 a complex leading pair (|imag| > 1e-8) is
// reported on stderr once per process and its real part used.
Spectrum spectrum(const Matrix& c);

// lambda2 of the cluster, computed on C_yy.
std::optional<double> second_eigenvalue(const BottleneckState& state, const JointDistribution& joint,
                                        Index cluster);

struct CriticalPoint {
  double beta_c = 0.0;
  Index cluster = 0;      // index in the merged state below the bracket
  double lambda2 = 0.0;   // at beta_c
  double beta_lo = 0.0;   // initial grid bracket
  double beta_hi = 0.0;
  std::size_t grid_index = 0;  // grid point nearest to beta_c
};

struct CriticalPointReport {
  Framework framework = Framework::IB;
  std::vector<CriticalPoint> points;  // ascending beta_c
  std::vector<double> grid;
};

// For every grid interval [b_k, b_k+1] the merged sweep state at b_k is
// re-solved at b_k+1 without splitting. A cluster whose g = beta lambda2 - 1
// goes from negative to nonnegative brackets a root, which is bisected (at
// most 40 steps, down to refine_tol in beta) on solves warm-started from the
// state at b_k.
CriticalPointReport find_critical_points(const JointDistribution& joint, Framework framework,
                                         const std::vector<double>& grid, double refine_tol = 1e-10,
                                         const SplitConfig& split = {},
                                         const SolveOptions& options = {1e-10, 200000, false});
// Same scan over an existing sweep (its states must match `grid`).
CriticalPointReport find_critical_points(const JointDistribution& joint, const SweepResult& sweep,
                                         const std::vector<double>& grid, double refine_tol = 1e-10,
                                         const SolveOptions& options = {1e-10, 200000, false});

}  // namespace bottleneck
