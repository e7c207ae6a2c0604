#include "bottleneck/critical.hpp"

#include "bottleneck/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>

namespace bottleneck {
namespace {

struct ClusterView {
  Eigen::RowVectorXd q;  // p(x|xhat)
  Eigen::RowVectorXd r;  // p(y|xhat)
};

std::optional<ClusterView> cluster_view(const BottleneckState& state, const JointDistribution& joint,
                                        Index cluster) {
  if (cluster < 0 || cluster >= state.clusters()) {
    throw DimensionMismatch("cluster index " + std::to_string(cluster) + " out of range");
  }
  if (!state.is_live(cluster)) return std::nullopt;
  Eigen::RowVectorXd q = state.encoder.rows().col(cluster).cwiseProduct(joint.p_x()).transpose();
  q /= q.sum();
  Eigen::RowVectorXd r = state.decoder.rows().row(cluster);
  if ((r.array() <= 0.0).any()) return std::nullopt;
  return ClusterView{std::move(q), std::move(r)};
}

StabilityMatrices assemble(const BottleneckState& state, Index cluster, const StabilityFactors& f) {
  return {state.framework, cluster, state.beta, f.a * f.b, f.b * f.a};
}

}  // namespace

std::optional<StabilityFactors> ib_factors(const BottleneckState& state, const JointDistribution& joint,
                                           Index cluster) {
  const auto view = cluster_view(state, joint, cluster);
  if (!view) return std::nullopt;
  const Matrix& p = joint.p_y_given_x();
  Matrix b(p.cols(), p.rows());
  for (Index y = 0; y < p.cols(); ++y) {
    for (Index x = 0; x < p.rows(); ++x) b(y, x) = view->q(x) * (p(x, y) / view->r(y) - 1.0);
  }
  return StabilityFactors{p, std::move(b)};
}

std::optional<StabilityFactors> dual_factors(const BottleneckState& state, const JointDistribution& joint,
                                             Index cluster) {
  const auto view = cluster_view(state, joint, cluster);
  if (!view) return std::nullopt;
  const Matrix& lp = joint.log_p_y_given_x();
  const Eigen::RowVectorXd mean_over_x = view->q * lp;             // sum_x~ q(x~) log p(y|x~)
  const Vector mean_over_y = lp * view->r.transpose();             // sum_y~ r(y~) log p(y~|x)
  Matrix a(lp.rows(), lp.cols());
  Matrix b(lp.cols(), lp.rows());
  for (Index x = 0; x < lp.rows(); ++x) {
    for (Index y = 0; y < lp.cols(); ++y) {
      a(x, y) = view->r(y) * (lp(x, y) - mean_over_x(y));
      b(y, x) = view->q(x) * (lp(x, y) - mean_over_y(x));
    }
  }
  return StabilityFactors{std::move(a), std::move(b)};
}

std::optional<StabilityMatrices> build_ib_matrices(const BottleneckState& state, const JointDistribution& joint,
                                                   Index cluster) {
  const auto f = ib_factors(state, joint, cluster);
  if (!f) return std::nullopt;
  return assemble(state, cluster, *f);
}

std::optional<StabilityMatrices> ib_raw_matrices(const BottleneckState& state, const JointDistribution& joint,
                                                 Index cluster) {
  const auto view = cluster_view(state, joint, cluster);
  if (!view) return std::nullopt;
  const Matrix& p = joint.p_y_given_x();
  Matrix b(p.cols(), p.rows());
  for (Index y = 0; y < p.cols(); ++y) {
    for (Index x = 0; x < p.rows(); ++x) b(y, x) = view->q(x) * p(x, y) / view->r(y);
  }
  return assemble(state, cluster, StabilityFactors{p, std::move(b)});
}

std::optional<StabilityMatrices> build_dual_matrices(const BottleneckState& state, const JointDistribution& joint,
                                                     Index cluster) {
  const auto f = dual_factors(state, joint, cluster);
  if (!f) return std::nullopt;
  return assemble(state, cluster, *f);
}

std::optional<StabilityMatrices> build_dual_matrices_binary(const BottleneckState& state,
                                                            const JointDistribution& joint, Index cluster) {
  if (joint.n_y() != 2) throw DimensionMismatch("binary stability form needs n_y = 2");
  const auto view = cluster_view(state, joint, cluster);
  if (!view) return std::nullopt;
  const Matrix& p = joint.p_y_given_x();
  const Matrix& lp = joint.log_p_y_given_x();
  const Eigen::RowVectorXd mean_over_x = view->q * lp;
  Matrix a(p.rows(), 2);
  Matrix b(2, p.rows());
  for (Index x = 0; x < p.rows(); ++x) {
    for (Index y = 0; y < 2; ++y) {
      a(x, y) = view->r(y) * (lp(x, y) - mean_over_x(y));
      b(y, x) = view->q(x) * (1.0 - view->r(y)) * std::log(p(x, y) / (1.0 - p(x, y)));
    }
  }
  return assemble(state, cluster, StabilityFactors{std::move(a), std::move(b)});
}

std::optional<StabilityMatrices> build_matrices(const BottleneckState& state, const JointDistribution& joint,
                                                Index cluster) {
  return state.framework == Framework::IB ? build_ib_matrices(state, joint, cluster)
                                          : build_dual_matrices(state, joint, cluster);
}

std::optional<double> binary_dual_lambda2(const BottleneckState& state, const JointDistribution& joint,
                                          Index cluster) {
  if (joint.n_y() != 2) throw DimensionMismatch("binary trace formula needs n_y = 2");
  const auto view = cluster_view(state, joint, cluster);
  if (!view) return std::nullopt;
  const Matrix& lp = joint.log_p_y_given_x();
  double s = 0.0;
  for (Index x = 0; x < lp.rows(); ++x) {
    const double odds = lp(x, 0) - lp(x, 1);
    for (Index xt = 0; xt < lp.rows(); ++xt) {
      s += view->q(x) * view->q(xt) * odds * ((lp(x, 0) - lp(xt, 0)) - (lp(x, 1) - lp(xt, 1)));
    }
  }
  return view->r(0) * view->r(1) * s;
}

Spectrum spectrum(const Matrix& c) {
  Spectrum out;
  if (c.rows() == 0) return out;
  Eigen::EigenSolver<Matrix> solver(c, false);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigenvalue solver failed");
  const auto& ev = solver.eigenvalues();
  out.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  Index smallest = 0;
  for (Index i = 0; i < ev.size(); ++i) {
    out.max_imag = std::max(out.max_imag, std::abs(ev(i).imag()));
    if (std::abs(ev(i)) < std::abs(ev(smallest))) smallest = i;
  }
  out.lambda1 = ev(smallest).real();
  bool have = false;
  Index leading = 0;
  for (Index i = 0; i < ev.size(); ++i) {
    if (i == smallest) continue;
    if (!have || ev(i).real() > ev(leading).real()) {
      leading = i;
      have = true;
    }
  }
  if (have) {
    out.lambda2 = ev(leading).real();
    if (std::abs(ev(leading).imag()) > 1e-8) {
      static std::atomic<bool> warned{false};
      if (!warned.exchange(true)) {
        std::cerr << "warning: complex leading stability eigenvalue (imag " << ev(leading).imag()
                  << "); using its real part\n";
      }
    }
  }
  return out;
}

std::optional<double> second_eigenvalue(const BottleneckState& state, const JointDistribution& joint,
                                        Index cluster) {
  const auto m = build_matrices(state, joint, cluster);
  if (!m) return std::nullopt;
  return spectrum(m->c_yy).lambda2;
}

namespace {

double g_value(const BottleneckState& state, const JointDistribution& joint, Index cluster) {
  const auto l2 = second_eigenvalue(state, joint, cluster);
  return l2 ? state.beta * *l2 - 1.0 : -1.0;
}

std::size_t nearest_grid_index(const std::vector<double>& grid, double beta) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (std::abs(std::log(grid[i] / beta)) < std::abs(std::log(grid[best] / beta))) best = i;
  }
  return best;
}

CriticalPointReport scan(const JointDistribution& joint, Framework framework,
                         const std::vector<BottleneckState>& states, const std::vector<double>& grid,
                         double refine_tol, const SolveOptions& options) {
  if (!(refine_tol > 0.0)) throw ValidationError("refine_tol", "must be positive");
  CriticalPointReport report;
  report.framework = framework;
  report.grid = grid;
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const BottleneckState& below = states[k];
    const BottleneckState above = solve(joint, framework, grid[k + 1], below, options).state;
    for (Index j = 0; j < below.clusters(); ++j) {
      if (!below.is_live(j) || !above.is_live(j)) continue;
      if (!(g_value(below, joint, j) < 0.0) || !(g_value(above, joint, j) >= 0.0)) continue;

      double lo = grid[k];
      double hi = grid[k + 1];
      for (int step = 0; step < 40 && hi - lo > refine_tol; ++step) {
        const double mid = 0.5 * (lo + hi);
        const BottleneckState s = solve(joint, framework, mid, below, options).state;
        (g_value(s, joint, j) < 0.0 ? lo : hi) = mid;
      }
      CriticalPoint cp;
      cp.beta_c = 0.5 * (lo + hi);
      const BottleneckState at = solve(joint, framework, cp.beta_c, below, options).state;
      cp.lambda2 = second_eigenvalue(at, joint, j).value_or(0.0);
      cp.cluster = j;
      cp.beta_lo = grid[k];
      cp.beta_hi = grid[k + 1];
      cp.grid_index = nearest_grid_index(grid, cp.beta_c);
      report.points.push_back(cp);
    }
  }
  std::stable_sort(report.points.begin(), report.points.end(),
                   [](const CriticalPoint& a, const CriticalPoint& b) { return a.beta_c < b.beta_c; });
  return report;
}

}  // namespace

CriticalPointReport find_critical_points(const JointDistribution& joint, Framework framework,
                                         const std::vector<double>& grid, double refine_tol,
                                         const SplitConfig& split, const SolveOptions& options) {
  const SweepResult s = sweep(joint, framework, grid, split, options);
  return scan(joint, framework, s.states, grid, refine_tol, options);
}

CriticalPointReport find_critical_points(const JointDistribution& joint, const SweepResult& sweep,
                                         const std::vector<double>& grid, double refine_tol,
                                         const SolveOptions& options) {
  if (sweep.states.size() != grid.size()) {
    throw DimensionMismatch("sweep has " + std::to_string(sweep.states.size()) + " states for " +
                            std::to_string(grid.size()) + " grid points");
  }
  return scan(joint, sweep.trace.framework, sweep.states, grid, refine_tol, options);
}

}  // namespace bottleneck
