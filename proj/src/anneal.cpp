#include "bottleneck/anneal.hpp"

#include "bottleneck/dual_solver.hpp"
#include "bottleneck/errors.hpp"
#include "format.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace bottleneck {
namespace {

double linf(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

std::vector<double> GridSpec::betas() const {
  if (points == 0) throw ValidationError("beta_grid.points", "must be at least 1");
  if (!(beta_max >= beta_min)) throw ValidationError("beta_grid", "beta_max must be >= beta_min");
  if (spacing == Spacing::Log && !(beta_min > 0.0)) {
    throw ValidationError("beta_grid.beta_min", "log spacing needs beta_min > 0");
  }
  if (beta_min < 0.0) throw ValidationError("beta_grid.beta_min", "must be >= 0");
  std::vector<double> out(points);
  if (points == 1) {
    out[0] = beta_min;
    return out;
  }
  const double n = static_cast<double>(points - 1);
  if (spacing == Spacing::Log) {
    const double lo = std::log2(beta_min);
    const double hi = std::log2(beta_max);
    for (std::size_t i = 0; i < points; ++i) out[i] = std::exp2(lo + (hi - lo) * static_cast<double>(i) / n);
  } else {
    for (std::size_t i = 0; i < points; ++i) {
      out[i] = beta_min + (beta_max - beta_min) * static_cast<double>(i) / n;
    }
  }
  out.back() = beta_max;
  out.front() = beta_min;
  return out;
}

std::string GridSpec::to_string() const {
  return std::string(spacing == Spacing::Log ? "log" : "linear") + ":" + format_double(beta_min) + ":" +
         format_double(beta_max) + ":" + std::to_string(points);
}

GridSpec GridSpec::parse(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(':', start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  if (parts.size() != 4) throw ValidationError("beta_grid", "expected spacing:min:max:points");
  GridSpec g;
  if (parts[0] == "log") {
    g.spacing = Spacing::Log;
  } else if (parts[0] == "linear" || parts[0] == "lin") {
    g.spacing = Spacing::Linear;
  } else {
    throw ValidationError("beta_grid", "spacing must be 'log' or 'linear'");
  }
  g.beta_min = parse_double(parts[1], "beta_grid.beta_min");
  g.beta_max = parse_double(parts[2], "beta_grid.beta_max");
  const double pts = parse_double(parts[3], "beta_grid.points");
  if (pts < 1.0 || pts != std::floor(pts)) throw ValidationError("beta_grid.points", "must be a positive integer");
  g.points = static_cast<std::size_t>(pts);
  g.betas();  // validates
  return g;
}

bool operator==(const AnnealRecord& a, const AnnealRecord& b) {
  return a.beta == b.beta && a.i_x == b.i_x && a.i_y == b.i_y && a.functional == b.functional &&
         a.iterations == b.iterations && a.converged == b.converged && a.monotone == b.monotone &&
         a.effective_clusters == b.effective_clusters && a.decoder.rows() == b.decoder.rows() &&
         a.decoder.cols() == b.decoder.cols() && a.decoder == b.decoder;
}

bool operator==(const AnnealTrace& a, const AnnealTrace& b) {
  return a.framework == b.framework && a.records == b.records && a.grid == b.grid;
}

std::uint64_t step_seed(std::uint64_t seed, std::size_t index) {
  // splitmix64 finalizer over (seed, index)
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(index) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

BottleneckState split_and_perturb(const BottleneckState& state, const JointDistribution& joint, double eps,
                                  std::uint64_t seed) {
  if (!(eps >= 0.0 && eps < 0.5)) throw ValidationError("split_eps", "must lie in [0, 0.5)");
  const Matrix& enc = state.encoder.rows();
  const Index k = enc.cols();
  Matrix split(enc.rows(), 2 * k);
  Matrix parent_dec(2 * k, state.decoder.outcomes());
  std::mt19937_64 rng(seed);
  for (Index j = 0; j < k; ++j) {
    for (Index x = 0; x < enc.rows(); ++x) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      const double xi = 2.0 * u - 1.0;
      split(x, 2 * j) = enc(x, j) * (1.0 + eps * xi) / 2.0;
      split(x, 2 * j + 1) = enc(x, j) * (1.0 - eps * xi) / 2.0;
    }
    parent_dec.row(2 * j) = state.decoder.rows().row(j);
    parent_dec.row(2 * j + 1) = state.decoder.rows().row(j);
  }
  return make_state(joint, state.framework, state.beta, split, &parent_dec);
}

BottleneckState merge_clusters(const BottleneckState& state, const JointDistribution& joint, double merge_tol) {
  const Matrix& enc = state.encoder.rows();
  const Matrix& dec = state.decoder.rows();
  std::vector<Index> reps;
  std::vector<Eigen::VectorXd> columns;
  for (Index j = 0; j < enc.cols(); ++j) {
    if (!state.is_live(j)) continue;
    bool merged = false;
    for (std::size_t g = 0; g < reps.size(); ++g) {
      if (linf(dec.row(j), dec.row(reps[g])) < merge_tol) {
        columns[g] += enc.col(j);
        merged = true;
        break;
      }
    }
    if (!merged) {
      reps.push_back(j);
      columns.emplace_back(enc.col(j));
    }
  }
  if (reps.empty()) throw std::logic_error("merge_clusters: no live cluster");
  for (Index j = 0; j < enc.cols(); ++j) {
    if (state.is_live(j)) continue;
    std::size_t best = 0;
    double best_dist = linf(dec.row(j), dec.row(reps[0]));
    for (std::size_t g = 1; g < reps.size(); ++g) {
      const double d = linf(dec.row(j), dec.row(reps[g]));
      if (d < best_dist) {
        best = g;
        best_dist = d;
      }
    }
    columns[best] += enc.col(j);
  }

  Matrix merged(enc.rows(), static_cast<Index>(columns.size()));
  for (std::size_t g = 0; g < columns.size(); ++g) merged.col(static_cast<Index>(g)) = columns[g];
  BottleneckState out = make_state(joint, state.framework, state.beta, merged);

  std::vector<Index> order(static_cast<std::size_t>(out.clusters()));
  std::iota(order.begin(), order.end(), Index{0});
  const Matrix& d = out.decoder.rows();
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    for (Index y = 0; y < d.cols(); ++y) {
      if (d(a, y) != d(b, y)) return d(a, y) < d(b, y);
    }
    return false;
  });
  Matrix enc_sorted(merged.rows(), merged.cols());
  Matrix dec_sorted(d.rows(), d.cols());
  Vector m_sorted(out.marginal.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto dst = static_cast<Index>(i);
    enc_sorted.col(dst) = out.encoder.rows().col(order[i]);
    dec_sorted.row(dst) = d.row(order[i]);
    m_sorted(dst) = out.marginal(order[i]);
  }
  return BottleneckState{out.framework, out.beta,
                         ConditionalDistribution(std::move(enc_sorted), Variable::X, Variable::Xhat),
                         std::move(m_sorted),
                         ConditionalDistribution(std::move(dec_sorted), Variable::Xhat, Variable::Y)};
}

BottleneckState single_cluster_state(const JointDistribution& joint, Framework framework, double beta) {
  return make_state(joint, framework, beta, Matrix::Ones(joint.n_x(), 1));
}

SolveReport solve(const JointDistribution& joint, Framework framework, double beta, const BottleneckState& init,
                  const SolveOptions& options) {
  return framework == Framework::IB ? ib_solve(joint, beta, init, options) : dual_solve(joint, beta, init, options);
}

AnnealStep anneal_step(const JointDistribution& joint, Framework framework, double beta,
                       const BottleneckState& previous, const SplitConfig& split, std::uint64_t seed,
                       const SolveOptions& options) {
  const BottleneckState perturbed = split_and_perturb(previous, joint, split.eps, seed);
  SolveReport report = solve(joint, framework, beta, perturbed, options);
  BottleneckState merged = merge_clusters(report.state, joint, split.merge_tol);
  return {std::move(report), std::move(merged)};
}

SweepResult sweep(const JointDistribution& joint, Framework framework, const std::vector<double>& betas,
                  const SplitConfig& split, const SolveOptions& options) {
  for (std::size_t i = 1; i < betas.size(); ++i) {
    if (!(betas[i] > betas[i - 1])) throw ValidationError("beta_grid", "must be strictly ascending");
  }
  SweepResult result;
  result.trace.framework = framework;
  BottleneckState state = single_cluster_state(joint, framework, betas.empty() ? 0.0 : betas.front());
  for (std::size_t i = 0; i < betas.size(); ++i) {
    AnnealStep step = anneal_step(joint, framework, betas[i], state, split, step_seed(split.seed, i), options);
    state = std::move(step.merged);

    AnnealRecord rec;
    rec.beta = betas[i];
    rec.i_x = compression_information(joint, state.encoder.rows());
    rec.i_y = label_information(joint, state.encoder.rows());
    rec.functional = framework == Framework::IB ? ib_functional(state, joint) : dual_functional(state, joint);
    rec.iterations = step.report.iterations;
    rec.converged = step.report.converged;
    rec.effective_clusters = static_cast<std::size_t>(state.live_clusters());
    rec.decoder = state.decoder.rows();
    if (!result.trace.records.empty()) {
      const AnnealRecord& prev = result.trace.records.back();
      rec.monotone = rec.i_x - prev.i_x >= -1e-9 && rec.i_y - prev.i_y >= -1e-9;
    }
    result.trace.records.push_back(std::move(rec));
    result.states.push_back(state);
  }
  return result;
}

SweepResult sweep(const JointDistribution& joint, Framework framework, const GridSpec& grid,
                  const SplitConfig& split, const SolveOptions& options) {
  SweepResult r = sweep(joint, framework, grid.betas(), split, options);
  r.trace.grid = grid;
  return r;
}

std::string trace_file_name(std::string_view problem, Framework framework, TraceFormat format) {
  return std::string(problem) + "_" + std::string(to_string(framework)) + "_trace." +
         (format == TraceFormat::Csv ? "csv" : "json");
}

}  // namespace bottleneck
