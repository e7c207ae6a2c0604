#include "bottleneck/error_exp.hpp"

#include "bottleneck/dual_solver.hpp"
#include "bottleneck/errors.hpp"
#include "bottleneck/parallel.hpp"
#include "format.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <string>

namespace bottleneck {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Index of the first cumulative entry above u.
Index draw(const Eigen::RowVectorXd& cumulative, double u) {
  for (Index i = 0; i < cumulative.size(); ++i) {
    if (u < cumulative(i)) return i;
  }
  return cumulative.size() - 1;
}

Eigen::RowVectorXd cumulative_sum(const Eigen::RowVectorXd& p) {
  Eigen::RowVectorXd c(p.size());
  double s = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    s += p(i);
    c(i) = s;
  }
  return c;
}

}  // namespace

ClassificationProblem ClassificationProblem::create(Matrix class_conditionals, std::optional<Vector> prior,
                                                    std::optional<double> smoothing) {
  const Index m = class_conditionals.rows();
  const Index n_x = class_conditionals.cols();
  if (m == 0 || n_x == 0) throw ValidationError("class_conditionals", "must be a nonempty matrix");
  for (Index i = 0; i < m; ++i) {
    const std::string field = "class_conditionals[" + std::to_string(i) + "]";
    if (!class_conditionals.row(i).allFinite() || (class_conditionals.row(i).array() < 0.0).any()) {
      throw ValidationError(field, "entries must be finite and nonnegative");
    }
    const double s = class_conditionals.row(i).sum();
    if (std::abs(s - 1.0) > 1e-6) throw ValidationError(field, "sums to " + format_double(s) + ", not 1");
    class_conditionals.row(i) /= s;
    if ((class_conditionals.row(i).array() == 0.0).any()) {
      if (!smoothing || *smoothing <= 0.0) throw ValidationError(field, "has a zero entry and no smoothing");
      const double eps = *smoothing;
      class_conditionals.row(i) =
          (class_conditionals.row(i).array() + eps) / (1.0 + static_cast<double>(n_x) * eps);
    }
  }
  Vector p = prior.value_or(Vector::Constant(m, 1.0 / static_cast<double>(m)));
  if (p.size() != m) throw ValidationError("prior", "length must equal the number of classes");
  if (!p.allFinite() || (p.array() <= 0.0).any()) throw ValidationError("prior", "entries must be positive");
  if (std::abs(p.sum() - 1.0) > 1e-6) throw ValidationError("prior", "does not sum to 1");
  ClassificationProblem out;
  out.conditionals_ = std::move(class_conditionals);
  out.prior_ = p / p.sum();
  return out;
}

JointDistribution ClassificationProblem::joint() const {
  const Matrix p_xy = conditionals_.transpose() * prior_.asDiagonal();
  return JointDistribution::from_joint(p_xy / p_xy.sum());
}

ClassificationProblem dirichlet_classes(Index classes, Index n_x, std::uint64_t seed) {
  if (classes < 1 || n_x < 1) throw ValidationError("classes", "need at least one class and one input");
  std::mt19937_64 rng(seed);
  Matrix rows(classes, n_x);
  for (Index i = 0; i < classes; ++i) {
    for (Index x = 0; x < n_x; ++x) rows(i, x) = -std::log((static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53);
    rows.row(i) /= rows.row(i).sum();
  }
  return ClassificationProblem::create(std::move(rows));
}

Vector geometric_interpolation(const Vector& p0, const Vector& p1, double lambda) {
  Eigen::RowVectorXd logits = (lambda * p0.array().log() + (1.0 - lambda) * p1.array().log()).transpose();
  const double lse = detail::log_sum_exp(logits);
  return (logits.array() - lse).exp().transpose();
}

ChernoffResult chernoff_information(const Vector& p0, const Vector& p1, double tol) {
  if (p0.size() != p1.size()) throw DimensionMismatch("Chernoff pair has different lengths");
  if ((p0.array() <= 0.0).any() || (p1.array() <= 0.0).any()) {
    throw ValidationError("chernoff", "both distributions must be strictly positive");
  }
  if (!(tol > 0.0)) throw ValidationError("tol", "must be positive");
  if ((p0 - p1).cwiseAbs().maxCoeff() == 0.0) return {0.0, 0.5};

  const Eigen::ArrayXd l0 = p0.array().log();
  const Eigen::ArrayXd l1 = p1.array().log();
  const auto g = [&](double lambda) {
    const Eigen::RowVectorXd v = (lambda * l0 + (1.0 - lambda) * l1).matrix().transpose();
    return detail::log_sum_exp(v);
  };
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0;
  double b = 1.0;
  double c = b - ratio * (b - a);
  double d = a + ratio * (b - a);
  double gc = g(c);
  double gd = g(d);
  while (b - a > tol) {
    if (gc < gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - ratio * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + ratio * (b - a);
      gd = g(d);
    }
  }
  const double lambda = 0.5 * (a + b);
  return {std::max(0.0, -g(lambda)), lambda};
}

ExponentBound mean_exponent_bound(const BottleneckState& state, const JointDistribution& joint) {
  const ConditionalDistribution inverse = state.inverse_encoder(joint);
  const Matrix& dec = state.decoder.rows();
  const Matrix& p_x_given_y = joint.p_x_given_y();
  ExponentBound out;
  for (Index k = 0; k < state.clusters(); ++k) {
    if (!state.is_live(k)) continue;
    for (Index y = 0; y < joint.n_y(); ++y) {
      out.bound += state.marginal(k) * dec(k, y) *
                   kl_divergence(inverse.rows().row(k).transpose(), p_x_given_y.col(y));
    }
  }
  out.rate_distortion =
      compression_information(joint, state.encoder.rows()) + expected_dual_distortion(state, joint);
  out.dual_functional = dual_functional(state, joint);
  if (out.bound > out.rate_distortion + 1e-9) {
    throw std::logic_error("mean_exponent_bound: bound " + format_double(out.bound) +
                           " exceeds I_x + E[d_dual] = " + format_double(out.rate_distortion));
  }
  return out;
}

ExperimentResult run_prediction_experiment(const ClassificationProblem& problem, const ExperimentConfig& config) {
  if (config.trials == 0) throw ValidationError("trials", "must be at least 1");
  if (config.n_values.empty()) throw ValidationError("n_values", "must not be empty");
  for (std::size_t i = 0; i < config.n_values.size(); ++i) {
    if (config.n_values[i] == 0 || (i > 0 && config.n_values[i] <= config.n_values[i - 1])) {
      throw ValidationError("n_values", "must be positive and strictly ascending");
    }
  }
  for (double b : config.betas) {
    if (!(b > 0.0) || !std::isfinite(b)) throw ValidationError("betas", "must be finite and positive");
  }

  const JointDistribution joint = problem.joint();
  std::vector<double> grid = config.training_grid.betas();
  grid.insert(grid.end(), config.betas.begin(), config.betas.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  ExperimentResult result;
  for (Framework fw : config.frameworks) {
    const SweepResult sw = sweep(joint, fw, grid, config.split, config.options);
    for (double b : config.betas) {
      const auto idx = static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), b) - grid.begin());
      result.encoders.push_back({fw, b, sw.states[idx], sw.trace.records[idx].converged});
    }
  }

  const std::size_t n_curves = result.encoders.size();
  const std::size_t n_sizes = config.n_values.size();
  const Index m = problem.classes();
  const Index n_x = problem.n_x();
  std::vector<Matrix> encoders;
  std::vector<Matrix> log_class;  // log p(xhat|y_i), -inf where zero
  for (const auto& te : result.encoders) {
    encoders.push_back(te.state.encoder.rows());
    const Matrix cls = problem.class_conditionals() * encoders.back();
    Matrix lc(cls.rows(), cls.cols());
    for (Index i = 0; i < cls.rows(); ++i) {
      for (Index k = 0; k < cls.cols(); ++k) lc(i, k) = cls(i, k) > 0.0 ? std::log(cls(i, k)) : -kInf;
    }
    log_class.push_back(std::move(lc));
  }

  const Eigen::RowVectorXd prior_cdf = cumulative_sum(problem.prior().transpose());
  std::vector<Eigen::RowVectorXd> class_cdf;
  for (Index i = 0; i < m; ++i) class_cdf.push_back(cumulative_sum(problem.class_conditionals().row(i)));
  const std::size_t max_n = config.n_values.back();

  // wrong[(t * n_curves + c) * n_sizes + s]
  std::vector<unsigned char> wrong(config.trials * n_curves * n_sizes, 0);
  parallel_for(config.trials, [&](std::size_t t) {
    const auto seed = config.seed;
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(static_cast<std::uint64_t>(t) >> 32)};
    std::mt19937_64 rng(seq);
    const Index y = draw(prior_cdf, uniform01(rng));
    Vector counts = Vector::Zero(n_x);
    std::size_t next = 0;
    for (std::size_t drawn = 1; drawn <= max_n; ++drawn) {
      counts(draw(class_cdf[static_cast<std::size_t>(y)], uniform01(rng))) += 1.0;
      if (drawn != config.n_values[next]) continue;
      const Vector empirical = counts / static_cast<double>(drawn);
      for (std::size_t c = 0; c < n_curves; ++c) {
        const Eigen::RowVectorXd ph = empirical.transpose() * encoders[c];
        Index best = -1;
        double best_d = kInf;
        for (Index i = 0; i < m; ++i) {
          double div = 0.0;
          for (Index k = 0; k < ph.size() && std::isfinite(div); ++k) {
            if (ph(k) > 0.0) div += ph(k) * (std::log(ph(k)) - log_class[c](i, k));
          }
          if (std::isfinite(div) && div < best_d) {
            best_d = div;
            best = i;
          }
        }
        wrong[(t * n_curves + c) * n_sizes + next] = best != y ? 1 : 0;
      }
      ++next;
    }
  });

  for (std::size_t c = 0; c < n_curves; ++c) {
    ErrorCurve curve;
    curve.framework = result.encoders[c].framework;
    curve.beta = result.encoders[c].beta;
    curve.n_values = config.n_values;
    curve.trials = config.trials;
    curve.seed = config.seed;
    curve.clusters = static_cast<std::size_t>(result.encoders[c].state.live_clusters());
    for (std::size_t s = 0; s < n_sizes; ++s) {
      std::size_t errors = 0;
      for (std::size_t t = 0; t < config.trials; ++t) errors += wrong[(t * n_curves + c) * n_sizes + s];
      const double p = static_cast<double>(errors) / static_cast<double>(config.trials);
      curve.p_err.push_back(p);
      curve.ci_halfwidth.push_back(1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(config.trials)));
    }
    result.curves.push_back(std::move(curve));
  }
  return result;
}

void write_error_csv(const std::vector<ErrorCurve>& curves, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << "framework,beta,n,p_err,ci_halfwidth,trials,seed\n";
  for (const auto& c : curves) {
    for (std::size_t s = 0; s < c.n_values.size(); ++s) {
      out << to_string(c.framework) << ',' << format_double(c.beta) << ',' << c.n_values[s] << ','
          << format_double(c.p_err[s]) << ',' << format_double(c.ci_halfwidth[s]) << ',' << c.trials << ','
          << c.seed << '\n';
    }
  }
  if (!out) throw IoError(path.string(), "write failed");
}

}  // namespace bottleneck
