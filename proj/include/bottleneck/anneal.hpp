#pragma once

// Deterministic annealing: ascending beta sweeps with warm starts, a
// split-and-perturb step before every solve and a merge step after it.

#include "bottleneck/ib_solver.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bottleneck {

enum class Spacing { Log, Linear };

struct GridSpec {
  double beta_min = 0.25;
  double beta_max = 64.0;
  std::size_t points = 400;
  Spacing spacing = Spacing::Log;

  // Log grids are spaced uniformly in log2(beta) so integer powers of two
  // land exactly on grid points when the endpoints allow it.
  std::vector<double> betas() const;
  std::string to_string() const;
  // "log:0.25:64:400" or "linear:0:10:101"
  static GridSpec parse(std::string_view text);

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct SplitConfig {
  double eps = 1e-3;
  double merge_tol = 1e-4;
  std::uint64_t seed = 0;
};

struct AnnealRecord {
  double beta = 0.0;
  double i_x = 0.0;
  double i_y = 0.0;
  double functional = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  bool monotone = true;  // false when I_x or I_y dropped by more than 1e-9
  std::size_t effective_clusters = 0;
  Matrix decoder;  // live clusters only, canonical order

  friend bool operator==(const AnnealRecord& a, const AnnealRecord& b);
};

struct AnnealTrace {
  Framework framework = Framework::IB;
  std::vector<AnnealRecord> records;
  std::optional<GridSpec> grid;

  friend bool operator==(const AnnealTrace& a, const AnnealTrace& b);
};

struct SweepResult {
  AnnealTrace trace;
  std::vector<BottleneckState> states;  // merged state per record
};

// Doubles the cluster count. Child columns are parent * (1 ± eps xi(x)) / 2
// with xi uniform in [-1, 1], drawn from `seed`.
BottleneckState split_and_perturb(const BottleneckState& state, const JointDistribution& joint, double eps,
                                  std::uint64_t seed);

// Folds clusters whose decoder rows agree within `merge_tol` (L-inf) and
// drops frozen clusters into their nearest live neighbour, then orders the
// survivors by decoder row (lexicographic, ascending).
BottleneckState merge_clusters(const BottleneckState& state, const JointDistribution& joint, double merge_tol);

BottleneckState single_cluster_state(const JointDistribution& joint, Framework framework, double beta);

SolveReport solve(const JointDistribution& joint, Framework framework, double beta, const BottleneckState& init,
                  const SolveOptions& options);

// Split, solve and merge at one beta starting from a merged state.
struct AnnealStep {
  SolveReport report;
  BottleneckState merged;
};
AnnealStep anneal_step(const JointDistribution& joint, Framework framework, double beta,
                       const BottleneckState& previous, const SplitConfig& split, std::uint64_t step_seed,
                       const SolveOptions& options);

SweepResult sweep(const JointDistribution& joint, Framework framework, const std::vector<double>& betas,
                  const SplitConfig& split = {}, const SolveOptions& options = {1e-10, 200000, false});
SweepResult sweep(const JointDistribution& joint, Framework framework, const GridSpec& grid,
                  const SplitConfig& split = {}, const SolveOptions& options = {1e-10, 200000, false});

// Per-step perturbation seed derived from the sweep seed and the grid index.
std::uint64_t step_seed(std::uint64_t seed, std::size_t index);

enum class TraceFormat { Csv, Json };

TraceFormat trace_format_from_path(const std::filesystem::path& path);
void export_trace(const AnnealTrace& trace, const std::filesystem::path& path, TraceFormat format);
AnnealTrace import_trace(const std::filesystem::path& path, TraceFormat format);

// "<problem>_<framework>_trace.<ext>"
std::string trace_file_name(std::string_view problem, Framework framework, TraceFormat format);

}  // namespace bottleneck
