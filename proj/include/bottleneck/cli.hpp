#pragma once

// bottleneck_lab command dispatch. Exit codes: 0 success, 2 invalid input
// (the message names the field), 1 anything else.

#include "bottleneck/anneal.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace bottleneck::cli {

struct RunConfig {
  std::string command;
  std::string problem;
  std::string framework = "both";  // ib | dual | both
  std::optional<double> beta;
  GridSpec grid{};
  double tol = 1e-10;
  std::size_t max_iter = 200000;
  double split_eps = 1e-3;
  double merge_tol = 1e-4;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  std::string units = "nats";  // nats | bits, standard output only
  double refine_tol = 1e-10;
  std::size_t trials = 10000;
  std::vector<std::size_t> n_values{1, 2, 4, 8, 16, 32, 64, 128, 256};
  std::vector<double> betas{2.0, 4.0, 8.0, 16.0, 32.0, 64.0};
  std::optional<long> clusters;  // solve: representation size, default n_x
  std::optional<long> d;         // expfam: fit dimension for non-binary rules
};

// Checks the fields the command needs. Throws ValidationError.
void validate(const RunConfig& config);

// The effective configuration as written to <output_dir>/run_config.json.
std::string run_config_json(const RunConfig& config);

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bottleneck::cli
