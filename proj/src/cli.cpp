#include "bottleneck/cli.hpp"

#include "bottleneck/critical.hpp"
#include "bottleneck/dual_solver.hpp"
#include "bottleneck/error_exp.hpp"
#include "bottleneck/errors.hpp"
#include "bottleneck/expfam.hpp"
#include "bottleneck/parallel.hpp"
#include "bottleneck/problem_io.hpp"
#include "format.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace bottleneck::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

const std::vector<std::string> kCommands{"solve", "sweep", "critical", "expfam", "error-exp"};

std::vector<Framework> frameworks_of(const std::string& name) {
  if (name == "both") return {Framework::IB, Framework::DualIB};
  return {parse_framework(name)};
}

// Values as typed on the command line; merged over the config afterwards.
struct RawOptions {
  std::string config_path;
  RunConfig cli;
  std::string grid_text;
  double beta = 0.0;
  long clusters = 0;
  long d = 0;
  // make-classes
  long class_count = 8;
  long class_n_x = 16;
  std::string class_output;
};

struct Bound {
  CLI::App* app;
  std::map<std::string, CLI::Option*> options;
  bool given(const std::string& name) const {
    const auto it = options.find(name);
    return it != options.end() && it->second->count() > 0;
  }
};

void add_run_options(Bound& b, RawOptions& raw, const std::string& command) {
  CLI::App* s = b.app;
  auto& o = b.options;
  o["config"] = s->add_option("--config", raw.config_path, "JSON run configuration (flags take precedence)");
  if (command == "error-exp") {
    o["problem"] = s->add_option("--classes,--problem", raw.cli.problem, "classification problem file");
  } else {
    o["problem"] = s->add_option("--problem", raw.cli.problem, "problem file (.json or .csv)");
  }
  o["framework"] = s->add_option("--framework", raw.cli.framework, "ib, dual or both");
  o["tol"] = s->add_option("--tol", raw.cli.tol, "encoder change tolerance");
  o["max_iter"] = s->add_option("--max-iter", raw.cli.max_iter, "iteration cap per solve");
  o["seed"] = s->add_option("--seed", raw.cli.seed, "random seed");
  o["output_dir"] = s->add_option("--output-dir,-o", raw.cli.output_dir, "directory for result files");
  o["units"] = s->add_option("--units", raw.cli.units, "nats or bits (standard output only)");
  if (command == "solve" || command == "expfam") {
    o["beta"] = s->add_option("--beta", raw.beta, "trade-off parameter");
    o["clusters"] = s->add_option("--clusters", raw.clusters, "representation size (default n_x)");
  }
  if (command == "sweep" || command == "critical" || command == "expfam") {
    o["beta_grid"] = s->add_option("--beta-grid", raw.grid_text, "spacing:min:max:points, e.g. log:0.25:64:400");
  }
  if (command == "sweep" || command == "critical" || command == "error-exp") {
    o["split_eps"] = s->add_option("--split-eps", raw.cli.split_eps, "split perturbation size");
    o["merge_tol"] = s->add_option("--merge-tol", raw.cli.merge_tol, "decoder distance for merging clusters");
  }
  if (command == "sweep" || command == "critical") {
    o["refine_tol"] = s->add_option("--refine-tol", raw.cli.refine_tol, "bisection width for critical points");
  }
  if (command == "expfam") o["d"] = s->add_option("--d", raw.d, "feature dimension for non-binary rules");
  if (command == "error-exp") {
    o["trials"] = s->add_option("--trials", raw.cli.trials, "Monte-Carlo trials per (beta, n)");
    o["n_values"] = s->add_option("--n-values", raw.cli.n_values, "test sample sizes")->delimiter(',');
    o["betas"] = s->add_option("--betas", raw.cli.betas, "trained beta values")->delimiter(',');
  }
}

template <typename T>
T config_value(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ValidationError("config." + key, "wrong type");
  }
}

void apply_config(const json& j, RunConfig& c) {
  if (!j.is_object()) throw ValidationError("config", "must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "command") {
      continue;
    } else if (key == "problem" || key == "classes") {
      c.problem = config_value<std::string>(v, key);
    } else if (key == "framework") {
      c.framework = config_value<std::string>(v, key);
    } else if (key == "beta") {
      if (!v.is_null()) c.beta = config_value<double>(v, key);
    } else if (key == "beta_grid") {
      c.grid = GridSpec::parse(config_value<std::string>(v, key));
    } else if (key == "tol") {
      c.tol = config_value<double>(v, key);
    } else if (key == "max_iter") {
      c.max_iter = config_value<std::size_t>(v, key);
    } else if (key == "split_eps") {
      c.split_eps = config_value<double>(v, key);
    } else if (key == "merge_tol") {
      c.merge_tol = config_value<double>(v, key);
    } else if (key == "seed") {
      c.seed = config_value<std::uint64_t>(v, key);
    } else if (key == "output_dir") {
      c.output_dir = config_value<std::string>(v, key);
    } else if (key == "units") {
      c.units = config_value<std::string>(v, key);
    } else if (key == "refine_tol") {
      c.refine_tol = config_value<double>(v, key);
    } else if (key == "trials") {
      c.trials = config_value<std::size_t>(v, key);
    } else if (key == "n_values") {
      c.n_values = config_value<std::vector<std::size_t>>(v, key);
    } else if (key == "betas") {
      c.betas = config_value<std::vector<double>>(v, key);
    } else if (key == "clusters") {
      if (!v.is_null()) c.clusters = config_value<long>(v, key);
    } else if (key == "d") {
      if (!v.is_null()) c.d = config_value<long>(v, key);
    } else {
      throw ValidationError("config." + key, "unknown setting");
    }
  }
}

RunConfig effective_config(const std::string& command, const RawOptions& raw, const Bound& b) {
  RunConfig c;
  c.command = command;
  if (!raw.config_path.empty()) {
    std::ifstream in(raw.config_path);
    if (!in) throw ValidationError("config", "cannot read '" + raw.config_path + "'");
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ValidationError("config", std::string("malformed JSON: ") + e.what());
    }
    apply_config(j, c);
  }
  const RunConfig& f = raw.cli;
  if (b.given("problem")) c.problem = f.problem;
  if (b.given("framework")) c.framework = f.framework;
  if (b.given("tol")) c.tol = f.tol;
  if (b.given("max_iter")) c.max_iter = f.max_iter;
  if (b.given("seed")) c.seed = f.seed;
  if (b.given("output_dir")) c.output_dir = f.output_dir;
  if (b.given("units")) c.units = f.units;
  if (b.given("beta")) c.beta = raw.beta;
  if (b.given("clusters")) c.clusters = raw.clusters;
  if (b.given("beta_grid")) c.grid = GridSpec::parse(raw.grid_text);
  if (b.given("split_eps")) c.split_eps = f.split_eps;
  if (b.given("merge_tol")) c.merge_tol = f.merge_tol;
  if (b.given("refine_tol")) c.refine_tol = f.refine_tol;
  if (b.given("d")) c.d = raw.d;
  if (b.given("trials")) c.trials = f.trials;
  if (b.given("n_values")) c.n_values = f.n_values;
  if (b.given("betas")) c.betas = f.betas;
  return c;
}

double unit_scale(const RunConfig& c) { return c.units == "bits" ? 1.0 / std::log(2.0) : 1.0; }

std::string fixed3(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(3) << v;
  return s.str();
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << text;
  if (!out) throw IoError(path.string(), "write failed");
}

SolveOptions solve_options(const RunConfig& c) { return {c.tol, c.max_iter, false}; }
SplitConfig split_config(const RunConfig& c) { return {c.split_eps, c.merge_tol, c.seed}; }

json critical_json(const CriticalPointReport& r, const GridSpec& grid) {
  json points = json::array();
  for (const auto& p : r.points) {
    points.push_back({{"beta_c", p.beta_c},
                      {"cluster", p.cluster},
                      {"lambda2", p.lambda2},
                      {"beta_lo", p.beta_lo},
                      {"beta_hi", p.beta_hi},
                      {"grid_index", p.grid_index}});
  }
  return {{"framework", std::string(to_string(r.framework))},
          {"grid_spec", grid.to_string()},
          {"points", std::move(points)}};
}

std::string joined_betas(const CriticalPointReport& r) {
  if (r.points.empty()) return "none";
  std::string s;
  for (const auto& p : r.points) s += (s.empty() ? "" : ", ") + fixed3(p.beta_c);
  return s;
}

int cmd_solve(const RunConfig& c, const Problem& problem, const std::string& name, std::ostream& out) {
  const JointDistribution joint = problem_joint(problem);
  const Index k = c.clusters ? static_cast<Index>(*c.clusters) : joint.n_x();
  const double scale = unit_scale(c);
  json solutions = json::array();
  for (Framework fw : frameworks_of(c.framework)) {
    const BottleneckState init = random_state(joint, fw, *c.beta, k, c.seed);
    const SolveReport rep = solve(joint, fw, *c.beta, init, solve_options(c));
    const double f = fw == Framework::IB ? ib_functional(rep.state, joint) : dual_functional(rep.state, joint);
    json marginal = json::array();
    for (Index j = 0; j < rep.state.marginal.size(); ++j) marginal.push_back(rep.state.marginal(j));
    solutions.push_back({{"framework", std::string(to_string(fw))},
                         {"beta", *c.beta},
                         {"I_x", rep.i_x},
                         {"I_y", rep.i_y},
                         {"functional", f},
                         {"iterations", rep.iterations},
                         {"converged", rep.converged},
                         {"effective_clusters", rep.state.live_clusters()},
                         {"marginal", std::move(marginal)},
                         {"encoder", matrix_json(rep.state.encoder.rows())},
                         {"decoder", matrix_json(rep.state.decoder.rows())}});
    out << to_string(fw) << ": beta = " << format_double(*c.beta) << ", I_x = " << fixed3(rep.i_x * scale)
        << ", I_y = " << fixed3(rep.i_y * scale) << " " << c.units << ", iterations = " << rep.iterations
        << (rep.converged ? "" : " (not converged)") << ", clusters = " << rep.state.live_clusters() << "\n";
  }
  const json doc = {{"problem", name}, {"units", "nats"}, {"solutions", std::move(solutions)}};
  write_text(fs::path(c.output_dir) / (name + "_solve.json"), doc.dump(1) + "\n");
  return 0;
}

int cmd_sweep(const RunConfig& c, const Problem& problem, const std::string& name, std::ostream& out,
              bool write_traces) {
  const JointDistribution joint = problem_joint(problem);
  const std::vector<Framework> fws = frameworks_of(c.framework);
  const std::vector<double> betas = c.grid.betas();
  std::vector<std::optional<SweepResult>> sweeps(fws.size());
  std::vector<std::optional<CriticalPointReport>> reports(fws.size());
  parallel_for(fws.size(), [&](std::size_t i) {
    sweeps[i] = sweep(joint, fws[i], c.grid, split_config(c), solve_options(c));
    reports[i] = find_critical_points(joint, *sweeps[i], betas, c.refine_tol, solve_options(c));
  });
  const double scale = unit_scale(c);
  json all = json::array();
  for (std::size_t i = 0; i < fws.size(); ++i) {
    const AnnealTrace& trace = sweeps[i]->trace;
    if (write_traces) {
      export_trace(trace, fs::path(c.output_dir) / trace_file_name(name, fws[i], TraceFormat::Csv),
                   TraceFormat::Csv);
    }
    all.push_back(critical_json(*reports[i], c.grid));
    std::size_t unconverged = 0;
    for (const auto& r : trace.records) unconverged += r.converged ? 0 : 1;
    const AnnealRecord& last = trace.records.back();
    out << to_string(fws[i]) << ": " << betas.size() << " beta values, final I_x = " << fixed3(last.i_x * scale)
        << ", I_y = " << fixed3(last.i_y * scale) << " " << c.units << ", clusters = " << last.effective_clusters
        << ", unconverged = " << unconverged << "\n";
    out << to_string(fws[i]) << ": " << reports[i]->points.size() << " critical points at beta = "
        << joined_betas(*reports[i]) << "\n";
  }
  const json doc = {{"problem", name}, {"frameworks", std::move(all)}};
  write_text(fs::path(c.output_dir) / (name + "_critical.json"), doc.dump(1) + "\n");
  return 0;
}

int cmd_expfam(const RunConfig& c, const Problem& problem, const std::string& name, std::ostream& out) {
  ExpFamilyModel model = [&] {
    if (const auto* m = std::get_if<ExpFamilyModel>(&problem)) return *m;
    if (const auto* j = std::get_if<JointDistribution>(&problem)) {
      return from_conditional(*j, c.d ? std::optional<Index>(*c.d) : std::nullopt);
    }
    throw ValidationError("problem", "expfam needs a rule or an exp_family model");
  }();
  const JointDistribution joint = model.to_joint();
  const std::vector<double> betas = c.beta ? std::vector<double>{*c.beta} : c.grid.betas();
  const Index k = c.clusters ? static_cast<Index>(*c.clusters) : joint.n_x();
  const Matrix init = random_state(joint, Framework::DualIB, betas.front(), k, c.seed).encoder.rows();
  std::ostringstream csv;
  csv << "beta,I_x,I_y,dual_I_x,dual_I_y,iterations,converged,units\n";
  double worst = 0.0;
  for (double b : betas) {
    const ExpSolveReport e = exp_solve(model, b, init, solve_options(c));
    const SolveReport dual =
        dual_solve(joint, b, make_state(joint, Framework::DualIB, b, init), solve_options(c));
    worst = std::max({worst, std::abs(e.i_x - dual.i_x), std::abs(e.i_y - dual.i_y)});
    csv << format_double(b) << ',' << format_double(e.i_x) << ',' << format_double(e.i_y) << ','
        << format_double(dual.i_x) << ',' << format_double(dual.i_y) << ',' << e.iterations << ','
        << (e.converged ? 1 : 0) << ",nats\n";
  }
  write_text(fs::path(c.output_dir) / (name + "_expfam.csv"), csv.str());
  out << "expfam: d = " << model.d() << ", " << betas.size() << " beta values, max |exp - dual| in (I_x, I_y) = "
      << std::scientific << std::setprecision(2) << worst * unit_scale(c) << std::defaultfloat << " " << c.units
      << "\n";
  return 0;
}

int cmd_error_exp(const RunConfig& c, const Problem& problem, const std::string& name, std::ostream& out) {
  const auto* classes = std::get_if<ClassificationProblem>(&problem);
  if (classes == nullptr) throw ValidationError("classes", "error-exp needs a class_conditionals problem");
  ExperimentConfig cfg;
  cfg.frameworks = frameworks_of(c.framework);
  cfg.betas = c.betas;
  cfg.n_values = c.n_values;
  cfg.trials = c.trials;
  cfg.seed = c.seed;
  cfg.split = split_config(c);
  cfg.options = solve_options(c);
  const ExperimentResult res = run_prediction_experiment(*classes, cfg);
  write_error_csv(res.curves, fs::path(c.output_dir) / (name + "_error_exp.csv"));
  out << "error-exp: M = " << classes->classes() << ", n_x = " << classes->n_x() << ", " << c.betas.size()
      << " beta values, " << c.trials << " trials\n";
  for (Framework fw : cfg.frameworks) {
    out << to_string(fw) << " mean p_err over beta:";
    for (std::size_t s = 0; s < c.n_values.size(); ++s) {
      double sum = 0.0;
      std::size_t count = 0;
      for (const auto& curve : res.curves) {
        if (curve.framework != fw) continue;
        sum += curve.p_err[s];
        ++count;
      }
      out << " n=" << c.n_values[s] << ":" << fixed3(sum / static_cast<double>(count));
    }
    out << "\n";
  }
  return 0;
}

int cmd_make_classes(const RawOptions& raw, std::ostream& out) {
  if (raw.class_output.empty()) throw ValidationError("output", "required");
  const ClassificationProblem p = dirichlet_classes(raw.class_count, raw.class_n_x, raw.cli.seed);
  const std::string note = "symmetric Dirichlet(1) class conditionals, M = " + std::to_string(raw.class_count) +
                           ", n_x = " + std::to_string(raw.class_n_x) +
                           ", seed = " + std::to_string(raw.cli.seed) + " (bottleneck_lab make-classes)";
  write_text(raw.class_output, classification_problem_json(p, note));
  out << "wrote " << raw.class_output << "\n";
  return 0;
}

}  // namespace

void validate(const RunConfig& c) {
  if (std::find(kCommands.begin(), kCommands.end(), c.command) == kCommands.end()) {
    throw ValidationError("command", "unknown command '" + c.command + "'");
  }
  if (c.problem.empty()) throw ValidationError(c.command == "error-exp" ? "classes" : "problem", "required");
  if (c.framework != "both") parse_framework(c.framework);
  if (c.units != "nats" && c.units != "bits") throw ValidationError("units", "must be nats or bits");
  if (!(c.tol > 0.0)) throw ValidationError("tol", "must be positive");
  if (c.max_iter == 0) throw ValidationError("max_iter", "must be positive");
  if (!(c.split_eps >= 0.0 && c.split_eps < 0.5)) throw ValidationError("split_eps", "must lie in [0, 0.5)");
  if (!(c.merge_tol > 0.0)) throw ValidationError("merge_tol", "must be positive");
  if (!(c.refine_tol > 0.0)) throw ValidationError("refine_tol", "must be positive");
  if (c.command == "solve") {
    if (!c.beta) throw ValidationError("beta", "solve needs a single beta");
  }
  if (c.beta && (!(*c.beta >= 0.0) || !std::isfinite(*c.beta))) {
    throw ValidationError("beta", "must be finite and >= 0");
  }
  if (c.clusters && *c.clusters < 1) throw ValidationError("clusters", "must be at least 1");
  if (c.d && *c.d < 0) throw ValidationError("d", "must be >= 0");
  if (c.command == "error-exp") {
    if (c.trials == 0) throw ValidationError("trials", "must be at least 1");
    if (c.betas.empty()) throw ValidationError("betas", "must not be empty");
    if (c.n_values.empty()) throw ValidationError("n_values", "must not be empty");
  }
  c.grid.betas();
}

std::string run_config_json(const RunConfig& c) {
  json j = {{"command", c.command},
            {"problem", c.problem},
            {"framework", c.framework},
            {"beta", c.beta ? json(*c.beta) : json(nullptr)},
            {"beta_grid", c.grid.to_string()},
            {"tol", c.tol},
            {"max_iter", c.max_iter},
            {"split_eps", c.split_eps},
            {"merge_tol", c.merge_tol},
            {"seed", c.seed},
            {"output_dir", c.output_dir},
            {"units", c.units},
            {"refine_tol", c.refine_tol},
            {"trials", c.trials},
            {"n_values", c.n_values},
            {"betas", c.betas},
            {"clusters", c.clusters ? json(*c.clusters) : json(nullptr)},
            {"d", c.d ? json(*c.d) : json(nullptr)}};
  return j.dump(1) + "\n";
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact Information Bottleneck and dual Information Bottleneck solvers", "bottleneck_lab"};
  app.require_subcommand(1);
  RawOptions raw;
  std::map<std::string, Bound> bound;
  const std::map<std::string, std::string> help{
      {"solve", "solve at a single beta from a seeded random encoder"},
      {"sweep", "annealed beta sweep: trace CSVs and critical points"},
      {"critical", "critical points only"},
      {"expfam", "exponential-family dualIB solve, compared to the full-table solver"},
      {"error-exp", "Monte-Carlo prediction error of trained encoders"}};
  for (const auto& command : kCommands) {
    Bound b{app.add_subcommand(command, help.at(command)), {}};
    add_run_options(b, raw, command);
    bound.emplace(command, std::move(b));
  }
  CLI::App* make = app.add_subcommand("make-classes", "write a seeded Dirichlet classification problem");
  make->add_option("--count", raw.class_count, "number of classes");
  make->add_option("--n-x", raw.class_n_x, "number of inputs");
  make->add_option("--seed", raw.cli.seed, "random seed");
  make->add_option("--output,-o", raw.class_output, "output JSON path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  const auto start = std::chrono::steady_clock::now();
  try {
    if (make->parsed()) return cmd_make_classes(raw, out);
    std::string command;
    for (const auto& [name, b] : bound) {
      if (b.app->parsed()) command = name;
    }
    const RunConfig config = effective_config(command, raw, bound.at(command));
    validate(config);
    Problem problem = [&] {
      try {
        return load_problem(config.problem);
      } catch (const IoError& e) {
        throw ValidationError(command == "error-exp" ? "classes" : "problem", e.what());
      }
    }();
    const std::string name = fs::path(config.problem).stem().string();
    fs::create_directories(config.output_dir);
    write_text(fs::path(config.output_dir) / "run_config.json", run_config_json(config));

    int code = 0;
    if (command == "solve") code = cmd_solve(config, problem, name, out);
    if (command == "sweep") code = cmd_sweep(config, problem, name, out, true);
    if (command == "critical") code = cmd_sweep(config, problem, name, out, false);
    if (command == "expfam") code = cmd_expfam(config, problem, name, out);
    if (command == "error-exp") code = cmd_error_exp(config, problem, name, out);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out << "wall time: " << std::fixed << std::setprecision(2) << seconds << " s\n" << std::defaultfloat;
    return code;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ExactFitError& e) {
    err << "error: exp_family: " << e.what() << "\n";
    return 2;
  } catch (const DimensionMismatch& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace bottleneck::cli
