#include "bottleneck/problem_io.hpp"

#include "bottleneck/errors.hpp"
#include "format.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <optional>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace bottleneck {
namespace {

using nlohmann::json;

std::string idx(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

double read_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ValidationError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ValidationError(path, "must be finite");
  return v;
}

Vector read_vector(const json& j, const std::string& path, bool probabilities) {
  if (!j.is_array() || j.empty()) throw ValidationError(path, "expected a nonempty array of numbers");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Index>(i)) = read_number(j[i], idx(path, i));
    if (probabilities && v(static_cast<Index>(i)) < 0.0) throw ValidationError(idx(path, i), "negative probability");
  }
  return v;
}

Matrix read_matrix(const json& j, const std::string& path, bool probabilities, bool allow_empty_rows = false) {
  if (!j.is_array() || j.empty()) throw ValidationError(path, "expected a nonempty array of rows");
  std::size_t cols = 0;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array()) throw ValidationError(idx(path, i), "expected an array");
    if (i == 0) cols = j[i].size();
    if (j[i].size() != cols) throw ValidationError(idx(path, i), "row length differs from row 0");
  }
  if (cols == 0 && !allow_empty_rows) throw ValidationError(idx(path, 0), "empty row");
  Matrix m(static_cast<Index>(j.size()), static_cast<Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    for (std::size_t k = 0; k < cols; ++k) {
      const std::string p = idx(idx(path, i), k);
      const double v = read_number(j[i][k], p);
      if (probabilities && v < 0.0) throw ValidationError(p, "negative probability");
      m(static_cast<Index>(i), static_cast<Index>(k)) = v;
    }
  }
  return m;
}

std::optional<double> read_smoothing(const json& j) {
  if (!j.contains("smoothing_epsilon")) return kDefaultSmoothing;
  const double eps = read_number(j.at("smoothing_epsilon"), "smoothing_epsilon");
  if (eps < 0.0) throw ValidationError("smoothing_epsilon", "must be >= 0");
  if (eps == 0.0) return std::nullopt;
  return eps;
}

Vector read_p_x(const json& obj, const std::string& path, Index n_x) {
  if (!obj.contains("p_x")) return Vector::Constant(n_x, 1.0 / static_cast<double>(n_x));
  Vector p = read_vector(obj.at("p_x"), path, true);
  if (p.size() != n_x) {
    throw ValidationError(path, "length " + std::to_string(p.size()) + " does not match n_x = " +
                                    std::to_string(n_x));
  }
  return p;
}

Problem parse_object(const json& j) {
  if (!j.is_object()) throw ValidationError("$", "problem file must hold a JSON object");
  const bool rule = j.contains("p_y_given_x");
  const bool expfam = j.contains("exp_family");
  const bool classes = j.contains("class_conditionals");
  if (rule && expfam) throw ValidationError("exp_family", "cannot be combined with p_y_given_x");
  if (classes && (rule || expfam)) {
    throw ValidationError("class_conditionals", "cannot be combined with p_y_given_x or exp_family");
  }
  if (rule) {
    const Matrix p = read_matrix(j.at("p_y_given_x"), "p_y_given_x", true);
    return JointDistribution::from_conditional(read_p_x(j, "p_x", p.rows()), p, read_smoothing(j));
  }
  if (expfam) {
    const json& e = j.at("exp_family");
    if (!e.is_object()) throw ValidationError("exp_family", "expected an object");
    if (!e.contains("features")) throw ValidationError("exp_family.features", "missing");
    if (!e.contains("params")) throw ValidationError("exp_family.params", "missing");
    Matrix features = read_matrix(e.at("features"), "exp_family.features", false, true);
    Matrix params = read_matrix(e.at("params"), "exp_family.params", false, true);
    Vector p_x = read_p_x(e, "exp_family.p_x", features.rows());
    return ExpFamilyModel::from_parameters(std::move(features), std::move(params), std::move(p_x));
  }
  if (classes) {
    Matrix rows = read_matrix(j.at("class_conditionals"), "class_conditionals", true);
    std::optional<Vector> prior;
    if (j.contains("prior")) prior = read_vector(j.at("prior"), "prior", true);
    return ClassificationProblem::create(std::move(rows), std::move(prior), read_smoothing(j));
  }
  throw ValidationError("$", "expected one of p_y_given_x, exp_family or class_conditionals");
}

std::vector<std::string> split_cells(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  return cells;
}

}  // namespace

Problem parse_problem_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError("$", std::string("malformed JSON: ") + e.what());
  }
  return parse_object(j);
}

Problem parse_problem_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("csv", "empty file");
  const std::size_t header_cells = split_cells(line).size();
  if (header_cells == 0) throw ValidationError("csv.header", "no labels");
  // A leading x-label column is recognised by a non-numeric first data cell;
  // the header may or may not name it.
  std::optional<bool> labelled;
  std::size_t n_y = header_cells;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split_cells(line);
    if (!labelled) {
      double probe = 0.0;
      const std::string& first = cells.empty() ? std::string() : cells.front();
      const auto res = std::from_chars(first.data(), first.data() + first.size(), probe);
      labelled = res.ec != std::errc() || res.ptr != first.data() + first.size();
      if (*labelled && header_cells == cells.size()) n_y = header_cells - 1;
    }
    if (*labelled && !cells.empty()) cells.erase(cells.begin());
    if (cells.size() != n_y) {
      throw ValidationError("csv.line" + std::to_string(line_no), "expected " + std::to_string(n_y) + " values");
    }
    std::vector<double> row;
    for (std::size_t k = 0; k < n_y; ++k) {
      const std::string field = "csv.line" + std::to_string(line_no) + "[" + std::to_string(k) + "]";
      const double v = parse_double(cells[k], field);
      if (v < 0.0) throw ValidationError(field, "negative probability");
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError("csv", "no rows");
  if (n_y == 0) throw ValidationError("csv.header", "no labels");
  Matrix p(static_cast<Index>(rows.size()), static_cast<Index>(n_y));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < n_y; ++k) p(static_cast<Index>(i), static_cast<Index>(k)) = rows[i][k];
  }
  return JointDistribution::from_conditional(Vector::Constant(p.rows(), 1.0 / static_cast<double>(p.rows())), p);
}

Problem load_problem(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open problem file");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (path.extension() == ".csv") return parse_problem_csv(buf.str());
  return parse_problem_json(buf.str());
}

JointDistribution problem_joint(const Problem& problem) {
  if (const auto* j = std::get_if<JointDistribution>(&problem)) return *j;
  if (const auto* e = std::get_if<ExpFamilyModel>(&problem)) return e->to_joint();
  return std::get<ClassificationProblem>(problem).joint();
}

std::string classification_problem_json(const ClassificationProblem& problem, std::string_view note) {
  json rows = json::array();
  for (Index i = 0; i < problem.classes(); ++i) {
    json row = json::array();
    for (Index x = 0; x < problem.n_x(); ++x) row.push_back(problem.class_conditionals()(i, x));
    rows.push_back(std::move(row));
  }
  json prior = json::array();
  for (Index i = 0; i < problem.classes(); ++i) prior.push_back(problem.prior()(i));
  json out = {{"class_conditionals", std::move(rows)}, {"prior", std::move(prior)}};
  if (!note.empty()) out["note"] = std::string(note);
  return out.dump(1) + "\n";
}

}  // namespace bottleneck
