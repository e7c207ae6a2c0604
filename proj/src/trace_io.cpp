#include "bottleneck/anneal.hpp"
#include "bottleneck/errors.hpp"
#include "format.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>

namespace bottleneck {
namespace {

using nlohmann::json;

constexpr const char* kFixedColumns[] = {"framework",  "beta",      "I_x",      "I_y",
                                         "functional", "iterations", "converged", "monotone",
                                         "effective_clusters", "units"};
constexpr std::size_t kFixedCount = std::size(kFixedColumns);

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

void write_csv(const AnnealTrace& trace, std::ostream& out) {
  Index max_clusters = 0;
  Index n_y = 0;
  for (const auto& r : trace.records) {
    max_clusters = std::max(max_clusters, r.decoder.rows());
    n_y = std::max(n_y, r.decoder.cols());
  }
  for (std::size_t i = 0; i < kFixedCount; ++i) out << (i ? "," : "") << kFixedColumns[i];
  for (Index i = 0; i < max_clusters; ++i) {
    for (Index j = 0; j < n_y; ++j) out << ",dec_xhat" << i << "_y" << j;
  }
  out << '\n';
  for (const auto& r : trace.records) {
    out << to_string(trace.framework) << ',' << format_double(r.beta) << ',' << format_double(r.i_x) << ','
        << format_double(r.i_y) << ',' << format_double(r.functional) << ',' << r.iterations << ','
        << (r.converged ? 1 : 0) << ',' << (r.monotone ? 1 : 0) << ',' << r.effective_clusters << ",nats";
    for (Index i = 0; i < max_clusters; ++i) {
      for (Index j = 0; j < n_y; ++j) {
        out << ',';
        if (i < r.decoder.rows()) out << format_double(r.decoder(i, j));
      }
    }
    out << '\n';
  }
}

AnnealTrace read_csv(std::istream& in, const std::string& path) {
  std::string line;
  if (!std::getline(in, line)) throw IoError(path, "empty file");
  const auto header = split_csv_line(line);
  if (header.size() < kFixedCount) throw IoError(path, "missing trace columns");
  for (std::size_t i = 0; i < kFixedCount; ++i) {
    if (header[i] != kFixedColumns[i]) throw IoError(path, "unexpected column '" + header[i] + "'");
  }
  // dec_xhat{i}_y{j}: recover the cluster and label counts from the last column.
  Index max_clusters = 0;
  Index n_y = 0;
  if (header.size() > kFixedCount) {
    const std::string& last = header.back();
    const auto y_pos = last.rfind("_y");
    if (last.rfind("dec_xhat", 0) != 0 || y_pos == std::string::npos) {
      throw IoError(path, "bad decoder column '" + last + "'");
    }
    max_clusters = std::stol(last.substr(8, y_pos - 8)) + 1;
    n_y = std::stol(last.substr(y_pos + 2)) + 1;
    if (static_cast<Index>(header.size() - kFixedCount) != max_clusters * n_y) {
      throw IoError(path, "decoder column count does not match its labels");
    }
  }

  AnnealTrace trace;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) throw IoError(path, "line " + std::to_string(line_no) + ": wrong cell count");
    try {
      trace.framework = parse_framework(cells[0]);
      AnnealRecord r;
      r.beta = parse_double(cells[1], "beta");
      r.i_x = parse_double(cells[2], "I_x");
      r.i_y = parse_double(cells[3], "I_y");
      r.functional = parse_double(cells[4], "functional");
      r.iterations = std::stoull(cells[5]);
      r.converged = cells[6] == "1";
      r.monotone = cells[7] == "1";
      r.effective_clusters = std::stoull(cells[8]);
      Index rows = 0;
      while (rows < max_clusters && !cells[kFixedCount + static_cast<std::size_t>(rows * n_y)].empty()) ++rows;
      r.decoder.resize(rows, n_y);
      for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < n_y; ++j) {
          r.decoder(i, j) = parse_double(cells[kFixedCount + static_cast<std::size_t>(i * n_y + j)], "decoder");
        }
      }
      trace.records.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw IoError(path, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return trace;
}

json grid_to_json(const GridSpec& g) {
  return {{"beta_min", g.beta_min},
          {"beta_max", g.beta_max},
          {"points", g.points},
          {"spacing", g.spacing == Spacing::Log ? "log" : "linear"}};
}

GridSpec grid_from_json(const json& j) {
  GridSpec g;
  g.beta_min = j.at("beta_min").get<double>();
  g.beta_max = j.at("beta_max").get<double>();
  g.points = j.at("points").get<std::size_t>();
  g.spacing = j.at("spacing").get<std::string>() == "log" ? Spacing::Log : Spacing::Linear;
  return g;
}

json trace_to_json(const AnnealTrace& trace) {
  json records = json::array();
  for (const auto& r : trace.records) {
    json dec = json::array();
    for (Index i = 0; i < r.decoder.rows(); ++i) {
      json row = json::array();
      for (Index j = 0; j < r.decoder.cols(); ++j) row.push_back(r.decoder(i, j));
      dec.push_back(std::move(row));
    }
    records.push_back({{"beta", r.beta},
                       {"I_x", r.i_x},
                       {"I_y", r.i_y},
                       {"functional", r.functional},
                       {"iterations", r.iterations},
                       {"converged", r.converged},
                       {"monotone", r.monotone},
                       {"effective_clusters", r.effective_clusters},
                       {"decoder", std::move(dec)}});
  }
  return {{"framework", std::string(to_string(trace.framework))},
          {"units", "nats"},
          {"grid_spec", trace.grid ? grid_to_json(*trace.grid) : json(nullptr)},
          {"records", std::move(records)}};
}

AnnealTrace trace_from_json(const json& j) {
  AnnealTrace trace;
  trace.framework = parse_framework(j.at("framework").get<std::string>());
  if (j.contains("grid_spec") && !j.at("grid_spec").is_null()) trace.grid = grid_from_json(j.at("grid_spec"));
  for (const auto& jr : j.at("records")) {
    AnnealRecord r;
    r.beta = jr.at("beta").get<double>();
    r.i_x = jr.at("I_x").get<double>();
    r.i_y = jr.at("I_y").get<double>();
    r.functional = jr.at("functional").get<double>();
    r.iterations = jr.at("iterations").get<std::size_t>();
    r.converged = jr.at("converged").get<bool>();
    r.monotone = jr.at("monotone").get<bool>();
    r.effective_clusters = jr.at("effective_clusters").get<std::size_t>();
    const auto& dec = jr.at("decoder");
    const auto rows = static_cast<Index>(dec.size());
    const auto cols = rows ? static_cast<Index>(dec.at(0).size()) : Index{0};
    r.decoder.resize(rows, cols);
    for (Index i = 0; i < rows; ++i) {
      for (Index k = 0; k < cols; ++k) r.decoder(i, k) = dec.at(i).at(k).get<double>();
    }
    trace.records.push_back(std::move(r));
  }
  return trace;
}

}  // namespace

TraceFormat trace_format_from_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".csv") return TraceFormat::Csv;
  if (ext == ".json") return TraceFormat::Json;
  throw ValidationError("format", "cannot infer trace format from '" + path.string() + "'");
}

void export_trace(const AnnealTrace& trace, const std::filesystem::path& path, TraceFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  if (format == TraceFormat::Csv) {
    write_csv(trace, out);
  } else {
    out << trace_to_json(trace).dump(1) << '\n';
  }
  if (!out) throw IoError(path.string(), "write failed");
}

AnnealTrace import_trace(const std::filesystem::path& path, TraceFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  if (format == TraceFormat::Csv) return read_csv(in, path.string());
  try {
    return trace_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw IoError(path.string(), e.what());
  }
}

}  // namespace bottleneck
