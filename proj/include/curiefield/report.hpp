#ifndef CURIEFIELD_REPORT_HPP
#define CURIEFIELD_REPORT_HPP

// JSON and CSV serialisation of experiment reports.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "curiefield/experiments.hpp"

namespace curiefield {

inline constexpr const char* kVersion = "1.0.0";

class ReportIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline nlohmann::json number(double x) {
  return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

}  // namespace detail

// Everything except wall-clock time and worker count is a pure function of
// the configuration and seed.
inline nlohmann::json report_json(const ExperimentReport& r) {
  using nlohmann::json;
  json j;
  j["schema"] = "1";
  j["version"] = kVersion;
  j["name"] = r.name;
  j["anchor"] = r.anchor;
  j["params"] = r.params;
  j["sample_sizes"] = json::object();
  for (const auto& [k, v] : r.sample_sizes) {
    j["sample_sizes"][k] = detail::number(v);
  }
  j["statistics"] = json::object();
  for (const auto& [k, v] : r.statistics) {
    j["statistics"][k] = detail::number(v);
  }
  j["matrices"] = json::object();
  for (const auto& [k, m] : r.matrices) {
    json rows = json::array();
    for (const auto& row : m) {
      json out = json::array();
      for (double x : row) {
        out.push_back(detail::number(x));
      }
      rows.push_back(out);
    }
    j["matrices"][k] = rows;
  }
  j["verdicts"] = json::array();
  for (const auto& v : r.verdicts) {
    j["verdicts"].push_back({{"name", v.name},
                             {"value", detail::number(v.value)},
                             {"relation", relation_name(v.relation)},
                             {"threshold", detail::number(v.threshold)},
                             {"pass", v.pass}});
  }
  j["seeds"] = r.seeds;
  j["passed"] = r.passed();
  j["wall_clock_seconds"] = r.wall_clock_seconds;
  j["workers"] = r.workers;
  return j;
}

inline void write_csv(const std::filesystem::path& path, const Table& t) {
  std::ofstream out(path);
  if (!out) {
    throw ReportIoError("cannot open " + path.string() + " for writing");
  }
  out.precision(17);
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    out << (i ? "," : "") << t.columns[i];
  }
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << (i ? "," : "") << row[i];
    }
    out << '\n';
  }
  if (!out) {
    throw ReportIoError("write failed for " + path.string());
  }
}

inline std::string file_stem(std::string key) {
  for (char& c : key) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '.') {
      c = '_';
    }
  }
  return key;
}

// <dir>/<name>.json and <dir>/<name>_<table>.csv; returns the files written.
inline std::vector<std::filesystem::path> write_report(const ExperimentReport& r,
                                                       const std::filesystem::path& dir,
                                                       const std::string& format) {
  if (format != "json" && format != "csv" && format != "both") {
    throw InvalidConfig("--format must be json, csv or both");
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw ReportIoError("cannot create " + dir.string() + ": " + ec.message());
  }
  std::vector<std::filesystem::path> written;
  if (format != "csv") {
    const auto path = dir / (r.name + ".json");
    std::ofstream out(path);
    if (!out) {
      throw ReportIoError("cannot open " + path.string() + " for writing");
    }
    out << report_json(r).dump(2) << '\n';
    if (!out) {
      throw ReportIoError("write failed for " + path.string());
    }
    written.push_back(path);
  }
  if (format != "json") {
    for (const auto& [key, table] : r.tables) {
      const auto path = dir / (r.name + "_" + file_stem(key) + ".csv");
      write_csv(path, table);
      written.push_back(path);
    }
    for (const auto& [key, m] : r.matrices) {
      Table t;
      for (std::size_t i = 0; i < (m.empty() ? 0 : m.front().size()); ++i) {
        t.columns.push_back("c" + std::to_string(i));
      }
      t.rows = m;
      const auto path = dir / (r.name + "_" + file_stem(key) + ".csv");
      write_csv(path, t);
      written.push_back(path);
    }
  }
  return written;
}

}  // namespace curiefield

#endif  // CURIEFIELD_REPORT_HPP
