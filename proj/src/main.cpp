#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "curiefield/experiments.hpp"
#include "curiefield/report.hpp"

namespace {

using namespace curiefield;

enum Exit { ok = 0, failed = 1, unknown = 2, invalid = 3, io = 4 };

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto a = item.find_first_not_of(" \t");
    const auto b = item.find_last_not_of(" \t");
    if (a != std::string::npos) {
      out.push_back(item.substr(a, b - a + 1));
    }
  }
  return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  T value{};
  in >> value;
  if (in.fail() || !in.eof()) {
    throw InvalidConfig("bad value for " + key + ": '" + text + "'");
  }
  return value;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  for (const auto& item : split(text)) {
    out.push_back(parse_number<T>(key, item));
  }
  return out;
}

// Flat key = value lines (# comments), or a JSON object.
std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ReportIoError("cannot read config file " + path);
  }
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  std::map<std::string, std::string> kv;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw InvalidConfig("config file " + path + ": " + e.what());
    }
    for (const auto& [k, v] : j.items()) {
      if (v.is_string()) {
        kv[k] = v.get<std::string>();
      } else if (v.is_array()) {
        std::string s;
        for (const auto& x : v) {
          s += (s.empty() ? "" : ",") + (x.is_string() ? x.get<std::string>() : x.dump());
        }
        kv[k] = s;
      } else {
        kv[k] = v.dump();
      }
    }
    return kv;
  }
  std::istringstream lines(text);
  std::string line;
  int number = 0;
  while (std::getline(lines, line)) {
    ++number;
    line = line.substr(0, line.find('#'));
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidConfig(path + ":" + std::to_string(number) + ": expected key = value");
    }
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

void apply(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "n") {
    cfg.n = parse_list<int>(key, value);
  } else if (key == "beta") {
    cfg.beta = parse_list<double>(key, value);
  } else if (key == "gamma") {
    cfg.gamma = parse_list<double>(key, value);
  } else if (key == "replicas") {
    cfg.replicas = parse_number<std::size_t>(key, value);
  } else if (key == "seed") {
    cfg.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "workers") {
    cfg.workers = parse_number<int>(key, value);
  } else if (key == "contour-c") {
    cfg.contour_c = parse_number<double>(key, value);
  } else if (key == "contour-T") {
    cfg.contour_height = parse_number<double>(key, value);
  } else if (key == "contour-h") {
    cfg.contour_step = parse_number<double>(key, value);
  } else if (key == "graph") {
    cfg.graph = split(value);
  } else if (key == "steps") {
    cfg.steps = parse_number<long>(key, value);
  } else if (key == "out-dir") {
    cfg.out_dir = value;
  } else if (key == "format") {
    cfg.format = value;
  } else {
    throw InvalidConfig("unknown config key: " + key);
  }
}

int list_experiments(bool json) {
  if (json) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& e : experiment_registry()) {
      out.push_back({{"name", e.name},
                     {"anchor", e.anchor},
                     {"description", e.description},
                     {"needs_seed", e.stochastic}});
    }
    std::cout << out.dump(2) << '\n';
    return ok;
  }
  for (const auto& e : experiment_registry()) {
    std::cout << e.name << "\n    " << e.anchor << "\n    " << e.description << '\n';
  }
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Curie-Weiss randomisation and contour-field verification experiments"};
  std::string command;
  bool json = false;
  std::string config_path;
  std::map<std::string, std::string> flags;
  app.add_option("command", command, "'list' or an experiment name")->required();
  app.add_flag("--json", json, "machine-readable output for 'list'");
  app.add_option("--config", config_path, "key = value file or JSON object; flags override it");
  const std::vector<std::pair<std::string, std::string>> options = {
      {"beta", "inverse temperature (comma list where the experiment sweeps it)"},
      {"gamma", "critical-window parameter, beta_n = 1 - gamma / sqrt(n) (comma list)"},
      {"n", "system sizes, comma list"},
      {"replicas", "Monte Carlo replicas"},
      {"seed", "master seed (required by stochastic experiments)"},
      {"workers", "worker threads"},
      {"contour-c", "abscissa c of the Bromwich line"},
      {"contour-T", "contour height T"},
      {"contour-h", "trapezoid step h"},
      {"graph", "Ising graphs: vertex, edge, edgelessK, pathK, cycleK, torusN, torusNxN"},
      {"steps", "MCMC sweeps after burn-in"},
      {"out-dir", "output directory (default $CURIEFIELD_OUT_DIR or ./curiefield-out)"},
      {"format", "json, csv or both"},
  };
  for (const auto& [name, help] : options) {
    app.add_option("--" + name, flags[name], help);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : invalid;
  }

  if (command == "list") {
    return list_experiments(json);
  }
  try {
    ExperimentConfig cfg;
    cfg.name = command;
    find_experiment(command);
    if (!config_path.empty()) {
      for (const auto& [k, v] : read_config_file(config_path)) {
        apply(cfg, k, v);
      }
    }
    for (const auto& [name, _] : options) {
      if (app.get_option("--" + name)->count() > 0) {
        apply(cfg, name, flags[name]);
      }
    }
    if (cfg.out_dir.empty()) {
      const char* env = std::getenv("CURIEFIELD_OUT_DIR");
      cfg.out_dir = env && *env ? env : "curiefield-out";
    }
    if (cfg.format != "json" && cfg.format != "csv" && cfg.format != "both") {
      throw InvalidConfig("--format must be json, csv or both");
    }
    const auto report = run_experiment(cfg);
    for (const auto& v : report.verdicts) {
      std::cout << (v.pass ? "PASS  " : "FAIL  ") << v.name << " = " << v.value << " ("
                << relation_name(v.relation) << ' ' << v.threshold << ")\n";
    }
    for (const auto& path : write_report(report, cfg.out_dir, cfg.format)) {
      std::cout << "wrote " << path.string() << '\n';
    }
    std::cout << report.name << ": " << (report.passed() ? "PASS" : "FAIL") << " in "
              << report.wall_clock_seconds << " s\n";
    return report.passed() ? ok : failed;
  } catch (const UnknownExperiment& e) {
    std::cerr << "error: " << e.what() << " (see 'curiefield list')\n";
    return unknown;
  } catch (const ReportIoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return io;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: invalid parameters: " << e.what() << '\n';
    return invalid;
  } catch (const std::domain_error& e) {
    std::cerr << "error: invalid parameters: " << e.what() << '\n';
    return invalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return failed;
  }
}
