#include <gtest/gtest.h>

#include <set>

#include "curiefield/experiments.hpp"
#include "curiefield/report.hpp"

using namespace curiefield;

TEST(Registry, FourteenNamesWithAnchors) {
  const auto& reg = experiment_registry();
  ASSERT_EQ(reg.size(), 14u);
  std::set<std::string> names;
  for (const auto& e : reg) {
    names.insert(e.name);
    EXPECT_FALSE(e.anchor.empty()) << e.name;
    EXPECT_FALSE(e.description.empty()) << e.name;
  }
  EXPECT_EQ(names.size(), 14u);
  for (const char* n : {"verify-definetti", "verify-laplace-indicator", "verify-decomposition", "verify-subcritical",
                        "verify-critical", "verify-window", "verify-supercritical", "verify-bridge", "verify-sheet",
                        "verify-functional-supercritical", "verify-functional-subcritical", "verify-series",
                        "verify-ising", "verify-gumbel"}) {
    EXPECT_TRUE(names.count(n)) << n;
  }
  EXPECT_THROW(find_experiment("verify-nothing"), UnknownExperiment);
}

TEST(Config, SeedRequiredForStochasticExperiments) {
  ExperimentConfig cfg;
  cfg.name = "verify-subcritical";
  EXPECT_THROW(run_experiment(cfg), InvalidConfig);
  cfg.name = "verify-series";
  EXPECT_NO_THROW(run_experiment(cfg));
}

TEST(Config, RejectsBadParameters) {
  ExperimentConfig cfg;
  cfg.name = "verify-subcritical";
  cfg.seed = 1;
  cfg.n = {1024, 256};
  EXPECT_THROW(run_experiment(cfg), InvalidConfig);
  cfg.n = {64};
  cfg.beta = {1.5};
  EXPECT_THROW(run_experiment(cfg), std::domain_error);
  cfg.beta = {0.5};
  cfg.workers = 0;
  EXPECT_THROW(run_experiment(cfg), InvalidConfig);
}

TEST(Report, EveryVerdictHasItsThreshold) {
  ExperimentConfig cfg;
  cfg.name = "verify-subcritical";
  cfg.seed = 3;
  cfg.n = {64, 256};
  cfg.replicas = 2000;
  const auto r = run_experiment(cfg);
  for (const auto& v : r.verdicts) {
    ASSERT_TRUE(r.statistics.count(v.name + ".threshold")) << v.name;
    EXPECT_EQ(r.statistics.at(v.name + ".threshold"), v.threshold);
  }
  const auto j = report_json(r);
  EXPECT_EQ(j["schema"], "1");
  EXPECT_EQ(j["name"], "verify-subcritical");
  EXPECT_EQ(j["seeds"].size(), 2u);
  EXPECT_TRUE(j["statistics"].contains("ks[n=256]"));
  EXPECT_EQ(r.tables.at("histogram").columns, (std::vector<std::string>{"bin_left", "bin_right", "count", "density"}));
  EXPECT_EQ(r.tables.at("cdf").columns, (std::vector<std::string>{"x", "empirical", "limit"}));
}

TEST(Report, StatisticsIndependentOfWorkerCount) {
  for (const char* name : {"verify-subcritical", "verify-supercritical", "verify-sheet", "verify-ising"}) {
    ExperimentConfig cfg;
    cfg.name = name;
    cfg.seed = 11;
    cfg.replicas = 3000;
    cfg.n = {512};
    if (std::string(name) == "verify-ising") {
      cfg.n.clear();
      cfg.replicas = 100000;
      cfg.steps = 5000;
      cfg.graph = {"edge", "cycle4"};
    }
    std::string reference;
    for (int workers : {1, 4, 8}) {
      cfg.workers = workers;
      auto j = report_json(run_experiment(cfg));
      j.erase("wall_clock_seconds");
      j.erase("workers");
      if (reference.empty()) {
        reference = j.dump();
      }
      EXPECT_EQ(j.dump(), reference) << name << " workers=" << workers;
    }
  }
}

TEST(Report, SameSeedSameStatisticsDifferentSeedDifferent) {
  ExperimentConfig cfg;
  cfg.name = "verify-gumbel";
  cfg.seed = 5;
  cfg.replicas = 100000;
  const auto a = run_experiment(cfg);
  const auto b = run_experiment(cfg);
  EXPECT_EQ(a.statistics, b.statistics);
  cfg.seed = 6;
  EXPECT_NE(run_experiment(cfg).statistics, a.statistics);
}
