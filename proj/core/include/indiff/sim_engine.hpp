#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "indiff/hazard.hpp"
#include "indiff/market.hpp"
#include "indiff/random.hpp"
#include "indiff/regime_chain.hpp"
#include "indiff/statistics.hpp"
#include "indiff/time_grid.hpp"

namespace indiff {

struct ScenarioOptions {
  std::size_t paths = 5000;
  double horizon = 10.0;
  std::size_t steps = 1000;
  RngSpec rng{};
  unsigned threads = 0;
  std::size_t initial_regime = 0;
  double s0 = 1.0;
  double w0 = 0.0;
  /// Keep full paths; otherwise only per-path summaries survive.
  bool keep_paths = true;
  JumpSampling jumps = JumpSampling::Poisson;
  HazardScheme hazard_scheme = HazardScheme::Auto;
};

struct ScenarioPath {
  StockPath stock;  // owns the regime path and the path grid
  std::vector<double> hazard;
  std::optional<WealthPath> wealth;
};

struct PathSummary {
  double stock_end = 0.0;
  double hazard_end = 0.0;
  double integrated_hazard = 0.0;
  double wealth_end = 0.0;
  std::size_t switches = 0;
  std::size_t up_jumps = 0;
  std::size_t down_jumps = 0;
  std::size_t final_regime = 0;
};

struct ScenarioSet {
  TimeGrid grid;  // shared base grid; each path adds its own switch times
  RngSpec rng;
  std::vector<PathSummary> summaries;
  std::vector<ScenarioPath> paths;  // empty unless keep_paths

  MeanEstimate stock_end;
  MeanEstimate wealth_end;
  MeanEstimate survival;  // exp(-int lambda)
  MeanEstimate up_jumps;
  MeanEstimate down_jumps;
};

/// Joint regime, stock, hazard and (with a strategy) wealth paths. Path p
/// reads only the streams of path p, so the set is bit-identical for every
/// thread count.
ScenarioSet run_scenarios(const MarketParams& market, const GeneratorMatrix& gen, const HazardModel& hazard,
                          const std::optional<StrategyFn>& strategy, const ScenarioOptions& options);

using PathFunctional = std::function<double(const ScenarioPath&)>;
using SummaryFunctional = std::function<double(const PathSummary&)>;

/// Sample mean and standard error of a path functional (needs kept paths).
MeanEstimate estimate_expectation(const ScenarioSet& set, const PathFunctional& functional);
MeanEstimate estimate_expectation(const ScenarioSet& set, const SummaryFunctional& functional);

}  // namespace indiff
