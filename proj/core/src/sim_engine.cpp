#include "indiff/sim_engine.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "indiff/error.hpp"
#include "indiff/parallel.hpp"

namespace indiff {
namespace {

MeanEstimate summarize_field(const std::vector<PathSummary>& rows, double (*field)(const PathSummary&)) {
  std::vector<double> values(rows.size());
  for (std::size_t p = 0; p < rows.size(); ++p) values[p] = field(rows[p]);
  return summarize(values);
}

}  // namespace

ScenarioSet run_scenarios(const MarketParams& market, const GeneratorMatrix& gen, const HazardModel& hazard,
                          const std::optional<StrategyFn>& strategy, const ScenarioOptions& options) {
  if (gen.size() != market.regime_count()) {
    throw Error(ErrorCode::InvalidParameter, "generator and market disagree on the number of regimes");
  }
  if (options.initial_regime >= gen.size()) {
    throw Error(ErrorCode::InvalidParameter, "initial regime " + std::to_string(options.initial_regime + 1) +
                                                 " outside 1.." + std::to_string(gen.size()));
  }
  if (!(options.horizon > 0.0) || options.steps == 0) {
    throw Error(ErrorCode::InvalidParameter, "scenario grid needs T > 0 and at least one step");
  }
  ScenarioSet set{TimeGrid::uniform(0.0, options.horizon, options.steps), options.rng, {}, {}, {}, {}, {}, {}, {}};
  set.summaries.resize(options.paths);
  if (options.keep_paths) set.paths.resize(options.paths);
  const auto breakpoints = market.breakpoints();

  parallel_for(options.paths, options.threads, [&](std::size_t p) {
    Stream chain = options.rng.stream(p, Channel::Chain);
    Stream brownian = options.rng.stream(p, Channel::StockBrownian);
    Stream up = options.rng.stream(p, Channel::JumpUp);
    Stream down = options.rng.stream(p, Channel::JumpDown);
    Stream mortality = options.rng.stream(p, Channel::HazardBrownian);

    RegimePath regimes = sample_regime_path(gen, options.initial_regime, options.horizon, chain);
    std::vector<double> events = regimes.switch_times;
    events.insert(events.end(), breakpoints.begin(), breakpoints.end());
    const TimeGrid grid = set.grid.with_points(events);

    ScenarioPath path;
    path.stock = simulate_stock(market, regimes, options.s0, grid, StockStreams{brownian, up, down}, options.jumps);
    path.hazard = simulate_hazard(hazard, grid, mortality, options.hazard_scheme);
    if (strategy) path.wealth = simulate_wealth(market, path.stock, *strategy, options.w0);

    PathSummary& row = set.summaries[p];
    row.stock_end = path.stock.values.back();
    row.hazard_end = path.hazard.back();
    row.integrated_hazard = integrate_path(grid, path.hazard);
    row.wealth_end = path.wealth ? path.wealth->values.back() : options.w0 * std::exp(market.rate() * options.horizon);
    row.switches = path.stock.regime_path.switch_times.size();
    row.up_jumps = std::accumulate(path.stock.up_jumps.begin(), path.stock.up_jumps.end(), std::size_t{0});
    row.down_jumps = std::accumulate(path.stock.down_jumps.begin(), path.stock.down_jumps.end(), std::size_t{0});
    row.final_regime = path.stock.regime_path.states.back();
    if (options.keep_paths) set.paths[p] = std::move(path);
  });

  set.stock_end = summarize_field(set.summaries, [](const PathSummary& r) { return r.stock_end; });
  set.wealth_end = summarize_field(set.summaries, [](const PathSummary& r) { return r.wealth_end; });
  set.survival = summarize_field(set.summaries, [](const PathSummary& r) { return std::exp(-r.integrated_hazard); });
  set.up_jumps = summarize_field(set.summaries, [](const PathSummary& r) { return static_cast<double>(r.up_jumps); });
  set.down_jumps =
      summarize_field(set.summaries, [](const PathSummary& r) { return static_cast<double>(r.down_jumps); });
  return set;
}

MeanEstimate estimate_expectation(const ScenarioSet& set, const PathFunctional& functional) {
  if (set.paths.size() != set.summaries.size()) {
    throw Error(ErrorCode::InvalidParameter, "path functional needs a scenario set with kept paths");
  }
  std::vector<double> values(set.paths.size());
  for (std::size_t p = 0; p < values.size(); ++p) values[p] = functional(set.paths[p]);
  return summarize(values);
}

MeanEstimate estimate_expectation(const ScenarioSet& set, const SummaryFunctional& functional) {
  std::vector<double> values(set.summaries.size());
  for (std::size_t p = 0; p < values.size(); ++p) values[p] = functional(set.summaries[p]);
  return summarize(values);
}

}  // namespace indiff
