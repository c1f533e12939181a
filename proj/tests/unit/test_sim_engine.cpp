#include <doctest.h>

#include <indiff/sim_engine.hpp>
#include <indiff/strategy.hpp>

#include <cmath>
#include <random>

using namespace indiff;

namespace {

MarketParams reference_market() {
  return MarketParams::constant(0.05, {{0.15, 0.15, 0.15, 0.3}, {0.12, 0.25, 0.1, 0.35}}, 0.3, 0.4);
}
GeneratorMatrix table_generator() { return validate_generator({{-0.2, 0.2}, {0.1, -0.1}}); }

bool same_paths(const ScenarioSet& a, const ScenarioSet& b) {
  if (a.paths.size() != b.paths.size()) return false;
  for (std::size_t p = 0; p < a.paths.size(); ++p) {
    const auto& x = a.paths[p];
    const auto& y = b.paths[p];
    if (x.stock.times != y.stock.times || x.stock.values != y.stock.values || x.hazard != y.hazard) return false;
    if (x.wealth.has_value() != y.wealth.has_value()) return false;
    if (x.wealth && x.wealth->values != y.wealth->values) return false;
  }
  return a.stock_end.mean == b.stock_end.mean && a.survival.mean == b.survival.mean &&
         a.wealth_end.mean == b.wealth_end.mean;
}

}  // namespace

TEST_CASE("scenarios are deterministic and independent of the thread count") {
  const auto m = reference_market();
  const auto hazard = gompertz_as_general(GompertzParams{});
  const StrategyFn pi = [&](double t, std::size_t i) { return solve_pi_star(StrategyQuery{m, t, i, 1.0, 10.0}).pi_star; };
  ScenarioOptions o;
  o.paths = 1;
  o.steps = 200;
  const auto a = run_scenarios(m, table_generator(), hazard, pi, o);
  const auto b = run_scenarios(m, table_generator(), hazard, pi, o);
  CHECK(same_paths(a, b));

  o.paths = 300;
  o.threads = 1;
  const auto serial = run_scenarios(m, table_generator(), hazard, pi, o);
  o.threads = 4;
  const auto threaded = run_scenarios(m, table_generator(), hazard, pi, o);
  CHECK(same_paths(serial, threaded));
}

TEST_CASE("full-size configuration completes with finite summaries") {
  ScenarioOptions o;
  o.keep_paths = false;
  const auto set = run_scenarios(reference_market(), table_generator(), gompertz_as_general(GompertzParams{}),
                                 std::nullopt, o);
  CHECK(set.summaries.size() == 5000);
  CHECK(set.paths.empty());
  CHECK(std::isfinite(set.stock_end.mean));
  CHECK(std::isfinite(set.stock_end.std_error));
  CHECK(set.survival.mean > 0.0);
  CHECK(set.survival.mean < 1.0);
  // Poisson mean of N^1_T with Theta1 = 0.3, T = 10
  CHECK(std::abs(set.up_jumps.mean - 3.0) < 4.0 * set.up_jumps.std_error);
  CHECK(std::abs(set.down_jumps.mean - 4.0) < 4.0 * set.down_jumps.std_error);
}

TEST_CASE("every path grid contains its switch times") {
  ScenarioOptions o;
  o.paths = 50;
  o.steps = 100;
  const auto set = run_scenarios(reference_market(), table_generator(), HazardModel::constant(0.02), std::nullopt, o);
  for (const auto& p : set.paths) {
    for (double s : p.stock.regime_path.switch_times) {
      bool found = false;
      for (double t : p.stock.times) found = found || t == s;
      CHECK(found);
    }
    CHECK(p.hazard.size() == p.stock.times.size());
  }
}

TEST_CASE("expectations") {
  ScenarioOptions o;
  o.paths = 500;
  o.steps = 100;
  o.w0 = 1.5;
  const StrategyFn none = [](double, std::size_t) { return 0.0; };
  const auto set = run_scenarios(reference_market(), table_generator(), HazardModel::constant(0.02), none, o);

  const auto one = estimate_expectation(set, PathFunctional([](const ScenarioPath&) { return 1.0; }));
  CHECK(one.mean == 1.0);
  CHECK(one.std_error == 0.0);

  const auto surv = estimate_expectation(set, SummaryFunctional([](const PathSummary& s) {
                                           return std::exp(-s.integrated_hazard);
                                         }));
  CHECK(std::abs(surv.mean - std::exp(-0.2)) <= std::max(3.0 * surv.std_error, 1e-12));

  const auto util = estimate_expectation(set, PathFunctional([](const ScenarioPath& p) {
                                           return -std::exp(-p.wealth->values.back());
                                         }));
  CHECK(util.mean == -std::exp(-1.5 * std::exp(0.05 * 10.0)));
  CHECK(util.std_error == 0.0);

  ScenarioOptions lean = o;
  lean.keep_paths = false;
  const auto bare = run_scenarios(reference_market(), table_generator(), HazardModel::constant(0.02), none, lean);
  CHECK_THROWS(estimate_expectation(bare, PathFunctional([](const ScenarioPath&) { return 1.0; })));
}

TEST_CASE("stock and hazard noise are uncorrelated") {
  // With m = 0 and c1 = 0 the increments of ln(lambda) are c2 dZ exactly.
  const auto hazard = gompertz_as_general(GompertzParams{0.0, 0.1, 0.0, 0.01});
  ScenarioOptions o;
  o.paths = 200;
  o.steps = 200;
  const auto m = MarketParams::constant(0.05, {{0.15, 0.15, 0.15, 0.3}}, 0.3, 0.4);
  const auto set = run_scenarios(m, validate_generator({{0.0}}), hazard, std::nullopt, o);
  double sxy = 0, sxx = 0, syy = 0;
  std::size_t n = 0;
  for (const auto& p : set.paths) {
    for (std::size_t k = 0; k + 1 < p.hazard.size(); ++k) {
      const double x = p.stock.brownian[k];
      const double y = std::log(p.hazard[k + 1] / p.hazard[k]);
      sxy += x * y;
      sxx += x * x;
      syy += y * y;
      ++n;
    }
  }
  CHECK(std::abs(sxy / std::sqrt(sxx * syy)) < 4.0 / std::sqrt(static_cast<double>(n)));
}
