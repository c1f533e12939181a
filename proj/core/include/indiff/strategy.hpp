#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "indiff/market.hpp"
#include "indiff/regime_chain.hpp"
#include "indiff/time_grid.hpp"

namespace indiff {

/// Point (t, regime) at which the insurer's investment problem is solved,
/// for risk aversion alpha and horizon T. The market is borrowed.
struct StrategyQuery {
  const MarketParams& market;
  double t = 0.0;
  std::size_t regime = 0;
  double alpha = 1.0;
  double horizon = 1.0;
};

struct OptimalStrategy {
  double pi_star = 0.0;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  /// Value of the first-order condition at pi_star.
  double residual = 0.0;
  int iterations = 0;
  /// True when the analytic bracket failed its sign check and was widened.
  bool widened = false;
};

/// Psi-bar of the reduced HJB equation as a function of the stock amount Pi:
///   -a(mu-r)Pi + a^2 sigma^2 Pi^2 / 2 + Theta1 (e^{-a Pi K1} - 1) + Theta2 (e^{a Pi K2} - 1),
/// with a = alpha e^{r(T-t)}. Exponent arguments above 700 give +inf.
double psi_bar(double pi, const StrategyQuery& query);

/// First-order condition
///   sigma^2 a Pi - (mu - r) - K1 Theta1 e^{-a Pi K1} + K2 Theta2 e^{a Pi K2},
/// i.e. dPsi/dPi divided by a. Strictly increasing in Pi.
double first_order_condition(double pi, const StrategyQuery& query);

/// Analytic bracket for Pi*:
///   lower = min{0, ln((mu - r) / M2) / a},   upper = (mu - r + Kbar M1) / (sigma^2 a),
/// with M1, M2 the intensity bounds and Kbar the bound on K1.
std::pair<double, double> strategy_bounds(const StrategyQuery& query);

/// Unique root of the first-order condition by Newton's method safeguarded
/// with bisection inside the sign-checked bracket. `warm_start`, if inside
/// the bracket, replaces the midpoint as the first iterate.
OptimalStrategy solve_pi_star(const StrategyQuery& query, std::optional<double> warm_start = std::nullopt);

/// inf over Pi of psi_bar, i.e. psi_bar at the root.
double min_psi_bar(const StrategyQuery& query, std::optional<double> warm_start = std::nullopt,
                   double* argmin = nullptr);

struct StrategyTrajectory {
  std::vector<double> times;
  std::vector<std::size_t> regimes;
  std::vector<double> pi_star;
};

/// Pi*_t = Pi*(t, X_t) on `grid` with the switch times of the path inserted;
/// at a switch time the new regime applies.
StrategyTrajectory strategy_path(const RegimePath& regime_path, double alpha, const MarketParams& market,
                                 double horizon, const TimeGrid& grid);

}  // namespace indiff
