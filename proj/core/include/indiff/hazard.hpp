#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "indiff/random.hpp"
#include "indiff/statistics.hpp"
#include "indiff/time_grid.hpp"

namespace indiff {

/// Mean-reverting Brownian Gompertz force of mortality
///   lambda_t = lambda0 exp(c1 t + c2 Y_t),  dY = -m Y dt + dZ,  Y_0 = 0.
struct GompertzParams {
  double c1 = 0.083;
  double c2 = 0.1;
  double mean_reversion = 0.5;
  double lambda0 = 0.01;
};

/// Hazard coefficients b, c constant on [start, next start), independent of
/// lambda. b = c = 0 gives a constant force of mortality.
struct HazardSegment {
  double start = 0.0;
  double drift = 0.0;
  double volatility = 0.0;
};

using HazardCoefficientFn = std::function<double(double t, double lambda)>;

/// d lambda = b(t, lambda) lambda dt + c(t, lambda) lambda dZ.
class HazardModel {
 public:
  HazardModel(HazardCoefficientFn drift, HazardCoefficientFn volatility, double lambda0, bool deterministic = false);

  static HazardModel constant(double lambda);
  static HazardModel piecewise(double lambda0, std::vector<HazardSegment> segments);

  double drift(double t, double lambda) const { return drift_(t, lambda); }
  double volatility(double t, double lambda) const { return volatility_(t, lambda); }
  double initial() const noexcept { return lambda0_; }
  /// True when c == 0 identically, so lambda follows an ODE.
  bool deterministic() const noexcept { return deterministic_; }
  const std::optional<GompertzParams>& gompertz() const noexcept { return gompertz_; }

  /// Same dynamics started from another lambda0. For the Gompertz model this
  /// rescales the whole family (lambda0 also enters b).
  HazardModel with_initial(double lambda0) const;

 private:
  friend HazardModel gompertz_as_general(const GompertzParams& params);

  HazardCoefficientFn drift_;
  HazardCoefficientFn volatility_;
  double lambda0_;
  bool deterministic_;
  std::optional<GompertzParams> gompertz_;
  std::vector<HazardSegment> segments_;
};

/// General-form coefficients
///   b(t, lambda) = c1 + m ln(lambda0) + c2^2/2 - m ln(lambda) + m c1 t,   c = c2.
/// The Gompertz parameters are kept so simulation can use the exact
/// Ornstein-Uhlenbeck transition of Y.
HazardModel gompertz_as_general(const GompertzParams& params);

enum class HazardScheme {
  Auto,      // exact OU transition for Gompertz, log-Euler otherwise
  LogEuler,  // Euler on ln lambda with drift b - c^2/2, for any model
};

/// lambda on `grid`, starting from `start_lambda` at grid.start().
std::vector<double> simulate_hazard(const HazardModel& model, const TimeGrid& grid, Stream& stream,
                                    HazardScheme scheme = HazardScheme::Auto);
std::vector<double> simulate_hazard(const HazardModel& model, const TimeGrid& grid, double start_lambda,
                                    Stream& stream, HazardScheme scheme = HazardScheme::Auto);

/// Trapezoid rule for int lambda on the grid.
double integrate_path(const TimeGrid& grid, const std::vector<double>& lambda);

struct SurvivalOptions {
  std::size_t paths = 5000;
  double time_step = 0.01;
  RngSpec rng{};
  unsigned threads = 0;
  HazardScheme scheme = HazardScheme::Auto;
};

struct SurvivalEstimate {
  double value = 1.0;
  double std_error = 0.0;
  std::size_t paths = 0;
};

/// Per-path survival factors exp(-int_t^T lambda) for lambda_t = lambda.
/// Path p uses the HazardBrownian stream of path p, so two calls with the
/// same RngSpec share their random numbers.
std::vector<double> survival_samples(const HazardModel& model, double t, double lambda, double maturity,
                                     const SurvivalOptions& options);

/// E_{t,lambda}[exp(-int_t^T lambda_v dv)] by Monte Carlo.
SurvivalEstimate survival_probability(const HazardModel& model, double t, double lambda, double maturity,
                                      const SurvivalOptions& options);

/// Survival factor along the deterministic hazard path (requires c == 0),
/// from a fine RK4 integration of (ln lambda, int lambda).
double deterministic_survival(const HazardModel& model, double t, double lambda, double maturity,
                              std::size_t steps = 20000);

}  // namespace indiff
