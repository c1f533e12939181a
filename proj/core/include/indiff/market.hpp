#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "indiff/random.hpp"
#include "indiff/regime_chain.hpp"
#include "indiff/time_grid.hpp"

namespace indiff {

/// Stock coefficients of one regime: drift mu, volatility sigma, relative
/// upward jump K1 and relative downward jump K2.
struct RegimeCoefficients {
  double mu = 0.0;
  double sigma = 0.0;
  double jump_up = 0.0;
  double jump_down = 0.0;
};

/// Coefficients in force from `start` until the next segment begins.
struct MarketSegment {
  double start = 0.0;
  std::vector<RegimeCoefficients> regimes;
  double theta_up = 0.0;    // intensity of N^1
  double theta_down = 0.0;  // intensity of N^2
};

/// Constants of the standing assumptions, taken as maxima over the
/// coefficient tables.
struct AssumptionBounds {
  double theta_up_max = 0.0;    // M1
  double theta_down_max = 0.0;  // M2
  double sharpe_max = 0.0;      // C: max (mu - r) / sigma
  double jump_up_max = 0.0;     // bound on K1
};

enum class ParamCheck {
  /// mu > r, sigma > 0, K1 > 0, 0 < K2 < 1, intensities >= 0.
  Strict,
  /// Also accepts sigma = 0, K1 = 0 and mu <= r; for simulation experiments
  /// such as deterministic limits or martingale checks.
  SimulationOnly,
};

/// Regime-modulated jump-diffusion market with piecewise-constant-in-time
/// coefficient tables and a constant riskless rate.
class MarketParams {
 public:
  MarketParams(double rate, std::vector<MarketSegment> segments, ParamCheck check = ParamCheck::Strict);

  static MarketParams constant(double rate, std::vector<RegimeCoefficients> regimes, double theta_up,
                               double theta_down, ParamCheck check = ParamCheck::Strict);

  double rate() const noexcept { return rate_; }
  std::size_t regime_count() const noexcept { return segments_.front().regimes.size(); }
  const RegimeCoefficients& coefficients(double t, std::size_t regime) const;
  double theta_up(double t) const { return segment(t).theta_up; }
  double theta_down(double t) const { return segment(t).theta_down; }
  const AssumptionBounds& bounds() const noexcept { return bounds_; }
  bool strict() const noexcept { return check_ == ParamCheck::Strict; }
  const std::vector<MarketSegment>& segments() const noexcept { return segments_; }
  /// Segment start times after 0.
  std::vector<double> breakpoints() const;

 private:
  const MarketSegment& segment(double t) const;

  double rate_;
  std::vector<MarketSegment> segments_;
  AssumptionBounds bounds_;
  ParamCheck check_;
};

/// Amount held in the stock as a function of (t, regime).
using StrategyFn = std::function<double(double t, std::size_t regime)>;
/// Wealth-feedback variant, e.g. full investment Pi = W.
using WealthStrategyFn = std::function<double(double t, std::size_t regime, double wealth)>;

struct StockPath {
  std::vector<double> times;
  std::vector<double> values;
  // Per step k, on [times[k], times[k+1]):
  std::vector<double> brownian;  // increment of Z^S
  std::vector<std::uint32_t> up_jumps;
  std::vector<std::uint32_t> down_jumps;
  std::vector<std::size_t> regimes;  // regime at the left endpoint
  RegimePath regime_path;
};

struct WealthPath {
  std::vector<double> times;
  std::vector<double> values;
  std::vector<double> strategy_values;
};

enum class JumpSampling {
  Poisson,    // exact Poisson counts per step
  Bernoulli,  // at most one jump per step; requires theta * dt <= 1
};

struct StockStreams {
  Stream& brownian;
  Stream& up;
  Stream& down;
};

/// Exact log-scheme: within a step the regime at the left endpoint is used,
/// the diffusion part is exact for constant coefficients and jumps multiply
/// S by (1 + K1) and (1 - K2). Switch times and coefficient breakpoints are
/// inserted into `grid` first.
StockPath simulate_stock(const MarketParams& params, const RegimePath& regime_path, double s0,
                         const TimeGrid& grid, StockStreams streams,
                         JumpSampling sampling = JumpSampling::Poisson);

/// Wealth under `strategy`, reusing the stock path's increments. The step is
/// the left-point discretisation of the discounted solution formula,
///   e^{-r t_{k+1}} W_{k+1} = e^{-r t_k} (W_k + Pi_k [(mu-r) dt + sigma dZ + K1 dN1 - K2 dN2]),
/// which is the Euler scheme in discounted units and exact for Pi = 0.
WealthPath simulate_wealth(const MarketParams& params, const StockPath& stock, const StrategyFn& strategy,
                           double w0);
WealthPath simulate_wealth(const MarketParams& params, const StockPath& stock, const WealthStrategyFn& strategy,
                           double w0);

struct AdmissibilityReport {
  std::vector<double> integrals;  // one per regime
  bool admissible = false;
};

/// Quadrature of int_0^T eta (mu - r + eta sigma^2) ds for every regime;
/// admissible when all of them are finite and eta is non-negative.
AdmissibilityReport check_admissibility_bound(const MarketParams& params, const StrategyFn& eta, double horizon,
                                              std::size_t intervals_per_segment = 2000);

}  // namespace indiff
