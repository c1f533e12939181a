#include "indiff/market.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "indiff/error.hpp"

namespace indiff {
namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorCode::InvalidParameter, message);
}

}  // namespace

MarketParams::MarketParams(double rate, std::vector<MarketSegment> segments, ParamCheck check)
    : rate_(rate), segments_(std::move(segments)), check_(check) {
  require(std::isfinite(rate_), "riskless rate must be finite");
  require(!segments_.empty(), "market needs at least one coefficient segment");
  require(segments_.front().start == 0.0, "first coefficient segment must start at t = 0");
  const std::size_t m = segments_.front().regimes.size();
  require(m > 0, "market needs at least one regime");
  const bool strict = check_ == ParamCheck::Strict;
  for (std::size_t s = 0; s < segments_.size(); ++s) {
    const auto& seg = segments_[s];
    const std::string where = "segment " + std::to_string(s + 1);
    if (s > 0) require(seg.start > segments_[s - 1].start, where + ": start times must increase");
    require(seg.regimes.size() == m, where + ": every segment must list all regimes");
    require(seg.theta_up >= 0.0 && seg.theta_down >= 0.0, where + ": jump intensities must be non-negative");
    bounds_.theta_up_max = std::max(bounds_.theta_up_max, seg.theta_up);
    bounds_.theta_down_max = std::max(bounds_.theta_down_max, seg.theta_down);
    for (std::size_t i = 0; i < m; ++i) {
      const auto& c = seg.regimes[i];
      const std::string reg = where + ", regime " + std::to_string(i + 1);
      require(std::isfinite(c.mu) && std::isfinite(c.sigma) && std::isfinite(c.jump_up) &&
                  std::isfinite(c.jump_down),
              reg + ": coefficients must be finite");
      require(c.jump_down >= 0.0 && c.jump_down < 1.0, reg + ": downward jump K2 must lie in [0, 1)");
      if (strict) {
        require(c.mu > rate_, reg + ": mu must exceed r");
        require(c.sigma > 0.0, reg + ": sigma must be positive");
        require(c.jump_up > 0.0, reg + ": upward jump K1 must be positive");
        require(c.jump_down > 0.0, reg + ": downward jump K2 must be positive");
      } else {
        require(c.sigma >= 0.0 && c.jump_up >= 0.0, reg + ": sigma and K1 must be non-negative");
      }
      bounds_.jump_up_max = std::max(bounds_.jump_up_max, c.jump_up);
      if (c.sigma > 0.0) bounds_.sharpe_max = std::max(bounds_.sharpe_max, (c.mu - rate_) / c.sigma);
    }
  }
}

MarketParams MarketParams::constant(double rate, std::vector<RegimeCoefficients> regimes, double theta_up,
                                    double theta_down, ParamCheck check) {
  return MarketParams(rate, {MarketSegment{0.0, std::move(regimes), theta_up, theta_down}}, check);
}

const MarketSegment& MarketParams::segment(double t) const {
  auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                             [](double v, const MarketSegment& s) { return v < s.start; });
  if (it == segments_.begin()) return segments_.front();
  return *(it - 1);
}

const RegimeCoefficients& MarketParams::coefficients(double t, std::size_t regime) const {
  if (regime >= regime_count()) {
    throw Error(ErrorCode::InvalidParameter, "regime index " + std::to_string(regime) + " out of range");
  }
  return segment(t).regimes[regime];
}

std::vector<double> MarketParams::breakpoints() const {
  std::vector<double> out;
  for (std::size_t s = 1; s < segments_.size(); ++s) out.push_back(segments_[s].start);
  return out;
}

StockPath simulate_stock(const MarketParams& params, const RegimePath& regime_path, double s0,
                         const TimeGrid& grid, StockStreams streams, JumpSampling sampling) {
  require(s0 > 0.0, "initial stock price must be positive");
  std::vector<double> events = regime_path.switch_times;
  const auto bp = params.breakpoints();
  events.insert(events.end(), bp.begin(), bp.end());
  const TimeGrid fine = grid.with_points(events);

  StockPath path;
  path.times = fine.times();
  path.regime_path = regime_path;
  const std::size_t steps = fine.steps();
  path.values.resize(steps + 1);
  path.brownian.resize(steps);
  path.up_jumps.resize(steps);
  path.down_jumps.resize(steps);
  path.regimes.resize(steps);
  path.values[0] = s0;

  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw_jumps = [&](double mean, Stream& stream) -> std::uint32_t {
    if (mean <= 0.0) return 0;
    if (sampling == JumpSampling::Bernoulli) {
      if (mean > 1.0) {
        throw Error(ErrorCode::StepTooCoarse,
                    "theta * dt = " + std::to_string(mean) + " exceeds 1 under Bernoulli jump sampling");
      }
      return unit(stream) < mean ? 1u : 0u;
    }
    std::poisson_distribution<std::uint32_t> poisson(mean);
    return poisson(stream);
  };

  double log_return = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = path.times[k];
    const double dt = path.times[k + 1] - t;
    const std::size_t regime = regime_path.state_at(t);
    const auto& c = params.coefficients(t, regime);
    const double dz = std::sqrt(dt) * normal(streams.brownian);
    const std::uint32_t up = draw_jumps(params.theta_up(t) * dt, streams.up);
    const std::uint32_t down = draw_jumps(params.theta_down(t) * dt, streams.down);
    log_return += (c.mu - 0.5 * c.sigma * c.sigma) * dt + c.sigma * dz;
    if (up > 0) log_return += up * std::log1p(c.jump_up);
    if (down > 0) log_return += down * std::log1p(-c.jump_down);
    path.values[k + 1] = s0 * std::exp(log_return);
    path.brownian[k] = dz;
    path.up_jumps[k] = up;
    path.down_jumps[k] = down;
    path.regimes[k] = regime;
  }
  return path;
}

WealthPath simulate_wealth(const MarketParams& params, const StockPath& stock, const WealthStrategyFn& strategy,
                           double w0) {
  const double r = params.rate();
  const std::size_t steps = stock.times.size() - 1;
  WealthPath out;
  out.times = stock.times;
  out.values.resize(steps + 1);
  out.strategy_values.resize(steps + 1);
  out.values[0] = w0;
  double discounted = w0;
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = stock.times[k];
    const double dt = stock.times[k + 1] - t;
    const std::size_t regime = stock.regimes[k];
    const auto& c = params.coefficients(t, regime);
    const double pi = strategy(t, regime, out.values[k]);
    out.strategy_values[k] = pi;
    const double excess_return = (c.mu - r) * dt + c.sigma * stock.brownian[k] +
                                 c.jump_up * stock.up_jumps[k] - c.jump_down * stock.down_jumps[k];
    discounted += std::exp(-r * t) * pi * excess_return;
    out.values[k + 1] = std::exp(r * stock.times[k + 1]) * discounted;
  }
  const double t_end = stock.times[steps];
  out.strategy_values[steps] = strategy(t_end, stock.regime_path.state_at(t_end), out.values[steps]);
  return out;
}

WealthPath simulate_wealth(const MarketParams& params, const StockPath& stock, const StrategyFn& strategy,
                           double w0) {
  return simulate_wealth(
      params, stock, WealthStrategyFn([&strategy](double t, std::size_t i, double) { return strategy(t, i); }),
      w0);
}

AdmissibilityReport check_admissibility_bound(const MarketParams& params, const StrategyFn& eta, double horizon,
                                              std::size_t intervals_per_segment) {
  require(horizon > 0.0, "horizon must be positive");
  if (intervals_per_segment % 2 == 1) ++intervals_per_segment;
  intervals_per_segment = std::max<std::size_t>(intervals_per_segment, 2);
  const double r = params.rate();
  AdmissibilityReport report;
  report.integrals.assign(params.regime_count(), 0.0);
  bool nonnegative = true;

  std::vector<double> edges{0.0};
  for (double b : params.breakpoints())
    if (b < horizon) edges.push_back(b);
  edges.push_back(horizon);

  for (std::size_t i = 0; i < params.regime_count(); ++i) {
    for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
      const double a = edges[s];
      const double b = edges[s + 1];
      // Coefficients are constant on [a, b); evaluate them at the left end
      // so the right-end Simpson node does not pick up the next segment.
      const auto& c = params.coefficients(a, i);
      const double h = (b - a) / static_cast<double>(intervals_per_segment);
      double acc = 0.0;
      for (std::size_t k = 0; k <= intervals_per_segment; ++k) {
        const double t = a + h * static_cast<double>(k);
        const double e = eta(t, i);
        if (e < 0.0) nonnegative = false;
        const double f = e * ((c.mu - r) + e * c.sigma * c.sigma);
        const double w = (k == 0 || k == intervals_per_segment) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
        acc += w * f;
      }
      report.integrals[i] += acc * h / 3.0;
    }
  }
  report.admissible = nonnegative && std::all_of(report.integrals.begin(), report.integrals.end(),
                                                 [](double v) { return std::isfinite(v); });
  return report;
}

}  // namespace indiff
