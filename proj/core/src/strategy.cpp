#include "indiff/strategy.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "indiff/error.hpp"

namespace indiff {
namespace {

constexpr double kMaxExponent = 700.0;

struct Frame {
  double a;  // alpha e^{r(T-t)}
  double excess;
  double sigma2;
  double k1, k2, theta1, theta2;
};

Frame frame(const StrategyQuery& q) {
  if (!(q.alpha > 0.0)) throw Error(ErrorCode::InvalidParameter, "risk aversion alpha must be positive");
  if (!(q.t >= 0.0 && q.t <= q.horizon)) {
    throw Error(ErrorCode::InvalidParameter,
                "strategy query needs 0 <= t <= T (t = " + std::to_string(q.t) + ")");
  }
  const auto& c = q.market.coefficients(q.t, q.regime);
  if (!(c.sigma > 0.0) || !(c.mu > q.market.rate())) {
    throw Error(ErrorCode::InvalidParameter,
                "optimal strategy needs sigma > 0 and mu > r in regime " + std::to_string(q.regime + 1));
  }
  return Frame{q.alpha * std::exp(q.market.rate() * (q.horizon - q.t)),
               c.mu - q.market.rate(),
               c.sigma * c.sigma,
               c.jump_up,
               c.jump_down,
               q.market.theta_up(q.t),
               q.market.theta_down(q.t)};
}

double clamped_exp(double x) { return std::exp(std::min(x, kMaxExponent)); }

double foc(const Frame& f, double pi) {
  return f.sigma2 * f.a * pi - f.excess - f.k1 * f.theta1 * clamped_exp(-f.a * pi * f.k1) +
         f.k2 * f.theta2 * clamped_exp(f.a * pi * f.k2);
}

double foc_slope(const Frame& f, double pi) {
  return f.a * (f.sigma2 + f.k1 * f.k1 * f.theta1 * clamped_exp(-f.a * pi * f.k1) +
                f.k2 * f.k2 * f.theta2 * clamped_exp(f.a * pi * f.k2));
}

std::pair<double, double> bracket(const Frame& f, const AssumptionBounds& b) {
  double lower = 0.0;
  if (b.theta_down_max > 0.0) lower = std::min(0.0, std::log(f.excess / b.theta_down_max) / f.a);
  const double upper = (f.excess + b.jump_up_max * b.theta_up_max) / (f.sigma2 * f.a);
  return {lower, upper};
}

}  // namespace

double psi_bar(double pi, const StrategyQuery& query) {
  const Frame f = frame(query);
  const double up_arg = -f.a * pi * f.k1;
  const double down_arg = f.a * pi * f.k2;
  if ((f.theta1 > 0.0 && up_arg > kMaxExponent) || (f.theta2 > 0.0 && down_arg > kMaxExponent)) {
    return std::numeric_limits<double>::infinity();
  }
  return -f.a * f.excess * pi + 0.5 * f.a * f.a * f.sigma2 * pi * pi + f.theta1 * std::expm1(up_arg) +
         f.theta2 * std::expm1(down_arg);
}

double first_order_condition(double pi, const StrategyQuery& query) { return foc(frame(query), pi); }

std::pair<double, double> strategy_bounds(const StrategyQuery& query) {
  return bracket(frame(query), query.market.bounds());
}

OptimalStrategy solve_pi_star(const StrategyQuery& query, std::optional<double> warm_start) {
  const Frame f = frame(query);
  OptimalStrategy out;
  std::tie(out.lower_bound, out.upper_bound) = bracket(f, query.market.bounds());

  double lo = out.lower_bound;
  double hi = out.upper_bound;
  double g_lo = foc(f, lo);
  double g_hi = foc(f, hi);
  for (int k = 0; g_lo > 0.0; ++k) {
    if (k == 200) throw Error(ErrorCode::BracketFailure, "could not find a lower bracket for Pi*");
    out.widened = true;
    hi = lo;
    g_hi = g_lo;
    lo -= std::ldexp(std::max(1.0, std::abs(lo)), k);
    g_lo = foc(f, lo);
  }
  for (int k = 0; g_hi < 0.0; ++k) {
    if (k == 200) throw Error(ErrorCode::BracketFailure, "could not find an upper bracket for Pi*");
    out.widened = true;
    lo = hi;
    g_lo = g_hi;
    hi += std::ldexp(std::max(1.0, std::abs(hi)), k);
    g_hi = foc(f, hi);
  }
  if (out.widened) {
    out.lower_bound = std::min(out.lower_bound, lo);
    out.upper_bound = std::max(out.upper_bound, hi);
  }

  auto tolerance = [&](double x) { return 1e-13 * f.sigma2 * f.a * std::max(1.0, std::abs(x)); };

  double x = (warm_start && *warm_start > lo && *warm_start < hi) ? *warm_start : 0.5 * (lo + hi);
  if (g_lo == 0.0) x = lo;
  if (g_hi == 0.0) x = hi;
  double gx = foc(f, x);
  int it = 0;
  for (; it < 200; ++it) {
    if (std::abs(gx) <= tolerance(x)) break;
    if (gx > 0.0) {
      hi = x;
    } else {
      lo = x;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) break;
    double next = x - gx / foc_slope(f, x);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    x = next;
    gx = foc(f, x);
  }
  out.pi_star = x;
  out.residual = gx;
  out.iterations = it;
  return out;
}

double min_psi_bar(const StrategyQuery& query, std::optional<double> warm_start, double* argmin) {
  const auto sol = solve_pi_star(query, warm_start);
  if (argmin != nullptr) *argmin = sol.pi_star;
  return psi_bar(sol.pi_star, query);
}

StrategyTrajectory strategy_path(const RegimePath& regime_path, double alpha, const MarketParams& market,
                                 double horizon, const TimeGrid& grid) {
  const TimeGrid fine = grid.with_points(regime_path.switch_times);
  StrategyTrajectory out;
  out.times = fine.times();
  out.regimes.reserve(out.times.size());
  out.pi_star.reserve(out.times.size());
  std::optional<double> warm;
  std::size_t last_regime = regime_path.initial_state();
  for (double t : out.times) {
    const std::size_t regime = regime_path.state_at(t);
    if (regime != last_regime) warm.reset();
    const auto sol = solve_pi_star(StrategyQuery{market, t, regime, alpha, horizon}, warm);
    warm = sol.pi_star;
    last_regime = regime;
    out.regimes.push_back(regime);
    out.pi_star.push_back(sol.pi_star);
  }
  return out;
}

}  // namespace indiff
