#include "indiff/value_odes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include <boost/math/tools/minima.hpp>

#include "indiff/error.hpp"
#include "indiff/interpolation.hpp"
#include "indiff/strategy.hpp"

namespace indiff {
namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorCode::InvalidParameter, message);
}

using State = std::vector<double>;

void derivative(const GeneratorMatrix& gen, const RegimeRateFn& rate, double t, const State& phi, State& out) {
  const std::size_t m = phi.size();
  for (std::size_t i = 0; i < m; ++i) {
    double acc = rate(t, i) * phi[i];
    for (std::size_t j = 0; j < m; ++j) acc += gen.rate(i, j) * phi[j];
    out[i] = acc;  // -dphi/dt
  }
}

void check_positive(const State& phi, double t) {
  for (std::size_t i = 0; i < phi.size(); ++i) {
    if (!(phi[i] > 0.0) || !std::isfinite(phi[i])) {
      throw Error(ErrorCode::PositivityLost,
                  "phi(" + std::to_string(t) + ", " + std::to_string(i) + ") = " + std::to_string(phi[i]));
    }
  }
}

double max_node_difference(const std::vector<std::vector<double>>& coarse,
                           const std::vector<std::vector<double>>& fine) {
  double diff = 0.0;
  for (std::size_t k = 0; k < coarse.size(); ++k)
    for (std::size_t i = 0; i < coarse[k].size(); ++i)
      diff = std::max(diff, std::abs(coarse[k][i] - fine[2 * k][i]));
  return diff;
}

}  // namespace

VarphiSolution::VarphiSolution(MarketParams market, double alpha, double horizon, std::vector<double> times,
                               std::vector<std::vector<double>> values, double error_estimate)
    : market_(std::move(market)), alpha_(alpha), horizon_(horizon), times_(std::move(times)),
      values_(std::move(values)), error_estimate_(error_estimate) {}

double VarphiSolution::phi(double t, std::size_t regime) const {
  if (!(t >= 0.0 && t <= horizon_)) {
    throw Error(ErrorCode::DomainError, "t = " + std::to_string(t) + " outside [0, T]");
  }
  require(regime < regimes(), "regime index out of range");
  if (t == horizon_) return values_.back()[regime];
  const auto st = cubic_stencil(t, 0.0, horizon_ / static_cast<double>(steps()), times_.size());
  double acc = 0.0;
  for (std::size_t a = 0; a < st.size; ++a) acc += st.weights[a] * values_[st.first + a][regime];
  return acc;
}

std::vector<std::vector<double>> solve_backward_system(const GeneratorMatrix& gen, const RegimeRateFn& rate,
                                                       double horizon, std::size_t steps) {
  require(horizon > 0.0, "horizon must be positive");
  require(steps >= 1, "need at least one step");
  const std::size_t m = gen.size();
  const double h = horizon / static_cast<double>(steps);
  std::vector<std::vector<double>> out(steps + 1, State(m, 1.0));
  State phi(m, 1.0), k1(m), k2(m), k3(m), k4(m), tmp(m);
  for (std::size_t k = steps; k-- > 0;) {
    const double t = k + 1 == steps ? horizon : h * static_cast<double>(k + 1);
    const double t_mid = t - 0.5 * h;
    const double t_new = h * static_cast<double>(k);
    derivative(gen, rate, t, phi, k1);
    for (std::size_t i = 0; i < m; ++i) tmp[i] = phi[i] + 0.5 * h * k1[i];
    derivative(gen, rate, t_mid, tmp, k2);
    for (std::size_t i = 0; i < m; ++i) tmp[i] = phi[i] + 0.5 * h * k2[i];
    derivative(gen, rate, t_mid, tmp, k3);
    for (std::size_t i = 0; i < m; ++i) tmp[i] = phi[i] + h * k3[i];
    derivative(gen, rate, t_new, tmp, k4);
    for (std::size_t i = 0; i < m; ++i) phi[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    check_positive(phi, t_new);
    out[k] = phi;
  }
  return out;
}

VarphiSolution solve_varphi(const GeneratorMatrix& gen, const MarketParams& market, double alpha, double horizon,
                            const VarphiOptions& options) {
  require(alpha > 0.0, "alpha must be positive");
  require(horizon > 0.0, "horizon must be positive");
  require(options.steps >= 2, "need at least two steps");
  require(gen.size() == market.regime_count(), "generator and market disagree on the number of regimes");
  const std::size_t m = gen.size();

  std::vector<std::optional<double>> warm(m);
  const RegimeRateFn inf_psi = [&](double t, std::size_t i) {
    double argmin = 0.0;
    const double v = min_psi_bar(StrategyQuery{market, t, i, alpha, horizon}, warm[i], &argmin);
    warm[i] = argmin;
    return v;
  };
  auto run = [&](std::size_t steps) {
    std::fill(warm.begin(), warm.end(), std::nullopt);
    return solve_backward_system(gen, inf_psi, horizon, steps);
  };

  std::size_t steps = options.steps;
  auto coarse = run(steps);
  for (std::size_t attempt = 0;; ++attempt) {
    auto fine = run(2 * steps);
    const double estimate = max_node_difference(coarse, fine) / 15.0;
    if (estimate <= options.tolerance) {
      steps *= 2;
      std::vector<double> times(steps + 1);
      for (std::size_t k = 0; k <= steps; ++k) times[k] = horizon * static_cast<double>(k) / static_cast<double>(steps);
      times.back() = horizon;
      return VarphiSolution(market, alpha, horizon, std::move(times), std::move(fine), estimate);
    }
    if (attempt >= options.max_doublings) {
      throw Error(ErrorCode::StepRejected, "RK4 error estimate " + std::to_string(estimate) + " above tolerance " +
                                               std::to_string(options.tolerance) + " with " +
                                               std::to_string(2 * steps) + " steps");
    }
    steps *= 2;
    coarse = std::move(fine);
  }
}

double value_bar(const VarphiSolution& sol, double t, double w, std::size_t regime) {
  const double a = sol.alpha() * std::exp(sol.rate() * (sol.horizon() - t));
  return -std::exp(-w * a) * sol.phi(t, regime);
}

double value_full(const VarphiSolution& sol, const PriceSurface& surface, double t, double w, double lambda,
                  std::size_t regime) {
  require(surface.policy().alpha == sol.alpha(), "surface and phi solution use different alpha");
  require(surface.policy().maturity == sol.horizon(), "surface and phi solution use different horizons");
  const double link = surface.value(t, lambda);
  return value_bar(sol, t, w, regime) * link;
}

HjbResidual hjb_residual_bar(const VarphiSolution& sol, const GeneratorMatrix& gen, double t, double w,
                             std::size_t regime) {
  const double horizon = sol.horizon();
  require(t > 0.0 && t < horizon, "HJB residual needs an interior time");
  require(gen.size() == sol.regimes(), "generator does not match the solution");
  const auto& market = sol.market();
  const double r = market.rate();
  const auto& c = market.coefficients(t, regime);
  const double theta_up = market.theta_up(t);
  const double theta_down = market.theta_down(t);
  const double a = sol.alpha() * std::exp(r * (horizon - t));

  auto v = [&](double tt, double ww, std::size_t i) { return value_bar(sol, tt, ww, i); };
  const double v0 = v(t, w, regime);

  const double dt = std::min({1e-4 * horizon, 0.5 * t, 0.5 * (horizon - t)});
  const double v_t = (v(t + dt, w, regime) - v(t - dt, w, regime)) / (2.0 * dt);
  const double dw = 1e-3 / a;
  const double v_up = v(t, w + dw, regime);
  const double v_dn = v(t, w - dw, regime);
  const double v_w = (v_up - v_dn) / (2.0 * dw);
  const double v_ww = (v_up - 2.0 * v0 + v_dn) / (dw * dw);
  double switching = 0.0;
  for (std::size_t j = 0; j < gen.size(); ++j) switching += gen.rate(regime, j) * v(t, w, j);

  auto terms = [&](double pi, double out[7]) {
    out[0] = v_t;
    out[1] = r * w * v_w;
    out[2] = (c.mu - r) * pi * v_w;
    out[3] = 0.5 * c.sigma * c.sigma * pi * pi * v_ww;
    out[4] = switching;
    out[5] = theta_up * (v(t, w + pi * c.jump_up, regime) - v0);
    out[6] = theta_down * (v(t, w - pi * c.jump_down, regime) - v0);
  };
  auto generator = [&](double pi) {
    double parts[7];
    terms(pi, parts);
    double acc = 0.0;
    for (double p : parts) acc += p;
    return acc;
  };

  const auto [lo, hi] = strategy_bounds(StrategyQuery{market, t, regime, sol.alpha(), horizon});
  const double reach = 4.0 * std::max({std::abs(lo), std::abs(hi), 1.0 / a});
  const auto best = boost::math::tools::brent_find_minima([&](double pi) { return -generator(pi); }, -reach, reach,
                                                          std::numeric_limits<double>::digits);
  HjbResidual out;
  out.pi_argmax = best.first;
  double parts[7];
  terms(out.pi_argmax, parts);
  for (double p : parts) {
    out.residual += p;
    out.scale += std::abs(p);
  }
  return out;
}

}  // namespace indiff
