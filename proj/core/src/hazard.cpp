#include "indiff/hazard.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "indiff/error.hpp"
#include "indiff/parallel.hpp"

namespace indiff {
namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorCode::InvalidParameter, message);
}

const HazardSegment& find_segment(const std::vector<HazardSegment>& segments, double t) {
  auto it = std::upper_bound(segments.begin(), segments.end(), t,
                             [](double v, const HazardSegment& s) { return v < s.start; });
  return it == segments.begin() ? segments.front() : *(it - 1);
}

std::size_t step_count(double span, double time_step) {
  const double raw = std::ceil(span / time_step - 1e-9);
  return std::max<std::size_t>(1, static_cast<std::size_t>(raw));
}

}  // namespace

HazardModel::HazardModel(HazardCoefficientFn drift, HazardCoefficientFn volatility, double lambda0,
                         bool deterministic)
    : drift_(std::move(drift)), volatility_(std::move(volatility)), lambda0_(lambda0), deterministic_(deterministic) {
  require(lambda0_ > 0.0 && std::isfinite(lambda0_), "initial hazard must be positive");
  require(static_cast<bool>(drift_) && static_cast<bool>(volatility_), "hazard coefficients must be callable");
}

HazardModel HazardModel::constant(double lambda) { return piecewise(lambda, {HazardSegment{0.0, 0.0, 0.0}}); }

HazardModel HazardModel::piecewise(double lambda0, std::vector<HazardSegment> segments) {
  require(!segments.empty(), "hazard table needs at least one segment");
  require(segments.front().start == 0.0, "first hazard segment must start at t = 0");
  bool deterministic = true;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    if (s > 0) require(segments[s].start > segments[s - 1].start, "hazard segment start times must increase");
    require(std::isfinite(segments[s].drift) && std::isfinite(segments[s].volatility),
            "hazard coefficients must be finite");
    if (segments[s].volatility != 0.0) deterministic = false;
  }
  auto table = std::make_shared<const std::vector<HazardSegment>>(segments);
  HazardModel model([table](double t, double) { return find_segment(*table, t).drift; },
                    [table](double t, double) { return find_segment(*table, t).volatility; }, lambda0,
                    deterministic);
  model.segments_ = std::move(segments);
  return model;
}

HazardModel HazardModel::with_initial(double lambda0) const {
  if (gompertz_) {
    GompertzParams p = *gompertz_;
    p.lambda0 = lambda0;
    return gompertz_as_general(p);
  }
  if (!segments_.empty()) return piecewise(lambda0, segments_);
  return HazardModel(drift_, volatility_, lambda0, deterministic_);
}

HazardModel gompertz_as_general(const GompertzParams& p) {
  require(p.lambda0 > 0.0, "Gompertz lambda0 must be positive");
  require(p.mean_reversion >= 0.0, "Gompertz mean reversion m must be non-negative");
  require(std::isfinite(p.c1) && std::isfinite(p.c2), "Gompertz coefficients must be finite");
  const double level = p.c1 + p.mean_reversion * std::log(p.lambda0) + 0.5 * p.c2 * p.c2;
  HazardModel model(
      [p, level](double t, double lambda) {
        return level - p.mean_reversion * std::log(lambda) + p.mean_reversion * p.c1 * t;
      },
      [c2 = p.c2](double, double) { return c2; }, p.lambda0, p.c2 == 0.0);
  model.gompertz_ = p;
  return model;
}

std::vector<double> simulate_hazard(const HazardModel& model, const TimeGrid& grid, Stream& stream,
                                    HazardScheme scheme) {
  return simulate_hazard(model, grid, model.initial(), stream, scheme);
}

std::vector<double> simulate_hazard(const HazardModel& model, const TimeGrid& grid, double start_lambda,
                                    Stream& stream, HazardScheme scheme) {
  require(start_lambda > 0.0, "starting hazard must be positive");
  const auto& t = grid.times();
  std::vector<double> lambda(t.size());
  lambda[0] = start_lambda;
  std::normal_distribution<double> normal(0.0, 1.0);

  if (scheme == HazardScheme::Auto && model.gompertz()) {
    // x = c2 Y is an OU process; lambda = lambda0 exp(c1 t + x).
    const auto& g = *model.gompertz();
    const double m = g.mean_reversion;
    const double log_base = std::log(g.lambda0);
    double x = std::log(start_lambda) - log_base - g.c1 * t[0];
    for (std::size_t k = 0; k + 1 < t.size(); ++k) {
      const double dt = t[k + 1] - t[k];
      if (g.c2 == 0.0) {
        x *= std::exp(-m * dt);
      } else {
        const double var = m > 0.0 ? -std::expm1(-2.0 * m * dt) / (2.0 * m) : dt;
        x = x * std::exp(-m * dt) + g.c2 * std::sqrt(var) * normal(stream);
      }
      lambda[k + 1] = std::exp(log_base + g.c1 * t[k + 1] + x);
    }
    return lambda;
  }

  double y = std::log(start_lambda);
  for (std::size_t k = 0; k + 1 < t.size(); ++k) {
    const double dt = t[k + 1] - t[k];
    const double b = model.drift(t[k], lambda[k]);
    const double c = model.volatility(t[k], lambda[k]);
    y += (b - 0.5 * c * c) * dt;
    if (!model.deterministic()) y += c * std::sqrt(dt) * normal(stream);
    lambda[k + 1] = std::exp(y);
  }
  return lambda;
}

double integrate_path(const TimeGrid& grid, const std::vector<double>& lambda) {
  const auto& t = grid.times();
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < t.size(); ++k) acc += 0.5 * (lambda[k] + lambda[k + 1]) * (t[k + 1] - t[k]);
  return acc;
}

std::vector<double> survival_samples(const HazardModel& model, double t, double lambda, double maturity,
                                     const SurvivalOptions& options) {
  require(t >= 0.0 && t <= maturity, "survival needs 0 <= t <= T");
  require(lambda > 0.0, "hazard must be positive");
  require(options.time_step > 0.0, "time step must be positive");
  std::vector<double> out(options.paths, 1.0);
  if (t == maturity) return out;
  const TimeGrid grid = TimeGrid::uniform(t, maturity, step_count(maturity - t, options.time_step));
  parallel_for(options.paths, options.threads, [&](std::size_t p) {
    Stream stream = options.rng.stream(p, Channel::HazardBrownian);
    const auto path = simulate_hazard(model, grid, lambda, stream, options.scheme);
    out[p] = std::exp(-integrate_path(grid, path));
  });
  return out;
}

SurvivalEstimate survival_probability(const HazardModel& model, double t, double lambda, double maturity,
                                      const SurvivalOptions& options) {
  const auto samples = survival_samples(model, t, lambda, maturity, options);
  const auto est = summarize(samples);
  return SurvivalEstimate{est.mean, est.std_error, est.count};
}

double deterministic_survival(const HazardModel& model, double t, double lambda, double maturity,
                              std::size_t steps) {
  require(model.deterministic(), "closed-form survival needs a deterministic hazard");
  require(t >= 0.0 && t <= maturity && lambda > 0.0, "survival needs 0 <= t <= T and lambda > 0");
  if (t == maturity) return 1.0;
  const double h = (maturity - t) / static_cast<double>(steps);
  // State (ln lambda, int lambda); c == 0 so d ln lambda = b dt.
  auto rhs = [&](double s, double y, double& dy, double& di) {
    const double l = std::exp(y);
    dy = model.drift(s, l);
    di = l;
  };
  double y = std::log(lambda);
  double integral = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    const double s = t + h * static_cast<double>(k);
    double y1, i1, y2, i2, y3, i3, y4, i4;
    rhs(s, y, y1, i1);
    rhs(s + 0.5 * h, y + 0.5 * h * y1, y2, i2);
    rhs(s + 0.5 * h, y + 0.5 * h * y2, y3, i3);
    rhs(s + h, y + h * y3, y4, i4);
    y += h * (y1 + 2.0 * y2 + 2.0 * y3 + y4) / 6.0;
    integral += h * (i1 + 2.0 * i2 + 2.0 * i3 + i4) / 6.0;
  }
  return std::exp(-integral);
}

}  // namespace indiff
