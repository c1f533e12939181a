#include "indiff/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "indiff/error.hpp"
#include "indiff/interpolation.hpp"

namespace indiff {
namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorCode::InvalidParameter, message);
}

constexpr std::size_t kMaxSpaceNodes = 200001;

/// Coefficients of the spatial operator at one time level, without the
/// reaction term: (L phi)_j = lower_j phi_{j-1} + diag_j phi_j + upper_j phi_{j+1}.
struct Operator {
  std::vector<double> lower, diag, upper;
};

/// Node-wise reaction kappa_j (phi_j - g_j) of one member of the chain.
enum class Source { Endowment, TermLife };

class LogHazardGrid {
 public:
  LogHazardGrid(const HazardModel& hazard, double x_min, double x_max, std::size_t nodes)
      : hazard_(hazard), x_min_(x_min), nodes_(nodes), dx_((x_max - x_min) / static_cast<double>(nodes - 1)),
        lambda_(nodes) {
    for (std::size_t j = 0; j < nodes_; ++j) lambda_[j] = std::exp(x(j));
  }

  double x(std::size_t j) const { return x_min_ + dx_ * static_cast<double>(j); }
  double dx() const { return dx_; }
  std::size_t nodes() const { return nodes_; }
  const std::vector<double>& lambda() const { return lambda_; }

  /// Largest spacing for which the central scheme keeps non-negative
  /// off-diagonals at time t (nodes without diffusion are upwinded).
  double admissible_spacing(double t) const {
    double h = std::numeric_limits<double>::infinity();
    for (std::size_t j = 1; j + 1 < nodes_; ++j) {
      const double c = hazard_.volatility(t, lambda_[j]);
      const double diff = 0.5 * c * c;
      if (diff == 0.0) continue;
      const double beta = hazard_.drift(t, lambda_[j]) - diff;
      if (beta != 0.0) h = std::min(h, 2.0 * diff / std::abs(beta));
    }
    return h;
  }

  void build(double t, Operator& op) const {
    op.lower.assign(nodes_, 0.0);
    op.diag.assign(nodes_, 0.0);
    op.upper.assign(nodes_, 0.0);
    const double h = dx_;
    const double h2 = h * h;
    for (std::size_t j = 0; j + 1 < nodes_; ++j) {
      const double c = hazard_.volatility(t, lambda_[j]);
      const double diff = 0.5 * c * c;
      const double beta = hazard_.drift(t, lambda_[j]) - diff;
      if (j == 0) {
        // phi_xx = 0 ghost node; one-sided transport towards the interior.
        const double up = std::max(beta, 0.0) / h;
        op.upper[j] = up;
        op.diag[j] = -up;
        continue;
      }
      if (diff > 0.0) {
        op.lower[j] = diff / h2 - beta / (2.0 * h);
        op.upper[j] = diff / h2 + beta / (2.0 * h);
        op.diag[j] = -2.0 * diff / h2;
      } else {
        op.lower[j] = std::max(-beta, 0.0) / h;
        op.upper[j] = std::max(beta, 0.0) / h;
        op.diag[j] = -std::abs(beta) / h;
      }
    }
  }

 private:
  const HazardModel& hazard_;
  double x_min_;
  std::size_t nodes_;
  double dx_;
  std::vector<double> lambda_;
};

void solve_tridiagonal(const std::vector<double>& a, std::vector<double>& b, const std::vector<double>& c,
                       std::vector<double>& d) {
  const std::size_t n = d.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double m = a[i] / b[i - 1];
    b[i] -= m * c[i - 1];
    d[i] -= m * d[i - 1];
  }
  d[n - 1] /= b[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) d[i] = (d[i] - c[i] * d[i + 1]) / b[i];
}

struct ChainSpec {
  Source source;
  std::size_t levels;  // 1 for endowment and term life, n for a portfolio
};

PriceSurface march(const HazardModel& hazard, const PolicySpec& policy, const PdeGrid& grid, ChainSpec chain) {
  policy.validate();
  require(grid.time_steps >= 1, "PDE grid needs at least one time step");
  require(grid.space_nodes >= 5, "PDE grid needs at least five lambda nodes");
  require(grid.lambda_min > 0.0 && grid.lambda_max > grid.lambda_min, "PDE grid needs 0 < lambda_min < lambda_max");
  const std::size_t store_every = std::max<std::size_t>(1, grid.store_every);
  const std::size_t steps = (grid.time_steps + store_every - 1) / store_every * store_every;
  const double horizon = policy.maturity;
  const double dt = horizon / static_cast<double>(steps);
  const double x_min = std::log(grid.lambda_min);
  const double x_max = std::log(grid.lambda_max);
  const std::size_t substeps = grid.rannacher_substeps;

  auto time_of = [&](std::size_t k) { return k == steps ? horizon : dt * static_cast<double>(k); };

  // Sign-structure check over every time level the march will touch.
  auto required_spacing = [&](const LogHazardGrid& g) {
    double h = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k <= steps; ++k) h = std::min(h, g.admissible_spacing(time_of(k)));
    for (std::size_t s = 1; s < substeps; ++s)
      h = std::min(h, g.admissible_spacing(horizon - dt * static_cast<double>(s) / static_cast<double>(substeps)));
    return h;
  };

  std::size_t nodes = grid.space_nodes;
  std::size_t refinements = 0;
  double h_req = required_spacing(LogHazardGrid(hazard, x_min, x_max, nodes));
  const auto spacing = [&](std::size_t n) { return (x_max - x_min) / static_cast<double>(n - 1); };
  if (spacing(nodes) > h_req) {
    if (!grid.auto_refine) {
      throw Error(ErrorCode::GridTooCoarse, "central differences lose monotonicity: d(ln lambda) = " +
                                                std::to_string(spacing(nodes)) + " > " + std::to_string(h_req));
    }
    const double wanted = std::ceil((x_max - x_min) / (0.98 * h_req)) + 1.0;
    if (!(wanted <= static_cast<double>(kMaxSpaceNodes))) {
      throw Error(ErrorCode::GridTooCoarse, "monotone lambda grid would need " + std::to_string(wanted) + " nodes");
    }
    nodes = std::max(2 * nodes - 1, static_cast<std::size_t>(wanted));
    refinements = 1;
    h_req = required_spacing(LogHazardGrid(hazard, x_min, x_max, nodes));
    if (spacing(nodes) > h_req) {
      throw Error(ErrorCode::GridTooCoarse, "lambda grid still not monotone after refinement");
    }
  }

  const LogHazardGrid g(hazard, x_min, x_max, nodes);
  const auto& lambda = g.lambda();
  const double jump = std::expm1(policy.alpha * policy.benefit);  // e^{alpha K} - 1
  const double top = std::exp(policy.alpha * policy.benefit);
  const std::size_t levels = chain.levels;

  auto kappa = [&](std::size_t level, std::size_t j) {
    return chain.source == Source::TermLife ? -lambda[j] : static_cast<double>(level) * lambda[j];
  };
  // Term life is marched as the deviation xi - e^{alpha K}.
  const bool deviation = chain.source == Source::TermLife;
  auto dirichlet = [&](std::size_t level, double t) {
    if (deviation) return 0.0;
    return std::pow(1.0 + jump * std::exp(-lambda[nodes - 1] * (horizon - t)), static_cast<double>(level));
  };

  // state[l] holds phi^(l+1) at the current time level.
  std::vector<std::vector<double>> state(levels);
  for (std::size_t l = 0; l < levels; ++l) state[l].assign(nodes, std::pow(top, static_cast<double>(l + 1)));
  if (deviation) state[0].assign(nodes, 0.0);
  const std::vector<double> base(nodes, deviation ? 0.0 : 1.0);

  const std::size_t stored = steps / store_every + 1;
  std::vector<double> values(stored * nodes);
  std::vector<double> times(stored);
  auto store = [&](std::size_t k) {
    if (k % store_every != 0) return;
    const std::size_t s = k / store_every;
    times[s] = time_of(k);
    const double shift = deviation ? top : 0.0;
    std::transform(state[levels - 1].begin(), state[levels - 1].end(), values.begin() + s * nodes,
                   [shift](double v) { return v + shift; });
  };
  store(steps);

  Operator op_old, op_new;
  std::vector<double> lo(nodes), di(nodes), up(nodes), rhs(nodes);
  std::vector<std::vector<double>> previous(levels);

  // One theta-step from t_old to t_new for the whole chain.
  auto advance = [&](double t_old, double t_new, double theta) {
    const double h = t_old - t_new;
    g.build(t_new, op_new);
    for (std::size_t l = 0; l < levels; ++l) previous[l] = state[l];
    for (std::size_t l = 0; l < levels; ++l) {
      const std::vector<double>& g_old = l == 0 ? base : previous[l - 1];
      const std::vector<double>& g_new = l == 0 ? base : state[l - 1];
      const std::vector<double>& phi = previous[l];
      for (std::size_t j = 0; j + 1 < nodes; ++j) {
        const double k = kappa(l + 1, j);
        double explicit_part = (op_old.diag[j] - k) * phi[j] + op_old.upper[j] * phi[j + 1] + k * g_old[j];
        if (j > 0) explicit_part += op_old.lower[j] * phi[j - 1];
        rhs[j] = phi[j] + (1.0 - theta) * h * explicit_part + theta * h * k * g_new[j];
        lo[j] = -theta * h * op_new.lower[j];
        di[j] = 1.0 - theta * h * (op_new.diag[j] - k);
        up[j] = -theta * h * op_new.upper[j];
      }
      lo[nodes - 1] = 0.0;
      di[nodes - 1] = 1.0;
      up[nodes - 1] = 0.0;
      rhs[nodes - 1] = dirichlet(l + 1, t_new);
      solve_tridiagonal(lo, di, up, rhs);
      state[l] = rhs;
    }
    std::swap(op_old, op_new);
  };

  g.build(horizon, op_old);
  for (std::size_t k = steps; k-- > 0;) {
    const double t_old = time_of(k + 1);
    const double t_new = time_of(k);
    if (k + 1 == steps && substeps > 0) {
      for (std::size_t s = 0; s < substeps; ++s) {
        const double a = t_old - (t_old - t_new) * static_cast<double>(s) / static_cast<double>(substeps);
        const double b = s + 1 == substeps
                             ? t_new
                             : t_old - (t_old - t_new) * static_cast<double>(s + 1) / static_cast<double>(substeps);
        advance(a, b, 1.0);
      }
    } else {
      advance(t_old, t_new, 0.5);
    }
    store(k);
  }

  return PriceSurface(policy, hazard, std::move(times), x_min, g.dx(), nodes, std::move(values), refinements);
}

}  // namespace

const char* to_string(ContractKind kind) noexcept {
  switch (kind) {
    case ContractKind::PureEndowment: return "pure_endowment";
    case ContractKind::Portfolio: return "portfolio";
    case ContractKind::TermLife: return "term_life";
  }
  return "unknown";
}

const char* to_string(Route route) noexcept {
  switch (route) {
    case Route::Pde: return "pde";
    case Route::MonteCarlo: return "mc";
    case Route::ClosedForm: return "closed";
  }
  return "unknown";
}

void PolicySpec::validate() const {
  require(benefit >= 0.0 && std::isfinite(benefit), "benefit K must be a non-negative number");
  require(cohort >= 1, "cohort size n must be at least 1");
  require(maturity > 0.0 && std::isfinite(maturity), "maturity T must be positive");
  require(alpha > 0.0 && std::isfinite(alpha), "risk aversion alpha must be positive");
  require(std::isfinite(terminal_value()), "e^{n alpha K} overflows");
}

double PolicySpec::terminal_value() const {
  return std::exp(alpha * benefit * (kind == ContractKind::TermLife ? 1.0 : static_cast<double>(lives())));
}

PdeGrid pde_grid_for(double query_lo, double query_hi, double padding, std::size_t time_steps,
                     std::size_t space_nodes) {
  require(query_lo > 0.0 && query_hi >= query_lo, "query range must satisfy 0 < lo <= hi");
  require(padding >= 1.0, "padding factor must be at least 1");
  PdeGrid grid;
  grid.lambda_min = query_lo / padding;
  grid.lambda_max = query_hi * padding;
  grid.time_steps = time_steps;
  grid.space_nodes = space_nodes;
  return grid;
}

PriceSurface::PriceSurface(PolicySpec policy, HazardModel hazard, std::vector<double> times,
                           double log_lambda_min, double log_lambda_step, std::size_t space_nodes,
                           std::vector<double> values, std::size_t refinements)
    : policy_(policy), hazard_(std::move(hazard)), times_(std::move(times)), log_lambda_min_(log_lambda_min),
      log_lambda_step_(log_lambda_step), space_nodes_(space_nodes), values_(std::move(values)),
      refinements_(refinements) {}

double PriceSurface::lambda_min() const noexcept { return std::exp(log_lambda_min_); }
double PriceSurface::lambda_max() const noexcept { return std::exp(log_lambda(space_nodes_ - 1)); }

bool PriceSurface::contains(double t, double lambda) const noexcept {
  if (!(lambda > 0.0) || !(t >= 0.0) || t > times_.back()) return false;
  const double x = std::log(lambda);
  const double slack = 1e-12 * std::max(1.0, std::abs(log_lambda_min_));
  return x >= log_lambda_min_ - slack && x <= log_lambda(space_nodes_ - 1) + slack;
}

double PriceSurface::value(double t, double lambda) const {
  if (!contains(t, lambda)) {
    throw Error(ErrorCode::DomainError, "(t, lambda) = (" + std::to_string(t) + ", " + std::to_string(lambda) +
                                            ") outside the PDE grid [" + std::to_string(lambda_min()) + ", " +
                                            std::to_string(lambda_max()) + "]");
  }
  const double dt = times_.size() > 1 ? times_[1] - times_[0] : 1.0;
  const auto st = cubic_stencil(t, times_.front(), dt, times_.size());
  const auto sx = cubic_stencil(std::log(lambda), log_lambda_min_, log_lambda_step_, space_nodes_);
  double acc = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t a = 0; a < st.size; ++a) {
    for (std::size_t b = 0; b < sx.size; ++b) {
      const double v = node(st.first + a, sx.first + b);
      acc += st.weights[a] * sx.weights[b] * v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  return std::clamp(acc, lo, hi);
}

PriceSurface solve_phi_pde(const HazardModel& hazard, const PolicySpec& policy, const PdeGrid& grid) {
  require(policy.kind != ContractKind::TermLife, "use solve_xi_term_life for term-life policies");
  PolicySpec single = policy;
  single.kind = ContractKind::PureEndowment;
  single.cohort = 1;
  return march(hazard, single, grid, ChainSpec{Source::Endowment, 1});
}

PriceSurface solve_phi_group(const HazardModel& hazard, const PolicySpec& policy, const PdeGrid& grid) {
  require(policy.kind != ContractKind::TermLife, "use solve_xi_term_life for term-life policies");
  PolicySpec group = policy;
  group.kind = ContractKind::Portfolio;
  return march(hazard, group, grid, ChainSpec{Source::Endowment, group.cohort});
}

PriceSurface solve_xi_term_life(const HazardModel& hazard, const PolicySpec& policy, const PdeGrid& grid) {
  PolicySpec term = policy;
  term.kind = ContractKind::TermLife;
  term.cohort = 1;
  return march(hazard, term, grid, ChainSpec{Source::TermLife, 1});
}

PriceSurface solve_surface(const HazardModel& hazard, const PolicySpec& policy, const PdeGrid& grid) {
  switch (policy.kind) {
    case ContractKind::PureEndowment: return solve_phi_pde(hazard, policy, grid);
    case ContractKind::Portfolio: return solve_phi_group(hazard, policy, grid);
    case ContractKind::TermLife: return solve_xi_term_life(hazard, policy, grid);
  }
  throw Error(ErrorCode::InvalidParameter, "unknown contract kind");
}

PriceQuote price_from_surface(const PriceSurface& surface, double t, double lambda, double r) {
  const auto& policy = surface.policy();
  PriceQuote quote{0.0, Route::Pde, 0.0, t, lambda};
  const double phi = surface.value(t, lambda);
  if (t == policy.maturity) {
    quote.price = policy.terminal_price();
    return quote;
  }
  quote.price = std::log(phi) / (policy.alpha * std::exp(r * (policy.maturity - t)));
  return quote;
}

PriceQuote price_feynman_kac(const HazardModel& hazard, const PolicySpec& policy, double t, double lambda, double r,
                             const McOptions& options) {
  policy.validate();
  require(t >= 0.0 && t <= policy.maturity, "price needs 0 <= t <= T");
  require(lambda > 0.0, "hazard must be positive");
  PriceQuote quote{policy.terminal_price(), Route::MonteCarlo, 0.0, t, lambda};
  if (t == policy.maturity) return quote;
  const double scale = policy.alpha * std::exp(r * (policy.maturity - t));
  if (policy.kind == ContractKind::TermLife) {
    quote.price = policy.benefit * std::exp(-r * (policy.maturity - t));
    return quote;
  }
  const double jump = std::expm1(policy.alpha * policy.benefit);
  auto samples = survival_samples(hazard, t, lambda, policy.maturity, options);
  if (policy.kind == ContractKind::PureEndowment) {
    const auto est = summarize(samples);
    const double phi = 1.0 + jump * est.mean;
    quote.price = std::log1p(jump * est.mean) / scale;
    quote.std_error = jump * est.std_error / (phi * scale);
    return quote;
  }
  const double n = static_cast<double>(policy.cohort);
  for (double& p : samples) p = std::pow(1.0 + jump * p, n);
  const auto est = summarize(samples);
  quote.price = std::log(est.mean) / scale;
  quote.std_error = est.std_error / (est.mean * scale);
  return quote;
}

std::optional<PriceQuote> price_closed_form(const HazardModel& hazard, const PolicySpec& policy, double t,
                                            double lambda, double r) {
  policy.validate();
  require(t >= 0.0 && t <= policy.maturity, "price needs 0 <= t <= T");
  PriceQuote quote{policy.terminal_price(), Route::ClosedForm, 0.0, t, lambda};
  if (t == policy.maturity) return quote;
  if (policy.kind == ContractKind::TermLife) {
    quote.price = policy.benefit * std::exp(-r * (policy.maturity - t));
    return quote;
  }
  if (!hazard.deterministic()) return std::nullopt;
  const double survival = deterministic_survival(hazard, t, lambda, policy.maturity);
  const double jump = std::expm1(policy.alpha * policy.benefit);
  const double log_phi = static_cast<double>(policy.lives()) * std::log1p(jump * survival);
  quote.price = log_phi / (policy.alpha * std::exp(r * (policy.maturity - t)));
  return quote;
}

PremiumResidual premium_pde_residual(const PriceSurface& surface, double r, std::size_t k, std::size_t j) {
  const auto& policy = surface.policy();
  require(policy.kind == ContractKind::PureEndowment, "premium equation applies to a single pure endowment");
  require(k >= 1 && k + 1 < surface.time_levels() && j >= 1 && j + 1 < surface.space_nodes(),
          "premium residual needs an interior node");
  const auto& times = surface.times();
  auto price = [&](std::size_t kk, std::size_t jj) {
    return std::log(surface.node(kk, jj)) / (policy.alpha * std::exp(r * (policy.maturity - times[kk])));
  };
  const double t = times[k];
  const double x = surface.log_lambda(j);
  const double lambda = std::exp(x);
  const double h = surface.log_lambda(1) - surface.log_lambda(0);
  const double p = price(k, j);
  const double p_t = (price(k + 1, j) - price(k - 1, j)) / (times[k + 1] - times[k - 1]);
  const double p_x = (price(k, j + 1) - price(k, j - 1)) / (2.0 * h);
  const double p_xx = (price(k, j + 1) - 2.0 * p + price(k, j - 1)) / (h * h);
  const double a = policy.alpha * std::exp(r * (policy.maturity - t));
  const double b = surface.hazard().drift(t, lambda);
  const double c = surface.hazard().volatility(t, lambda);
  // lambda P_lambda = P_x and lambda^2 P_lambdalambda = P_xx - P_x.
  const double terms[] = {
      p_t,
      b * p_x,
      0.5 * c * c * (p_xx - p_x),
      0.5 * c * c * a * p_x * p_x,
      lambda / a * std::expm1(-p * a),
      -r * p,
  };
  PremiumResidual out;
  for (double v : terms) {
    out.residual += v;
    out.scale += std::abs(v);
  }
  return out;
}

}  // namespace indiff
