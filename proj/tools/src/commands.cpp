#include "indiff/cli/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <variant>

#include "indiff/parallel.hpp"
#include "indiff/pricing.hpp"
#include "indiff/sim_engine.hpp"
#include "indiff/strategy.hpp"
#include "indiff/value_odes.hpp"

namespace indiff::cli {
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

using Cell = std::variant<double, std::size_t, std::string>;

std::string format(const Cell& cell) {
  if (const double* d = std::get_if<double>(&cell)) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", *d);
    return buf;
  }
  if (const std::size_t* n = std::get_if<std::size_t>(&cell)) return std::to_string(*n);
  return std::get<std::string>(cell);
}

class Csv {
 public:
  Csv(const fs::path& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    write(header);
  }
  void row(const std::vector<Cell>& cells) {
    std::vector<std::string> text;
    text.reserve(cells.size());
    for (const auto& c : cells) text.push_back(format(c));
    write(text);
  }

 private:
  void write(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) out_ << (i ? "," : "") << fields[i];
    out_ << '\n';
  }
  std::ofstream out_;
};

json estimate_json(const MeanEstimate& e) { return {{"mean", e.mean}, {"std_error", e.std_error}, {"count", e.count}}; }

void write_summary(const fs::path& dir, const std::string& command, const RunConfig& cfg, json body,
                   CommandOutput& out) {
  json config = cfg.resolved;
  if (config.contains("numerics")) config["numerics"].erase("threads");
  body["command"] = command;
  body["config"] = config;
  const fs::path path = dir / "summary.json";
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  f << body.dump(2) << '\n';
  out.files.push_back(path);
}

void warn_size(double bytes, const RunConfig& cfg, const std::string& what, std::ostream& log) {
  const double mb = bytes / (1024.0 * 1024.0);
  if (mb > cfg.output.warn_mb) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "warning: %s will take about %.0f MB\n", what.c_str(), mb);
    log << buf;
  }
}

std::string padded(std::size_t index, std::size_t width) {
  std::string s = std::to_string(index);
  return std::string(s.size() < width ? width - s.size() : 0, '0') + s;
}

std::string regime_label(const RunConfig& cfg, std::size_t regime) { return cfg.regimes.at(regime).name; }

PriceQuote price_pde(const HazardModel& hazard, const PolicySpec& policy, const RunConfig& cfg, double t,
                     double lambda, double r) {
  const PriceSurface surface = solve_surface(hazard, policy, cfg.pde_grid(lambda, lambda));
  return price_from_surface(surface, t, lambda, r);
}

}  // namespace

int exit_code(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidParameter:
    case ErrorCode::NotSquare:
    case ErrorCode::NegativeOffDiagonal:
    case ErrorCode::RowSumNonzero:
    case ErrorCode::IoError:
      return 2;
    default:
      return 3;
  }
}

CommandOutput cmd_simulate(const RunConfig& cfg, const fs::path& dir, std::ostream& log) {
  CommandOutput out;
  const MarketParams market = cfg.market();
  const GeneratorMatrix gen = cfg.generator_matrix();
  const HazardModel hazard = cfg.hazard.build();
  const double horizon = cfg.policy.maturity;
  const double alpha = cfg.policy.alpha;

  ScenarioOptions opts;
  opts.paths = cfg.numerics.paths;
  opts.horizon = horizon;
  opts.steps = cfg.numerics.steps;
  opts.rng.master_seed = cfg.numerics.seed;
  opts.threads = cfg.numerics.threads;
  opts.initial_regime = cfg.numerics.initial_regime - 1;
  opts.s0 = cfg.numerics.s0;
  opts.w0 = cfg.numerics.w0;
  opts.keep_paths = cfg.output.dump_paths;
  if (cfg.output.dump_paths) {
    warn_size(static_cast<double>(opts.paths) * static_cast<double>(opts.steps + 1) * 5.0 * 24.0, cfg, "path dump",
              log);
  }
  const StrategyFn optimal = [&market, alpha, horizon](double t, std::size_t regime) {
    return solve_pi_star(StrategyQuery{market, t, regime, alpha, horizon}).pi_star;
  };
  const ScenarioSet set = run_scenarios(market, gen, hazard, optimal, opts);

  const std::size_t width = std::max<std::size_t>(4, std::to_string(opts.paths).size());
  Csv manifest(dir / "manifest.csv",
               {"path", "file", "switches", "final_regime", "S_T", "lambda_T", "W_T", "up_jumps", "down_jumps"});
  out.files.push_back(dir / "manifest.csv");
  for (std::size_t p = 0; p < opts.paths; ++p) {
    const PathSummary& s = set.summaries[p];
    std::string file;
    if (cfg.output.dump_paths) {
      file = "path_" + padded(p + 1, width) + ".csv";
      const ScenarioPath& path = set.paths[p];
      Csv csv(dir / file, {"t", "S", "lambda", "regime", "W"});
      const auto& times = path.stock.times;
      for (std::size_t k = 0; k < times.size(); ++k) {
        csv.row({times[k], path.stock.values[k], path.hazard[k], path.stock.regime_path.state_at(times[k]) + 1,
                 path.wealth->values[k]});
      }
      out.files.push_back(dir / file);
    }
    manifest.row({p + 1, file, s.switches, s.final_regime + 1, s.stock_end, s.hazard_end, s.wealth_end, s.up_jumps,
                  s.down_jumps});
  }
  json body;
  body["paths"] = opts.paths;
  body["stock_end"] = estimate_json(set.stock_end);
  body["wealth_end"] = estimate_json(set.wealth_end);
  body["survival"] = estimate_json(set.survival);
  body["up_jumps"] = estimate_json(set.up_jumps);
  body["down_jumps"] = estimate_json(set.down_jumps);
  write_summary(dir, "simulate", cfg, body, out);
  log << "simulated " << opts.paths << " paths\n";
  return out;
}

CommandOutput cmd_strategy(const RunConfig& cfg, const fs::path& dir, std::ostream& log) {
  CommandOutput out;
  const MarketParams market = cfg.market();
  const GeneratorMatrix gen = cfg.generator_matrix();
  const double horizon = cfg.policy.maturity;
  const double alpha = cfg.policy.alpha;
  const double r = market.rate();

  Stream chain = RngSpec{cfg.numerics.seed}.stream(0, Channel::Chain);
  const RegimePath regimes = sample_regime_path(gen, cfg.numerics.initial_regime - 1, horizon, chain);
  const TimeGrid grid = TimeGrid::uniform(0.0, horizon, cfg.numerics.steps);
  const StrategyTrajectory traj = strategy_path(regimes, alpha, market, horizon, grid);

  Csv csv(dir / "strategy.csv", {"t", "regime", "pi_star", "lower", "upper", "residual", "merton"});
  out.files.push_back(dir / "strategy.csv");
  bool widened = false;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const double t = traj.times[k];
    const std::size_t i = traj.regimes[k];
    const OptimalStrategy s = solve_pi_star(StrategyQuery{market, t, i, alpha, horizon}, traj.pi_star[k]);
    widened = widened || s.widened;
    const auto& c = market.coefficients(t, i);
    const double merton = (c.mu - r) / (alpha * c.sigma * c.sigma * std::exp(r * (horizon - t)));
    csv.row({t, i + 1, traj.pi_star[k], s.lower_bound, s.upper_bound, s.residual, merton});
  }

  std::vector<std::string> header{"t"};
  for (const auto& reg : cfg.regimes) header.push_back("pi_star_" + reg.name);
  Csv by_regime(dir / "strategy_regimes.csv", header);
  out.files.push_back(dir / "strategy_regimes.csv");
  for (double t : grid.times()) {
    std::vector<Cell> row{t};
    for (std::size_t i = 0; i < cfg.regimes.size(); ++i)
      row.emplace_back(solve_pi_star(StrategyQuery{market, t, i, alpha, horizon}).pi_star);
    by_regime.row(row);
  }

  json body;
  body["switch_times"] = regimes.switch_times;
  std::vector<std::size_t> states;
  for (auto s : regimes.states) states.push_back(s + 1);
  body["states"] = states;
  body["bracket_widened"] = widened;
  write_summary(dir, "strategy", cfg, body, out);
  log << "strategy along a path with " << regimes.switch_times.size() << " switches\n";
  return out;
}

CommandOutput cmd_value(const RunConfig& cfg, const fs::path& dir, std::ostream& log) {
  CommandOutput out;
  const MarketParams market = cfg.market();
  const GeneratorMatrix gen = cfg.generator_matrix();
  const HazardModel hazard = cfg.hazard.build();
  VarphiOptions opts;
  opts.steps = cfg.numerics.ode_steps;
  opts.tolerance = cfg.numerics.ode_tolerance;
  const VarphiSolution sol = solve_varphi(gen, market, cfg.policy.alpha, cfg.policy.maturity, opts);

  std::vector<std::string> header{"t"};
  for (const auto& reg : cfg.regimes) header.push_back("phi_" + reg.name);
  Csv phi(dir / "phi.csv", header);
  out.files.push_back(dir / "phi.csv");
  for (std::size_t k = 0; k < sol.times().size(); ++k) {
    std::vector<Cell> row{sol.times()[k]};
    for (double v : sol.values()[k]) row.emplace_back(v);
    phi.row(row);
  }

  const double lambda = cfg.query_lambda();
  const double t = cfg.query.t;
  const PriceSurface surface = solve_surface(hazard, cfg.policy, cfg.pde_grid(lambda, lambda));
  Csv value(dir / "value.csv", {"t", "w", "lambda", "regime", "v_bar", "v"});
  out.files.push_back(dir / "value.csv");
  const std::size_t m = cfg.query.w_points;
  for (std::size_t k = 0; k < m; ++k) {
    const double w = m == 1 ? cfg.query.w_min
                            : cfg.query.w_min + (cfg.query.w_max - cfg.query.w_min) * static_cast<double>(k) /
                                                    static_cast<double>(m - 1);
    for (std::size_t i = 0; i < sol.regimes(); ++i) {
      value.row({t, w, lambda, i + 1, value_bar(sol, t, w, i), value_full(sol, surface, t, w, lambda, i)});
    }
  }

  json body;
  body["ode_steps"] = sol.steps();
  body["ode_error_estimate"] = sol.error_estimate();
  json phi0 = json::object();
  for (std::size_t i = 0; i < sol.regimes(); ++i) phi0[regime_label(cfg, i)] = sol.phi(0.0, i);
  body["phi_at_0"] = phi0;
  body["linking_function"] = surface.value(t, lambda);
  write_summary(dir, "value", cfg, body, out);
  log << "phi solved with " << sol.steps() << " RK4 steps\n";
  return out;
}

CommandOutput cmd_price(const RunConfig& cfg, const fs::path& dir, std::ostream& log) {
  CommandOutput out;
  const HazardModel hazard = cfg.hazard.build();
  const double lambda = cfg.query_lambda();
  const double t = cfg.query.t;
  const double r = cfg.rate;
  const std::string& route = cfg.numerics.route;

  std::optional<PriceQuote> pde, mc, closed;
  std::optional<PriceSurface> surface;
  if (route == "pde" || route == "all") {
    surface = solve_surface(hazard, cfg.policy, cfg.pde_grid(lambda, lambda));
    pde = price_from_surface(*surface, t, lambda, r);
  }
  if (route == "mc" || route == "all") mc = price_feynman_kac(hazard, cfg.policy, t, lambda, r, cfg.mc_options());
  if (route == "closed" || route == "all") {
    closed = price_closed_form(hazard, cfg.policy, t, lambda, r);
    if (!closed) log << "closed form not available for a stochastic hazard\n";
  }

  Csv csv(dir / "quotes.csv", {"route", "t", "lambda", "price", "std_error"});
  out.files.push_back(dir / "quotes.csv");
  json quotes = json::array();
  for (const auto* q : {&pde, &mc, &closed}) {
    if (!*q) continue;
    csv.row({std::string(to_string((*q)->route)), (*q)->t, (*q)->lambda, (*q)->price, (*q)->std_error});
    quotes.push_back({{"route", to_string((*q)->route)}, {"price", (*q)->price}, {"std_error", (*q)->std_error}});
    log << to_string((*q)->route) << ": " << format((*q)->price) << " (se " << format((*q)->std_error) << ")\n";
  }

  json diagnostics = json::object();
  if (pde && mc) {
    const double diff = pde->price - mc->price;
    diagnostics["pde_minus_mc"] = diff;
    if (mc->std_error > 0.0) diagnostics["pde_minus_mc_in_se"] = diff / mc->std_error;
  }
  if (pde && closed) diagnostics["pde_minus_closed"] = pde->price - closed->price;
  if (mc && closed) diagnostics["mc_minus_closed"] = mc->price - closed->price;

  if (cfg.output.surface && surface) {
    warn_size(static_cast<double>(surface->time_levels() * surface->space_nodes()) * 4.0 * 24.0, cfg,
              "surface dump", log);
    Csv dump(dir / "surface.csv", {"t", "lambda", "phi", "P"});
    out.files.push_back(dir / "surface.csv");
    const auto& policy = surface->policy();
    for (std::size_t k = 0; k < surface->time_levels(); ++k) {
      const double tk = surface->times()[k];
      const double scale = policy.alpha * std::exp(r * (policy.maturity - tk));
      for (std::size_t j = 0; j < surface->space_nodes(); ++j) {
        const double phi = surface->node(k, j);
        const double price = k + 1 == surface->time_levels() ? policy.terminal_price() : std::log(phi) / scale;
        dump.row({tk, std::exp(surface->log_lambda(j)), phi, price});
      }
    }
  }

  json body;
  body["quotes"] = quotes;
  body["diagnostics"] = diagnostics;
  if (surface) {
    body["pde_space_nodes"] = surface->space_nodes();
    body["pde_refinements"] = surface->refinements();
    body["pde_boundaries"] = PriceSurface::kBoundaryNote;
  }
  write_summary(dir, "price", cfg, body, out);
  return out;
}

CommandOutput cmd_sensitivity(const RunConfig& cfg, const fs::path& dir, std::ostream& log) {
  CommandOutput out;
  const std::string& name = cfg.sweep.parameter;
  const std::vector<double>& values = cfg.sweep.values;

  struct Point {
    HazardModel hazard;
    PolicySpec policy;
    double t;
    double lambda;
    double r;
  };
  auto point = [&](double v) {
    Point p{cfg.hazard.build(), cfg.policy, cfg.query.t, cfg.query_lambda(), cfg.rate};
    if (name == "lambda0") {
      if (!(v > 0.0)) throw Error(ErrorCode::ConfigError, "sweep lambda0 values must be positive");
      p.hazard = cfg.hazard.build(v);
      p.lambda = v;
    } else if (name == "time_to_maturity") {
      if (!(v >= 0.0 && v <= cfg.policy.maturity)) {
        throw Error(ErrorCode::ConfigError, "sweep time_to_maturity values must lie in [0, maturity]");
      }
      p.t = cfg.policy.maturity - v;
    } else if (name == "alpha") {
      p.policy.alpha = v;
    } else if (name == "r") {
      p.r = v;
    } else if (name == "K") {
      p.policy.benefit = v;
    } else if (name == "n") {
      if (!(v >= 1.0) || v != std::floor(v)) throw Error(ErrorCode::ConfigError, "sweep n values must be integers >= 1");
      p.policy.cohort = static_cast<unsigned>(v);
      if (p.policy.kind == ContractKind::PureEndowment) p.policy.kind = ContractKind::Portfolio;
    } else {
      throw Error(ErrorCode::ConfigError,
                  "sweep.parameter: unknown '" + name + "' (lambda0, time_to_maturity, alpha, r, K, n)");
    }
    try {
      p.policy.validate();
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigError, e.what());
    }
    return p;
  };
  std::vector<Point> points;
  for (double v : values) points.push_back(point(v));

  std::vector<PriceQuote> quotes(points.size());
  if (cfg.sweep.route == "mc") {
    // Same RngSpec at every point: common random numbers.
    const McOptions mc = cfg.mc_options();
    for (std::size_t k = 0; k < points.size(); ++k) {
      const Point& p = points[k];
      quotes[k] = price_feynman_kac(p.hazard, p.policy, p.t, p.lambda, p.r, mc);
    }
  } else {
    parallel_for(points.size(), cfg.numerics.threads, [&](std::size_t k) {
      const Point& p = points[k];
      quotes[k] = price_pde(p.hazard, p.policy, cfg, p.t, p.lambda, p.r);
    });
  }

  Csv csv(dir / "sensitivity.csv", {"parameter", "value", "price", "std_error", "route"});
  out.files.push_back(dir / "sensitivity.csv");
  json rows = json::array();
  for (std::size_t k = 0; k < points.size(); ++k) {
    csv.row({name, values[k], quotes[k].price, quotes[k].std_error, std::string(to_string(quotes[k].route))});
    rows.push_back({{"value", values[k]}, {"price", quotes[k].price}, {"std_error", quotes[k].std_error}});
  }
  json body;
  body["parameter"] = name;
  body["rows"] = rows;
  write_summary(dir, "sensitivity", cfg, body, out);
  log << "swept " << name << " over " << values.size() << " values\n";
  return out;
}

int run_command(const std::string& name, const RunConfig& cfg, const fs::path& dir, std::ostream& log,
                std::ostream& err) {
  using Command = CommandOutput (*)(const RunConfig&, const fs::path&, std::ostream&);
  Command command = nullptr;
  if (name == "simulate") command = cmd_simulate;
  if (name == "strategy") command = cmd_strategy;
  if (name == "value") command = cmd_value;
  if (name == "price") command = cmd_price;
  if (name == "sensitivity") command = cmd_sensitivity;
  if (!command) {
    err << "unknown command '" << name << "'\n";
    return 2;
  }
  try {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
    command(cfg, dir, log);
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace indiff::cli
