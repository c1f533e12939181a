#include "indiff/cli/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include "indiff/error.hpp"

namespace indiff::cli {
namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::ConfigError, where + ": " + what);
}

void check_keys(const json& obj, std::initializer_list<const char*> keys, const std::string& where) {
  if (!obj.is_object()) fail(where, "expected an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* k : keys) known = known || item.key() == k;
    if (!known) fail(where + "." + item.key(), "unknown key");
  }
}

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) fail(where + "." + key, "missing");
  return obj.at(key);
}

double number(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_number()) fail(where + "." + key, "expected a number, got " + v.dump());
  return v.get<double>();
}

std::optional<double> optional_number(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  return number(obj, key, where);
}

std::uint64_t integer(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    fail(where + "." + key, "expected a non-negative integer, got " + v.dump());
  }
  return v.get<std::uint64_t>();
}

bool flag(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_boolean()) fail(where + "." + key, "expected true or false, got " + v.dump());
  return v.get<bool>();
}

std::string text(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_string()) fail(where + "." + key, "expected a string, got " + v.dump());
  return v.get<std::string>();
}

std::vector<double> numbers(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) fail(where + "[" + std::to_string(i) + "]", "expected a number, got " + v[i].dump());
    out.push_back(v[i].get<double>());
  }
  return out;
}

void merge(json& base, const json& patch) {
  if (base.is_object() && patch.is_object()) {
    for (const auto& item : patch.items()) {
      if (base.contains(item.key())) {
        merge(base[item.key()], item.value());
      } else {
        base[item.key()] = item.value();
      }
    }
    return;
  }
  base = patch;
}

std::vector<RegimeConfig> parse_regimes(const json& regimes, const std::string& where) {
  if (!regimes.is_array() || regimes.empty()) fail(where, "expected a non-empty array");
  std::vector<RegimeConfig> out;
  for (std::size_t i = 0; i < regimes.size(); ++i) {
    const std::string at = where + "[" + std::to_string(i) + "]";
    check_keys(regimes[i], {"name", "mu", "sigma", "jump_up", "jump_down"}, at);
    RegimeConfig r;
    r.name = regimes[i].contains("name") ? text(regimes[i], "name", at) : "regime" + std::to_string(i + 1);
    r.coefficients = {number(regimes[i], "mu", at), number(regimes[i], "sigma", at), number(regimes[i], "jump_up", at),
                      number(regimes[i], "jump_down", at)};
    out.push_back(r);
  }
  return out;
}

ContractKind parse_kind(const std::string& s, const std::string& where) {
  if (s == "pure_endowment") return ContractKind::PureEndowment;
  if (s == "portfolio") return ContractKind::Portfolio;
  if (s == "term_life") return ContractKind::TermLife;
  fail(where, "unknown policy kind '" + s + "' (pure_endowment, portfolio, term_life)");
}

}  // namespace

HazardModel HazardConfig::build() const { return build(lambda0); }

HazardModel HazardConfig::build(double lambda) const {
  if (model == "gompertz") {
    GompertzParams p = gompertz;
    p.lambda0 = lambda;
    return gompertz_as_general(p);
  }
  if (model == "constant") return HazardModel::constant(lambda);
  return HazardModel::piecewise(lambda, segments);
}

MarketParams RunConfig::market() const {
  std::vector<MarketSegment> segments{MarketSegment{0.0, {}, theta_up, theta_down}};
  for (const auto& r : regimes) segments.front().regimes.push_back(r.coefficients);
  segments.insert(segments.end(), market_segments.begin(), market_segments.end());
  return MarketParams(rate, std::move(segments));
}

GeneratorMatrix RunConfig::generator_matrix() const { return validate_generator(generator); }

PdeGrid RunConfig::pde_grid(double lambda_lo, double lambda_hi) const {
  PdeGrid grid = pde_grid_for(lambda_lo, lambda_hi, numerics.pde_padding, numerics.pde_time_steps,
                              numerics.pde_space_nodes);
  if (numerics.pde_lambda_min) grid.lambda_min = *numerics.pde_lambda_min;
  if (numerics.pde_lambda_max) grid.lambda_max = *numerics.pde_lambda_max;
  return grid;
}

McOptions RunConfig::mc_options() const {
  McOptions mc;
  mc.paths = numerics.paths;
  mc.time_step = numerics.mc_time_step;
  mc.rng.master_seed = numerics.seed;
  mc.threads = numerics.threads;
  return mc;
}

json default_config() {
  return json::parse(R"({
  "market": {
    "rate": 0.05,
    "theta_up": 0.3,
    "theta_down": 0.4,
    "regimes": [
      {"name": "good", "mu": 0.15, "sigma": 0.15, "jump_up": 0.15, "jump_down": 0.3},
      {"name": "bad", "mu": 0.12, "sigma": 0.25, "jump_up": 0.1, "jump_down": 0.35}
    ],
    "segments": []
  },
  "generator": [[-0.2, 0.2], [0.1, -0.1]],
  "hazard": {
    "model": "gompertz",
    "lambda0": 0.01,
    "c1": 0.083,
    "c2": 0.1,
    "mean_reversion": 0.5,
    "segments": []
  },
  "policy": {"kind": "pure_endowment", "benefit": 1.0, "cohort": 1, "alpha": 1.0, "maturity": 10.0},
  "numerics": {
    "steps": 1000,
    "paths": 5000,
    "seed": 20240607,
    "threads": 0,
    "initial_regime": 1,
    "s0": 1.0,
    "w0": 0.0,
    "mc_time_step": 0.01,
    "pde_time_steps": 1000,
    "pde_space_nodes": 2001,
    "pde_padding": 10.0,
    "pde_lambda_min": null,
    "pde_lambda_max": null,
    "ode_steps": 1000,
    "ode_tolerance": 1e-8,
    "route": "all"
  },
  "query": {"t": 0.0, "lambda": null, "w_min": 0.0, "w_max": 5.0, "w_points": 11},
  "sweep": {
    "parameter": "lambda0",
    "values": [0.005, 0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.1],
    "route": "mc"
  },
  "output": {"dir": "out", "dump_paths": true, "surface": false, "warn_mb": 100.0}
})");
}

void apply_override(json& document, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) fail("--set " + assignment, "expected key.path=value");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  std::string pointer;
  std::stringstream parts(key);
  for (std::string part; std::getline(parts, part, '.');) {
    if (part.empty()) fail("--set " + assignment, "empty key component");
    pointer += "/" + part;
  }
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  const json::json_pointer ptr(pointer);
  if (!document.contains(ptr)) fail(key, "unknown key");
  document[ptr] = value;
}

RunConfig parse_config(const json& doc) {
  RunConfig cfg;
  cfg.resolved = doc;
  check_keys(doc, {"market", "generator", "hazard", "policy", "numerics", "query", "sweep", "output"}, "config");

  const json& m = field(doc, "market", "config");
  check_keys(m, {"rate", "theta_up", "theta_down", "regimes", "segments"}, "market");
  cfg.rate = number(m, "rate", "market");
  cfg.theta_up = number(m, "theta_up", "market");
  cfg.theta_down = number(m, "theta_down", "market");
  cfg.regimes = parse_regimes(field(m, "regimes", "market"), "market.regimes");
  if (m.contains("segments")) {
    const json& segs = m.at("segments");
    if (!segs.is_array()) fail("market.segments", "expected an array");
    for (std::size_t i = 0; i < segs.size(); ++i) {
      const std::string where = "market.segments[" + std::to_string(i) + "]";
      check_keys(segs[i], {"start", "theta_up", "theta_down", "regimes"}, where);
      MarketSegment seg;
      seg.start = number(segs[i], "start", where);
      seg.theta_up = number(segs[i], "theta_up", where);
      seg.theta_down = number(segs[i], "theta_down", where);
      for (const auto& r : parse_regimes(field(segs[i], "regimes", where), where + ".regimes"))
        seg.regimes.push_back(r.coefficients);
      if (seg.regimes.size() != cfg.regimes.size()) fail(where + ".regimes", "regime count differs from market.regimes");
      cfg.market_segments.push_back(std::move(seg));
    }
  }

  const json& g = field(doc, "generator", "config");
  if (!g.is_array()) fail("generator", "expected an array of rows");
  for (std::size_t i = 0; i < g.size(); ++i) cfg.generator.push_back(numbers(g[i], "generator[" + std::to_string(i) + "]"));

  const json& h = field(doc, "hazard", "config");
  check_keys(h, {"model", "lambda0", "c1", "c2", "mean_reversion", "segments"}, "hazard");
  cfg.hazard.model = text(h, "model", "hazard");
  if (cfg.hazard.model != "gompertz" && cfg.hazard.model != "constant" && cfg.hazard.model != "piecewise") {
    fail("hazard.model", "unknown model '" + cfg.hazard.model + "' (gompertz, constant, piecewise)");
  }
  cfg.hazard.lambda0 = number(h, "lambda0", "hazard");
  if (cfg.hazard.model == "gompertz") {
    cfg.hazard.gompertz = {number(h, "c1", "hazard"), number(h, "c2", "hazard"), number(h, "mean_reversion", "hazard"),
                           cfg.hazard.lambda0};
  }
  if (h.contains("segments")) {
    const json& segs = h.at("segments");
    if (!segs.is_array()) fail("hazard.segments", "expected an array");
    for (std::size_t i = 0; i < segs.size(); ++i) {
      const std::string where = "hazard.segments[" + std::to_string(i) + "]";
      check_keys(segs[i], {"start", "drift", "volatility"}, where);
      cfg.hazard.segments.push_back(
          {number(segs[i], "start", where), number(segs[i], "drift", where), number(segs[i], "volatility", where)});
    }
  }
  if (cfg.hazard.model == "piecewise" && cfg.hazard.segments.empty()) {
    fail("hazard.segments", "piecewise model needs at least one segment");
  }

  const json& p = field(doc, "policy", "config");
  check_keys(p, {"kind", "benefit", "cohort", "alpha", "maturity"}, "policy");
  cfg.policy.kind = parse_kind(text(p, "kind", "policy"), "policy.kind");
  cfg.policy.benefit = number(p, "benefit", "policy");
  cfg.policy.cohort = static_cast<unsigned>(integer(p, "cohort", "policy"));
  cfg.policy.alpha = number(p, "alpha", "policy");
  cfg.policy.maturity = number(p, "maturity", "policy");

  const json& n = field(doc, "numerics", "config");
  check_keys(n, {"steps", "paths", "seed", "threads", "initial_regime", "s0", "w0", "mc_time_step", "pde_time_steps",
                 "pde_space_nodes", "pde_padding", "pde_lambda_min", "pde_lambda_max", "ode_steps", "ode_tolerance",
                 "route"},
             "numerics");
  auto& num = cfg.numerics;
  num.steps = integer(n, "steps", "numerics");
  num.paths = integer(n, "paths", "numerics");
  num.seed = integer(n, "seed", "numerics");
  num.threads = static_cast<unsigned>(integer(n, "threads", "numerics"));
  num.initial_regime = integer(n, "initial_regime", "numerics");
  num.s0 = number(n, "s0", "numerics");
  num.w0 = number(n, "w0", "numerics");
  num.mc_time_step = number(n, "mc_time_step", "numerics");
  num.pde_time_steps = integer(n, "pde_time_steps", "numerics");
  num.pde_space_nodes = integer(n, "pde_space_nodes", "numerics");
  num.pde_padding = number(n, "pde_padding", "numerics");
  num.pde_lambda_min = optional_number(n, "pde_lambda_min", "numerics");
  num.pde_lambda_max = optional_number(n, "pde_lambda_max", "numerics");
  num.ode_steps = integer(n, "ode_steps", "numerics");
  num.ode_tolerance = number(n, "ode_tolerance", "numerics");
  num.route = text(n, "route", "numerics");
  if (num.route != "pde" && num.route != "mc" && num.route != "closed" && num.route != "all") {
    fail("numerics.route", "unknown route '" + num.route + "' (pde, mc, closed, all)");
  }
  if (num.steps == 0) fail("numerics.steps", "must be positive");
  if (!(num.mc_time_step > 0.0)) fail("numerics.mc_time_step", "must be positive");
  if (!(num.s0 > 0.0)) fail("numerics.s0", "must be positive");
  if (num.initial_regime < 1 || num.initial_regime > cfg.regimes.size()) {
    fail("numerics.initial_regime", "must be between 1 and " + std::to_string(cfg.regimes.size()));
  }

  const json& q = field(doc, "query", "config");
  check_keys(q, {"t", "lambda", "w_min", "w_max", "w_points"}, "query");
  cfg.query.t = number(q, "t", "query");
  cfg.query.lambda = optional_number(q, "lambda", "query");
  cfg.query.w_min = number(q, "w_min", "query");
  cfg.query.w_max = number(q, "w_max", "query");
  cfg.query.w_points = integer(q, "w_points", "query");
  if (!(cfg.query.t >= 0.0 && cfg.query.t <= cfg.policy.maturity)) fail("query.t", "must lie in [0, maturity]");
  if (cfg.query.lambda && !(*cfg.query.lambda > 0.0)) fail("query.lambda", "must be positive");
  if (cfg.query.w_points == 0 || cfg.query.w_max < cfg.query.w_min) fail("query", "empty wealth grid");

  const json& s = field(doc, "sweep", "config");
  check_keys(s, {"parameter", "values", "route"}, "sweep");
  cfg.sweep.parameter = text(s, "parameter", "sweep");
  cfg.sweep.values = numbers(field(s, "values", "sweep"), "sweep.values");
  cfg.sweep.route = text(s, "route", "sweep");
  if (cfg.sweep.route != "mc" && cfg.sweep.route != "pde") fail("sweep.route", "expected mc or pde");

  const json& o = field(doc, "output", "config");
  check_keys(o, {"dir", "dump_paths", "surface", "warn_mb"}, "output");
  cfg.output.dir = text(o, "dir", "output");
  cfg.output.dump_paths = flag(o, "dump_paths", "output");
  cfg.output.surface = flag(o, "surface", "output");
  cfg.output.warn_mb = number(o, "warn_mb", "output");
  return cfg;
}

RunConfig load_config(const std::optional<std::string>& path, const std::vector<std::string>& overrides) {
  json doc = default_config();
  if (path) {
    std::ifstream in(*path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open config file " + *path);
    json user;
    try {
      user = json::parse(in);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::ConfigError, *path + ": " + e.what());
    }
    if (!user.is_object()) fail(*path, "top level must be an object");
    merge(doc, user);
  }
  for (const auto& o : overrides) apply_override(doc, o);
  RunConfig cfg = parse_config(doc);
  // Component validation, reported as configuration errors.
  try {
    cfg.generator_matrix();
    if (cfg.generator.size() != cfg.regimes.size()) {
      fail("generator", "has " + std::to_string(cfg.generator.size()) + " rows for " +
                            std::to_string(cfg.regimes.size()) + " regimes");
    }
    cfg.market();
    cfg.hazard.build();
    cfg.policy.validate();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    throw Error(ErrorCode::ConfigError, e.what());
  }
  return cfg;
}

}  // namespace indiff::cli
