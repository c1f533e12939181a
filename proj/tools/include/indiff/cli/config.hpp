#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "indiff/hazard.hpp"
#include "indiff/market.hpp"
#include "indiff/pricing.hpp"
#include "indiff/regime_chain.hpp"

namespace indiff::cli {

struct RegimeConfig {
  std::string name;
  RegimeCoefficients coefficients;
};

struct HazardConfig {
  std::string model = "gompertz";  // gompertz | constant | piecewise
  GompertzParams gompertz{};
  double lambda0 = 0.01;
  std::vector<HazardSegment> segments;

  HazardModel build() const;
  HazardModel build(double lambda0) const;
};

struct NumericsConfig {
  std::size_t steps = 1000;
  std::size_t paths = 5000;
  std::uint64_t seed = 20240607;
  unsigned threads = 0;
  std::size_t initial_regime = 1;  // 1-based
  double s0 = 1.0;
  double w0 = 0.0;
  double mc_time_step = 0.01;
  std::size_t pde_time_steps = 1000;
  std::size_t pde_space_nodes = 2001;
  double pde_padding = 10.0;
  std::optional<double> pde_lambda_min;
  std::optional<double> pde_lambda_max;
  std::size_t ode_steps = 1000;
  double ode_tolerance = 1e-8;
  std::string route = "all";  // pde | mc | closed | all
};

struct QueryConfig {
  double t = 0.0;
  std::optional<double> lambda;  // defaults to the hazard's lambda0
  double w_min = 0.0;
  double w_max = 5.0;
  std::size_t w_points = 11;
};

struct SweepConfig {
  std::string parameter = "lambda0";  // lambda0 | time_to_maturity | alpha | r | K | n
  std::vector<double> values;
  std::string route = "mc";           // mc | pde
};

struct OutputConfig {
  std::string dir = "out";
  bool dump_paths = true;
  bool surface = false;
  double warn_mb = 100.0;
};

struct RunConfig {
  double rate = 0.05;
  double theta_up = 0.3;
  double theta_down = 0.4;
  std::vector<RegimeConfig> regimes;
  /// Later coefficient tables, each in force from its start time.
  std::vector<MarketSegment> market_segments;
  std::vector<std::vector<double>> generator;
  HazardConfig hazard;
  PolicySpec policy;
  NumericsConfig numerics;
  QueryConfig query;
  SweepConfig sweep;
  OutputConfig output;
  nlohmann::ordered_json resolved;  // merged document the fields were read from

  MarketParams market() const;
  GeneratorMatrix generator_matrix() const;
  double query_lambda() const { return query.lambda.value_or(hazard.lambda0); }
  PdeGrid pde_grid(double lambda_lo, double lambda_hi) const;
  McOptions mc_options() const;
};

/// Built-in defaults: the two-regime market, Gompertz hazard and pure
/// endowment used throughout the examples.
nlohmann::ordered_json default_config();

/// Defaults, then `path` (if any), then `key.path=value` overrides; unknown
/// keys and invalid values raise ConfigError.
RunConfig load_config(const std::optional<std::string>& path, const std::vector<std::string>& overrides);

RunConfig parse_config(const nlohmann::ordered_json& document);

/// Applies one `a.b.c=value` override; the value is read as JSON when it
/// parses, otherwise as a string.
void apply_override(nlohmann::ordered_json& document, const std::string& assignment);

}  // namespace indiff::cli
