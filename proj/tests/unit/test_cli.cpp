#include <doctest.h>

#include <indiff/cli/commands.hpp>
#include <indiff/cli/config.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace indiff;
using namespace indiff::cli;
namespace fs = std::filesystem;

namespace {

using Table = std::vector<std::vector<std::string>>;

Table read_csv(const fs::path& path) {
  Table rows;
  std::ifstream in(path);
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

std::size_t column(const Table& t, const std::string& name) {
  for (std::size_t i = 0; i < t.front().size(); ++i)
    if (t.front()[i] == name) return i;
  FAIL("no column " << name);
  return 0;
}

double cell(const Table& t, std::size_t row, const std::string& name) { return std::stod(t[row + 1][column(t, name)]); }

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("indiff_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  return dir;
}

int run(const std::string& command, std::vector<std::string> overrides, const fs::path& dir) {
  overrides.push_back("numerics.pde_time_steps=200");
  const RunConfig cfg = load_config(std::nullopt, overrides);
  std::ostringstream log, err;
  const int code = run_command(command, cfg, dir, log, err);
  if (code != 0) MESSAGE(err.str());
  return code;
}

int run_binary(const std::string& args) {
  const std::string cmd = std::string(INDIFF_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("shipped default config equals the built-in defaults") {
  std::ifstream in(fs::path(INDIFF_SOURCE_DIR) / "configs" / "default.json");
  REQUIRE(in);
  CHECK(nlohmann::ordered_json::parse(in) == default_config());
}

TEST_CASE("config loading") {
  const RunConfig cfg = load_config(std::nullopt, {});
  CHECK(cfg.regimes.size() == 2);
  CHECK(cfg.numerics.paths == 5000);
  CHECK(cfg.numerics.steps == 1000);
  CHECK(cfg.policy.maturity == 10.0);
  CHECK(cfg.query_lambda() == 0.01);

  const RunConfig o = load_config(std::nullopt, {"policy.alpha=2.5", "market.regimes.1.mu=0.2", "policy.kind=term_life"});
  CHECK(o.policy.alpha == 2.5);
  CHECK(o.regimes[1].coefficients.mu == 0.2);
  CHECK(o.policy.kind == ContractKind::TermLife);

  auto code_of = [](std::vector<std::string> overrides) {
    try {
      load_config(std::nullopt, overrides);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::DomainError;
  };
  CHECK(code_of({"market.volatility=1"}) == ErrorCode::ConfigError);
  CHECK(code_of({"generator=[[-0.2,0.1],[0.1,-0.1]]"}) == ErrorCode::ConfigError);
  CHECK(code_of({"policy.alpha=\"high\""}) == ErrorCode::ConfigError);
  CHECK(code_of({"numerics.initial_regime=3"}) == ErrorCode::ConfigError);
  CHECK(code_of({"market.regimes.0.mu=0.01"}) == ErrorCode::ConfigError);

  const fs::path dir = scratch("config");
  fs::create_directories(dir);
  std::ofstream(dir / "partial.json") << R"({"policy": {"benefit": 2.0}, "numerics": {"paths": 7}})";
  const RunConfig p = load_config((dir / "partial.json").string(), {});
  CHECK(p.policy.benefit == 2.0);
  CHECK(p.policy.alpha == 1.0);
  CHECK(p.numerics.paths == 7);
  std::ofstream(dir / "broken.json") << "{\n  \"policy\": {\n    \"benefit\": ,\n  }\n}\n";
  try {
    load_config((dir / "broken.json").string(), {});
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("binary exit codes") {
  CHECK(exit_code(ErrorCode::ConfigError) == 2);
  CHECK(exit_code(ErrorCode::RowSumNonzero) == 2);
  CHECK(exit_code(ErrorCode::GridTooCoarse) == 3);
  CHECK(exit_code(ErrorCode::StepRejected) == 3);
  const fs::path dir = scratch("exit");
  CHECK(run_binary("-o " + dir.string() + " --set numerics.paths=0 simulate") == 0);
  CHECK(run_binary("-o " + dir.string() + " --set 'generator=[[-0.2,0.1],[0.1,-0.1]]' simulate") == 2);
  CHECK(run_binary("-o " + dir.string() + " --set no.such.key=1 price") == 2);
  CHECK(run_binary("bogus") == 2);
}

TEST_CASE("simulate") {
  const fs::path dir = scratch("simulate");
  REQUIRE(run("simulate", {"numerics.paths=3"}, dir) == 0);
  const Table manifest = read_csv(dir / "manifest.csv");
  REQUIRE(manifest.size() == 4);
  for (std::size_t p = 0; p < 3; ++p) {
    const Table path = read_csv(dir / manifest[p + 1][column(manifest, "file")]);
    std::size_t changes = 0;
    for (std::size_t k = 2; k < path.size(); ++k) changes += path[k][3] != path[k - 1][3];
    CHECK(changes == std::stoul(manifest[p + 1][column(manifest, "switches")]));
    CHECK(path.size() >= 1002);
  }
  CHECK(fs::exists(dir / "summary.json"));

  const fs::path empty = scratch("simulate_empty");
  REQUIRE(run("simulate", {"numerics.paths=0"}, empty) == 0);
  CHECK(read_csv(empty / "manifest.csv").size() == 1);
}

TEST_CASE("strategy") {
  const fs::path dir = scratch("strategy");
  REQUIRE(run("strategy", {}, dir) == 0);
  const Table t = read_csv(dir / "strategy_regimes.csv");
  for (std::size_t k = 0; k + 1 < t.size(); ++k) {
    CHECK(cell(t, k, "pi_star_good") > 0.0);
    CHECK(cell(t, k, "pi_star_bad") < 0.0);
  }

  const fs::path merton = scratch("strategy_merton");
  REQUIRE(run("strategy", {"market.theta_up=0", "market.theta_down=0"}, merton) == 0);
  const Table m = read_csv(merton / "strategy.csv");
  for (std::size_t k = 0; k + 1 < m.size(); ++k)
    CHECK(cell(m, k, "pi_star") == doctest::Approx(cell(m, k, "merton")).epsilon(1e-12));

  const fs::path doubled = scratch("strategy_doubled");
  REQUIRE(run("strategy", {"market.theta_up=0", "market.theta_down=0", "policy.alpha=2"}, doubled) == 0);
  const Table d = read_csv(doubled / "strategy_regimes.csv");
  const Table base = read_csv(merton / "strategy_regimes.csv");
  for (std::size_t k = 0; k + 1 < d.size(); k += 50)
    CHECK(cell(d, k, "pi_star_good") == doctest::Approx(0.5 * cell(base, k, "pi_star_good")).epsilon(1e-12));
}

TEST_CASE("value") {
  const fs::path dir = scratch("value");
  REQUIRE(run("value", {}, dir) == 0);
  const Table v = read_csv(dir / "value.csv");
  for (std::size_t k = 0; k + 1 < v.size(); ++k) CHECK(cell(v, k, "v") < cell(v, k, "v_bar"));
  const Table phi = read_csv(dir / "phi.csv");
  CHECK(cell(phi, phi.size() - 2, "phi_good") == 1.0);
}

TEST_CASE("price") {
  const fs::path dir = scratch("price");
  REQUIRE(run("price", {"numerics.paths=2000"}, dir) == 0);
  const Table q = read_csv(dir / "quotes.csv");
  REQUIRE(q.size() == 3);
  CHECK(std::abs(cell(q, 0, "price") - cell(q, 1, "price")) < 3.0 * cell(q, 1, "std_error"));

  const fs::path terminal = scratch("price_terminal");
  REQUIRE(run("price", {"query.t=10", "hazard.model=constant", "policy.benefit=1.5"}, terminal) == 0);
  const Table tq = read_csv(terminal / "quotes.csv");
  REQUIRE(tq.size() == 4);
  for (std::size_t k = 0; k < 3; ++k) CHECK(cell(tq, k, "price") == 1.5);

  const fs::path term = scratch("price_term");
  REQUIRE(run("price", {"policy.kind=term_life", "numerics.paths=100"}, term) == 0);
  const Table tl = read_csv(term / "quotes.csv");
  for (std::size_t k = 0; k + 1 < tl.size(); ++k) {
    CHECK(cell(tl, k, "price") == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
    CHECK(cell(tl, k, "std_error") == 0.0);
  }
}

TEST_CASE("sensitivity") {
  auto sweep = [](const std::string& name, const std::string& parameter, const std::string& values) {
    const fs::path dir = scratch(name);
    REQUIRE(run("sensitivity", {"numerics.paths=1000", "sweep.parameter=" + parameter, "sweep.values=" + values}, dir) == 0);
    const Table t = read_csv(dir / "sensitivity.csv");
    std::vector<double> prices;
    for (std::size_t k = 0; k + 1 < t.size(); ++k) prices.push_back(cell(t, k, "price"));
    return prices;
  };
  const auto by_lambda = sweep("sens_lambda", "lambda0", "[0.005,0.01,0.02,0.05,0.1]");
  for (std::size_t k = 1; k < by_lambda.size(); ++k) CHECK(by_lambda[k] < by_lambda[k - 1]);
  const auto by_tau = sweep("sens_tau", "time_to_maturity", "[10,7.5,5,2.5,0]");
  for (std::size_t k = 1; k < by_tau.size(); ++k) CHECK(by_tau[k] > by_tau[k - 1]);
  CHECK(by_tau.back() == 1.0);
  const auto by_alpha = sweep("sens_alpha", "alpha", "[0.5,1,2,4]");
  for (std::size_t k = 1; k < by_alpha.size(); ++k) CHECK(by_alpha[k] > by_alpha[k - 1]);

  const fs::path bad = scratch("sens_bad");
  CHECK(run("sensitivity", {"sweep.parameter=volatility"}, bad) == 2);
}

TEST_CASE("CSV cells round-trip exactly") {
  const fs::path dir = scratch("roundtrip");
  REQUIRE(run("price", {"numerics.paths=200"}, dir) == 0);
  const Table q = read_csv(dir / "quotes.csv");
  for (std::size_t k = 1; k < q.size(); ++k) {
    for (std::size_t c = 1; c < q[k].size(); ++c) {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.16e", std::strtod(q[k][c].c_str(), nullptr));
      CHECK(q[k][c] == buf);
    }
  }
}
