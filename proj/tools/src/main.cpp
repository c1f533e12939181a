#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "indiff/cli/commands.hpp"
#include "indiff/cli/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Indifference pricing of mortality-linked policies in a regime-switching jump market"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<unsigned> threads;
  std::string out_dir;
  app.add_option("-c,--config", config_path, "JSON run configuration (default: $INDIFF_CONFIG, else built-in)");
  app.add_option("-s,--set", overrides, "Override a config key, e.g. --set policy.alpha=2")->take_all();
  app.add_option("-t,--threads", threads, "Worker threads (0 = all cores); results do not depend on it");
  app.add_option("-o,--out", out_dir, "Output directory (default: output.dir)");

  const std::vector<std::pair<std::string, std::string>> commands{
      {"simulate", "Regime, stock, hazard and wealth paths"},
      {"strategy", "Optimal stock holding along a sampled regime path"},
      {"value", "phi(t, i) and value-function slices"},
      {"price", "Indifference price by PDE, Monte Carlo and closed form"},
      {"sensitivity", "Price over a parameter sweep"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);
  app.add_subcommand("config", "Print the resolved configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::optional<std::string> path;
  if (!config_path.empty()) {
    path = config_path;
  } else if (const char* env = std::getenv("INDIFF_CONFIG"); env && *env) {
    path = std::string(env);
  }
  if (threads) overrides.push_back("numerics.threads=" + std::to_string(*threads));

  indiff::cli::RunConfig cfg;
  try {
    cfg = indiff::cli::load_config(path, overrides);
  } catch (const indiff::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return indiff::cli::exit_code(e.code());
  }

  const std::string name = app.get_subcommands().front()->get_name();
  if (name == "config") {
    std::cout << cfg.resolved.dump(2) << '\n';
    return 0;
  }
  return indiff::cli::run_command(name, cfg, out_dir.empty() ? cfg.output.dir : out_dir, std::cout, std::cerr);
}
