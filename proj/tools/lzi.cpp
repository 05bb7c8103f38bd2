#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "lzi/cli/cli.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw lzi::cli::ConfigError("cannot read configuration file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exactly solvable multistate sweeps: integrals, spectral flow and transition probabilities"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_path;
  lzi::cli::Overrides overrides;
  for (const auto& name : lzi::cli::command_names()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("-c,--config", config_path, "JSON configuration file")->required();
    sub->add_option("-o,--out", out_path, "write the CSV/JSON result here instead of stdout");
    sub->add_option("--seed", overrides.seed, "override the configuration seed");
    sub->add_option("--tolerance", overrides.tolerance, "override the pass/fail tolerance");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return lzi::cli::kConfigError;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  std::string config;
  try {
    config = read_file(config_path);
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return lzi::cli::kConfigError;
  }

  const auto result = lzi::cli::run_command(command, config, overrides);
  if (!result.diagnostics.empty()) std::cerr << result.diagnostics << '\n';
  if (out_path.empty()) {
    std::cout << result.output;
  } else if (!result.output.empty()) {
    std::ofstream out(out_path, std::ios::binary);
    out << result.output;
    if (!out) {
      std::cerr << "cannot write " << out_path << '\n';
      return lzi::cli::kConfigError;
    }
  }
  return result.exit_code;
}
