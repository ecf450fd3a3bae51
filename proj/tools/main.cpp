#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "rbfloi/errors.hpp"

using namespace rbfloi;

int main(int argc, char** argv) {
  CLI::App app{"Overlapped RBF-FD with least orthogonal interpolation on surfaces"};
  app.require_subcommand(1);

  std::string config_file;
  app.add_option("--config", config_file, "key = value config file; flags override it");
  std::map<std::string, std::string> flags;
  for (const auto& key : cli::config_keys()) {
    app.add_option("--" + key.name, flags[key.name], key.help);
  }

  const std::map<std::string, std::string> help{
      {"nodes", "generate or load a node set and write it"},
      {"assemble", "assemble the surface operators and write them as triplets"},
      {"spectrum", "dense spectrum of the Laplacian (N <= 5000)"},
      {"solve", "run a problem end to end"},
      {"convergence", "run a problem on several refinements and fit the error slope"},
  };
  for (const auto& [name, text] : help) app.add_subcommand(name, text)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: config: " << e.what() << '\n';
    return 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    cli::RawConfig raw;
    if (!config_file.empty()) raw = cli::read_config_file(config_file);
    for (const auto& key : cli::config_keys()) {
      if (app.count("--" + key.name) > 0) raw[key.name] = flags[key.name];
    }
    const cli::RunConfig config = cli::resolve_config(command, raw);
    if (command == "nodes") return cli::cmd_nodes(config);
    if (command == "assemble") return cli::cmd_assemble(config);
    if (command == "spectrum") return cli::cmd_spectrum(config);
    if (command == "solve") return cli::cmd_solve(config);
    return cli::cmd_convergence(config);
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << '\n';
    return 1;
  }
}
