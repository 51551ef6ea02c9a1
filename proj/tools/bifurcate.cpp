// bifurcate <command> --config <path> [--force] [--out <dir>]
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "bifurcate/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Bifurcation diagrams for -u'' = a u - f(u) - c h on (0, L) with Dirichlet conditions"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", "bifurcate 0.1.0");

  std::string config;
  bool force = false;
  std::string out;
  for (const auto& name : bifurcate::command_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "run configuration (YAML)")->required()->check(CLI::ExistingFile);
    sub->add_flag("--force", force, "proceed even if the hypothesis check fails");
    sub->add_option("--out", out, "output directory (overrides output.directory)");
  }
  app.footer("Threads: BIFURCATE_THREADS (default: hardware concurrency).");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : bifurcate::kExitError;
  }

  bifurcate::RunRequest req;
  req.command = app.get_subcommands().front()->get_name();
  req.force = force;
  if (!out.empty()) req.out = out;
  try {
    req.config = bifurcate::load_config(config);
  } catch (const bifurcate::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return bifurcate::kExitError;
  }
  return bifurcate::run(req, std::cout, std::cerr).status;
}
