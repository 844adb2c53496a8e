#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qbatt/experiments.hpp"

namespace {

nlohmann::json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw qbatt::experiments::ConfigError("cannot open config file: " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw qbatt::experiments::ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace qbatt::experiments;

  CLI::App app{"qbatt: quench charging of spin-lattice quantum batteries and the\n"
               "bounds on their charging power"};
  app.require_subcommand(1);

  std::string config_path;
  RunOptions options;
  std::uint64_t seed_flag = 0;
  int workers_flag = 0;

  const auto add_common = [&](CLI::App* cmd, bool with_svg) {
    cmd->add_option("--config", config_path, "JSON experiment config")->required();
    cmd->add_option("--out", options.out_dir, "output directory (default: out)");
    cmd->add_option("--seed", seed_flag, "override the config seed");
    cmd->add_option("--workers", workers_flag, "override the worker count");
    if (with_svg) cmd->add_flag("--svg", options.svg, "also render SVG plots");
    return cmd;
  };

  CLI::App* verify = add_common(
      app.add_subcommand("verify", "run the invariant suite on a randomized corpus"), false);
  CLI::App* figure1a = add_common(
      app.add_subcommand("figure1a", "SY-like random driving ensemble vs the k=2 bound"), true);
  CLI::App* figure1b = add_common(
      app.add_subcommand("figure1b", "mixed nearest-neighbor + global driving vs the "
                                     "k-local decomposition bound"), true);
  CLI::App* scaling = add_common(
      app.add_subcommand("scaling", "fit the raw driving norm against alpha*sqrt(L^2(L-1))"),
      true);
  CLI::App* histogram = add_common(
      app.add_subcommand("histogram", "bin commutator norms over disorder realizations"), true);
  CLI::App* quench = add_common(
      app.add_subcommand("quench", "single-instance quench scan dump"), false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) return app.exit(e);
    app.exit(e);
    return 2;
  }

  try {
    for (CLI::App* cmd : {verify, figure1a, figure1b, scaling, histogram, quench}) {
      if (!cmd->parsed()) continue;
      if (cmd->count("--seed")) options.seed = seed_flag;
      if (cmd->count("--workers")) {
        if (workers_flag < 1) throw ConfigError("--workers must be >= 1");
        options.workers = workers_flag;
      }
    }
    const nlohmann::json config = load_config(config_path);
    if (verify->parsed()) return run_verify(config, options);
    if (figure1a->parsed()) return run_figure1a(config, options);
    if (figure1b->parsed()) return run_figure1b(config, options);
    if (scaling->parsed()) return run_scaling(config, options);
    if (histogram->parsed()) return run_histogram(config, options);
    if (quench->parsed()) return run_quench(config, options);
    std::cerr << "no subcommand selected\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
