// simdyn: configuration-driven experiment runner.
//
//   simdyn <subcommand> --config FILE --out DIR [--threads N]
//          [--set section.key=value]... [--emit-plot-data]

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "simdyn/cli/runner.hpp"

int main(int argc, char** argv) {
  using namespace simdyn::cli;

  CLI::App app{"simdyn: transfer operators, statistics and orbit counting for random expanding maps"};
  app.set_version_flag("--version", std::string(simdyn::kVersion));
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_dir;
  unsigned threads = 1;
  std::vector<std::string> overrides;
  bool plot = false;

  for (const auto& name : subcommands()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("-c,--config", config_path, "experiment config file")->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--out", out_dir, "output directory")->required();
    sub->add_option("-t,--threads", threads, "worker threads")->check(CLI::Range(1u, 256u));
    sub->add_option("--set", overrides, "override a config key: section.key=value");
    sub->add_flag("--emit-plot-data", plot, "also write plot.csv in long format");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  RunRequest req;
  req.subcommand = app.get_subcommands().front()->get_name();
  req.threads = threads;
  req.emit_plot_data = plot;
  try {
    req.config = Config::load(config_path);
    for (const auto& o : overrides) req.config.set(o);
  } catch (const simdyn::ConfigError& e) {
    std::cerr << "simdyn " << req.subcommand << ": " << e.what() << "\n";
    return kConfig;
  }
  return run(req, out_dir, std::cerr);
}
