#include <CLI11.hpp>

#include <iostream>

#include "ngalerkin/harness.hpp"

using namespace ngalerkin;

int main(int argc, char** argv) {
  CLI::App app{"Neural Galerkin schemes with dynamic particles"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  bool static_run = false;
  CLI::App* run = app.add_subcommand("run", "run an experiment from a config file");
  run->add_option("--config", config_path, "YAML config, or preset:<name>")->required();
  CLI::Option* seed_opt = run->add_option("--seed", seed, "root seed");
  run->add_option("--out", out_dir, "output directory");
  run->add_flag("--static-baseline", static_run, "replace the sampler by uniform resampling");

  std::string run_dir;
  bool svg = false;
  CLI::App* plot = app.add_subcommand("plot", "write plot data for a finished run");
  plot->add_option("--run", run_dir, "run directory")->required();
  plot->add_flag("--svg", svg, "also render SVG line plots");

  std::string show;
  CLI::App* list = app.add_subcommand("presets", "list built-in experiment configs");
  list->add_option("--show", show, "print the YAML of one preset");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      RunConfig cfg = config_path.rfind("preset:", 0) == 0
                          ? parse_config_text("preset: " + config_path.substr(7), config_path)
                          : parse_config(config_path);
      if (*seed_opt) cfg.seed = seed;
      if (!out_dir.empty()) cfg.out = out_dir;
      if (static_run) cfg = static_baseline(cfg);
      const RunSummary s = run_experiment(cfg);
      if (s.error) std::cerr << "ngalerkin: " << *s.error << '\n';
      return s.exit_status;
    }
    if (*plot) {
      for (const auto& p : emit_plotdata(run_dir, svg)) std::cout << p.string() << '\n';
      return 0;
    }
    if (!show.empty()) {
      std::cout << preset(show).yaml;
      return 0;
    }
    for (const Preset& p : presets()) std::cout << p.name << "\t" << p.description << '\n';
    return 0;
  } catch (const std::exception& ex) {
    std::cerr << "ngalerkin: " << ex.what() << '\n';
    return 2;
  }
}
