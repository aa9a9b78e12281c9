#include "widthlab/experiments.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <exception>

int main(int argc, char** argv) {
  using namespace widthlab;
  CLI::App app{"widthlab: width and entropy experiments for parametric transport"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_dir;
  for (ExperimentKind kind : all_kinds()) {
    auto* sub = app.add_subcommand(to_string(kind), "run the " + to_string(kind) + " experiment");
    sub->add_option("--config", config_path, "experiment configuration (INI)")->required();
    sub->add_option("--out", out_dir, "output directory (overrides experiment.output)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    ExperimentConfig config = load_config(config_path);
    if (to_string(config.kind) != name)
      throw ConfigError("experiment.kind", fmt::format("experiment.kind is '{}' but the subcommand is '{}'",
                                                       to_string(config.kind), name));
    const std::string dir = !out_dir.empty() ? out_dir : (!config.output.empty() ? config.output : ".");
    const RunReport report = run(config);
    write_outputs(report, dir);
    std::fputs(format_report(report).c_str(), stdout);
    std::printf("wall time: %.2f s\n", report.wall_time);
    return report.passed() ? 0 : 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
