#include <CLI11.hpp>

#include <iostream>

#include "minorlab/config.hpp"
#include "minorlab/exec.hpp"
#include "minorlab/tasks.hpp"

using namespace minorlab;

int main(int argc, char** argv) {
  CLI::App app{"minorlab: experiment runner for minorization and small-set diagnostics"};
  app.require_subcommand(1);

  std::string config_path, output_override;
  auto* run = app.add_subcommand("run", "run the task named in a config file");
  run->add_option("config", config_path, "config file")->required();
  run->add_option("-o,--output", output_override, "override [experiment] output");

  std::string report_dir;
  auto* report = app.add_subcommand("report", "merge task reports in a directory into summary.json");
  report->add_option("dir", report_dir, "output directory")->required();

  app.add_subcommand("print-schema", "print the config schema as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  configure_threads_from_env();

  try {
    if (run->parsed()) {
      ExperimentConfig cfg = load_config(config_path);
      if (!output_override.empty()) cfg.output = output_override;
      const int code = run_experiment(cfg);
      std::cout << cfg.task << ": " << (code == kExitPass ? "pass" : "FAIL") << " -> "
                << (cfg.output / (cfg.task + ".json")).string() << "\n";
      return code;
    }
    if (report->parsed()) {
      const ReportSummary s = report_directory(report_dir);
      std::cout << s.summary.dump(2) << "\n";
      return s.exit_code;
    }
    std::cout << schema_json();
    return kExitPass;
  } catch (const ConfigError& e) {
    std::cerr << "minorlab: config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "minorlab: " << e.what() << "\n";
    return kExitUsage;
  }
}
