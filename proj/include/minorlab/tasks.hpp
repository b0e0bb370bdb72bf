#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "minorlab/config.hpp"
#include "minorlab/serialize.hpp"

namespace minorlab {

// Acceptance criterion a task reports on, if any.
std::optional<std::string> criterion_for_task(const std::string& task);

struct TaskResult {
  bool passes = false;
  Json report;
  // File name (relative to the output directory) and contents.
  std::vector<std::pair<std::string, std::string>> files;
};

// Computes without touching the filesystem (smallset may read its kernel CSV).
// Domain failures come back as passes = false with a failure report; usage
// problems throw ConfigError.
TaskResult execute_task(const ExperimentConfig& cfg);

// Exit codes.
constexpr int kExitPass = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFail = 2;

// Runs the task and writes its files plus <task>.json atomically. The JSON
// carries task, criterion, passes, the echoed config and the report.
int run_experiment(const ExperimentConfig& cfg);

struct ReportSummary {
  Json summary;
  int exit_code = kExitPass;
};

// Merges the task JSONs in dir, validates every CSV and writes summary.json.
ReportSummary report_directory(const std::filesystem::path& dir);

}  // namespace minorlab
