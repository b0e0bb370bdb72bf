#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "minorlab/io.hpp"
#include "minorlab/tasks.hpp"

namespace minorlab {

namespace fs = std::filesystem;

ReportSummary report_directory(const fs::path& dir) {
  ReportSummary out;
  if (!fs::is_directory(dir)) throw ConfigError(0, "not a directory: " + dir.string());
  std::vector<fs::path> entries;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file()) entries.push_back(e.path());
  std::sort(entries.begin(), entries.end());

  Json tasks = Json::array(), corrupt = Json::array(), missing = Json::array();
  std::map<std::string, bool> criteria;
  for (const auto& p : entries) {
    const std::string name = p.filename().string();
    if (name == "summary.json" || name.find(".tmp.") != std::string::npos) continue;
    if (p.extension() == ".csv") {
      const CsvCheck c = validate_csv(p);
      if (!c.ok) corrupt.push_back({{"file", name}, {"problem", c.problem}});
      continue;
    }
    if (p.extension() != ".json") continue;
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    Json j;
    try {
      j = Json::parse(ss.str());
    } catch (const std::exception& e) {
      corrupt.push_back({{"file", name}, {"problem", std::string("invalid JSON: ") + e.what()}});
      continue;
    }
    if (!j.is_object() || !j.contains("task") || !j["task"].is_string() || !j.contains("passes") ||
        !j["passes"].is_boolean()) {
      corrupt.push_back({{"file", name}, {"problem", "not a task report (needs string task and bool passes)"}});
      continue;
    }
    const bool passes = j["passes"].get<bool>();
    Json entry = {{"file", name}, {"task", j["task"]}, {"criterion", j.value("criterion", Json(nullptr))},
                  {"passes", passes}};
    tasks.push_back(entry);
    if (j.contains("criterion") && j["criterion"].is_string()) {
      const std::string id = j["criterion"].get<std::string>();
      const auto it = criteria.find(id);
      criteria[id] = (it == criteria.end() ? true : it->second) && passes;
    }
    if (j.contains("outputs") && j["outputs"].is_array())
      for (const auto& f : j["outputs"])
        if (f.is_string() && !fs::exists(dir / f.get<std::string>()))
          missing.push_back({{"file", f.get<std::string>()}, {"listed_by", name}});
  }

  Json crit = Json::object();
  for (const auto& [id, ok] : criteria) crit[id] = ok ? "pass" : "fail";
  out.summary["n_tasks"] = tasks.size();
  out.summary["tasks"] = tasks;
  out.summary["criteria"] = crit;
  out.summary["corrupt"] = corrupt;
  out.summary["missing"] = missing;
  out.exit_code = corrupt.empty() && missing.empty() ? kExitPass : kExitFail;
  atomic_write(dir / "summary.json", out.summary.dump(2) + "\n");
  return out;
}

}  // namespace minorlab
