#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "minorlab/config.hpp"
#include "minorlab/io.hpp"
#include "minorlab/tasks.hpp"

using namespace minorlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("minorlab_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

const char* kDensity = R"([experiment]
task = density
output = OUT

[model]
family = langevin
n = 1

[run]
eps_list = 0.3
t0 = 1
R = 1
grid_lo = -4
grid_hi = 4
grid_cells = 16
n_traj = 3000
dt_phys = 0.05
seed = 5
)";

std::string with_output(std::string text, const fs::path& out) {
  text.replace(text.find("OUT"), 3, out.string());
  return text;
}

}  // namespace

TEST_CASE("config: a valid file parses with defaults applied") {
  ExperimentConfig c = parse_config(kDensity);
  CHECK(c.task == "density");
  CHECK(c.family == "langevin");
  CHECK(c.reals("eps_list") == std::vector<double>{0.3});
  CHECK(c.uint("grid_cells") == 16);
  CHECK(c.real("max_out_of_box") == doctest::Approx(0.01));
  CHECK(c.real("escape_level") == doctest::Approx(1e4));
  CHECK(c.model().d == 2);
}

TEST_CASE("config: errors carry the offending line") {
  const std::string base = "[experiment]\ntask = lev\noutput = o\n[run]\n";
  CHECK(error_of(base + "max_element = 4\nmax_element = 5\n") == "line 6: duplicate key max_element (first set on line 5)");
  CHECK(error_of(base + "bogus = 1\n").rfind("line 5: unknown key bogus", 0) == 0);
  CHECK(error_of(base + "eps_list = 0.5\n").rfind("line 5: key eps_list does not apply", 0) == 0);
  CHECK(error_of(base + "max_element = 99\n").rfind("line 5:", 0) == 0);
  CHECK(error_of("[experiment]\ntask = lev\noutput = o\n[extra]\n").rfind("line 4: unknown section", 0) == 0);
  CHECK(error_of("task = lev\n").rfind("line 1: key outside any section", 0) == 0);
  CHECK(error_of("[experiment]\ntask = nosuch\noutput = o\n").rfind("line 2:", 0) == 0);
  CHECK(error_of("[experiment]\ntask = density\noutput = o\n[run]\n").find("[model]") != std::string::npos);
}

TEST_CASE("config: eps outside (0,1) is a schema error") {
  std::string text = kDensity;
  text.replace(text.find("eps_list = 0.3"), 14, "eps_list = 1.5");
  CHECK(error_of(text) == "line 10: eps_list = 1.5 outside (0, 1)");
}

TEST_CASE("config: model parameters are validated before any computation") {
  std::string text = kDensity;
  text.replace(text.find("n = 1"), 5, "U = x1^3");
  CHECK(error_of(text).find("line 7:") == 0);
}

TEST_CASE("schema lists every task and key") {
  const std::string s = schema_json();
  for (const auto& t : task_names()) CHECK(s.find("\"" + t + "\"") != std::string::npos);
  CHECK(task_names().size() == 11);
  CHECK_FALSE(task_needs_model("lev"));
  CHECK(task_needs_model("minorize"));
}

TEST_CASE("criterion mapping") {
  CHECK(criterion_for_task("minorize") == std::optional<std::string>("AC-5"));
  CHECK(criterion_for_task("check") == std::optional<std::string>("AC-2"));
  CHECK(criterion_for_task("smallset") == std::optional<std::string>("AC-11"));
  CHECK_FALSE(criterion_for_task("simulate").has_value());
}

TEST_CASE("atomic write replaces the target and leaves no temp file") {
  fs::path d = scratch("atomic");
  atomic_write(d / "sub" / "a.txt", "one\n");
  atomic_write(d / "sub" / "a.txt", "two\n");
  CHECK(slurp(d / "sub" / "a.txt") == "two\n");
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(d / "sub")) n += e.is_regular_file();
  CHECK(n == 1);
}

TEST_CASE("CSV validation") {
  fs::path d = scratch("csv");
  spit(d / "ok.csv", "eps,t,tv\n0.1,0.01,0.9\n");
  spit(d / "trunc.csv", "eps,t,tv\n0.1,0.01,0.9\n0.1,0.0");
  spit(d / "header.csv", "eps,time,tv\n0.1,0.01,0.9\n");
  spit(d / "fields.csv", "eps,t,tv\n0.1,0.01\n");
  spit(d / "number.csv", "eps,t,tv\n0.1,abc,0.9\n");
  spit(d / "empty.csv", "");
  spit(d / "end.csv", "traj_id,x1,x2,x3,escaped\n0,1,2,3,0\n");
  spit(d / "dens.csv", "cell_index,center_coords,estimate,ci_lo,ci_hi,hr_mask\n0,0.5;-0.5,1,0.5,1.5,1\n");
  spit(d / "kern.csv", "t,i,j,p\n1,0,0,1/2\n");
  CHECK(validate_csv(d / "ok.csv").ok);
  CHECK(validate_csv(d / "ok.csv").schema == "mixing");
  CHECK(validate_csv(d / "ok.csv").rows == 1);
  CHECK_FALSE(validate_csv(d / "trunc.csv").ok);
  CHECK_FALSE(validate_csv(d / "header.csv").ok);
  CHECK_FALSE(validate_csv(d / "fields.csv").ok);
  CHECK_FALSE(validate_csv(d / "number.csv").ok);
  CHECK_FALSE(validate_csv(d / "empty.csv").ok);
  CHECK(validate_csv(d / "end.csv").schema == "endpoints");
  CHECK(validate_csv(d / "dens.csv").ok);
  CHECK(validate_csv(d / "kern.csv").ok);
  CHECK(match_csv_header("eps,t0,R,lambda_hat,lambda_ci_low,argmin_start,argmin_cell,n_traj,seed") ==
        std::optional<std::string>("sweep"));
  CHECK_FALSE(match_csv_header("eps,t0,R").has_value());
}

TEST_CASE("identical config and seed give byte-identical CSV outputs") {
  fs::path a = scratch("det_a"), b = scratch("det_b");
  CHECK(run_experiment(parse_config(with_output(kDensity, a))) == kExitPass);
  CHECK(run_experiment(parse_config(with_output(kDensity, b))) == kExitPass);
  const std::string ca = slurp(a / "density_eps0.csv"), cb = slurp(b / "density_eps0.csv");
  CHECK_FALSE(ca.empty());
  CHECK(ca == cb);
  CHECK(validate_csv(a / "density_eps0.csv").ok);
  CHECK(ca.rfind("cell_index,center_coords,estimate,ci_lo,ci_hi,hr_mask\n", 0) == 0);
}

TEST_CASE("report: empty directory") {
  fs::path d = scratch("rep_empty");
  ReportSummary s = report_directory(d);
  CHECK(s.exit_code == kExitPass);
  CHECK(s.summary["n_tasks"] == 0);
  CHECK(fs::exists(d / "summary.json"));
}

TEST_CASE("report: a passing sweep is listed under AC-5") {
  fs::path d = scratch("rep_sweep");
  const std::string cfg = R"([experiment]
task = minorize
output = )" + d.string() + R"(

[model]
family = langevin
n = 1

[run]
eps_list = 0.4, 0.2
t0 = 2
R = 1
grid_lo = -3.5
grid_hi = 3.5
grid_cells = 14
n_traj = 5000
dt_phys = 0.05
seed = 7
)";
  CHECK(run_experiment(parse_config(cfg)) == kExitPass);
  CHECK(validate_csv(d / "sweep.csv").schema == "sweep");
  ReportSummary s = report_directory(d);
  CHECK(s.exit_code == kExitPass);
  CHECK(s.summary["criteria"]["AC-5"] == "pass");
  CHECK(s.summary["n_tasks"] == 1);
}

TEST_CASE("report: truncated CSV and missing outputs") {
  fs::path d = scratch("rep_bad");
  spit(d / "sweep.csv", "eps,t0,R,lambda_hat,lambda_ci_low,argmin_start,argmin_cell,n_traj,seed\n0.1,2,1");
  ReportSummary s = report_directory(d);
  CHECK(s.exit_code == kExitFail);
  REQUIRE(s.summary["corrupt"].size() == 1);
  CHECK(s.summary["corrupt"][0]["file"] == "sweep.csv");

  fs::path e = scratch("rep_missing");
  spit(e / "mixing.json", R"({"task":"mixing","criterion":"AC-6","passes":true,"outputs":["mixing.csv"]})");
  ReportSummary t = report_directory(e);
  CHECK(t.exit_code == kExitFail);
  CHECK(t.summary["missing"].size() == 1);
}

TEST_CASE("domain failures produce a report and exit code 2") {
  fs::path d = scratch("broken");
  const std::string cfg = "[experiment]\ntask = check\noutput = " + d.string() +
                          "\n[model]\nfamily = lorenz96\nd = 4\nlambda = 1, 0, 1, 0\nsigma = 1, 0, 1, 0\neta = 1\n"
                          "[run]\nn_points = 1000\nrun_certificate = false\nseed = 3\n";
  CHECK(run_experiment(parse_config(cfg)) == kExitFail);
  const std::string j = slurp(d / "check.json");
  CHECK(j.find("\"passes\": false") != std::string::npos);
  CHECK(j.find("first_violation") != std::string::npos);
}

TEST_CASE("tasks without a model run from config alone") {
  fs::path d = scratch("lev");
  CHECK(run_experiment(parse_config("[experiment]\ntask = lev\noutput = " + d.string() + "\n[run]\nmax_element = 6\n")) ==
        kExitPass);
  CHECK(fs::exists(d / "lev.json"));
}
