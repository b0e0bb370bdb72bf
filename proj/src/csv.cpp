#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "minorlab/io.hpp"

namespace minorlab {

namespace fs = std::filesystem;

void atomic_write(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("rename to " + path.string() + " failed: " + ec.message());
  }
}

const std::vector<CsvSchema>& csv_schemas() {
  static const std::vector<CsvSchema> s = {
      {"sweep", {"eps", "t0", "R", "lambda_hat", "lambda_ci_low", "argmin_start", "argmin_cell", "n_traj", "seed"}, false},
      {"density", {"cell_index", "center_coords", "estimate", "ci_lo", "ci_hi", "hr_mask"}, false},
      {"endpoints", {"traj_id", "x1", "escaped"}, true},
      {"kernel", {"t", "i", "j", "p"}, false},
      {"mixing", {"eps", "t", "tv"}, false},
  };
  return s;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

bool is_number(const std::string& s) {
  if (s.empty()) return false;
  char* end = nullptr;
  errno = 0;
  std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

// p or p/q with integer parts.
bool is_rational(const std::string& s) {
  const auto slash = s.find('/');
  if (slash == std::string::npos) return is_number(s);
  const std::string a = s.substr(0, slash), b = s.substr(slash + 1);
  auto digits = [](const std::string& x, bool sign) {
    std::size_t i = sign && !x.empty() && (x[0] == '-' || x[0] == '+') ? 1 : 0;
    if (i == x.size()) return false;
    for (; i < x.size(); ++i)
      if (x[i] < '0' || x[i] > '9') return false;
    return true;
  };
  return digits(a, true) && digits(b, false);
}

bool field_ok(const std::string& schema, const std::string& column, const std::string& v) {
  if (schema == "density" && column == "center_coords") {
    for (const auto& part : split(v, ';'))
      if (!is_number(part)) return false;
    return true;
  }
  if (schema == "kernel" && column == "p") return is_rational(v);
  return is_number(v);
}

}  // namespace

std::optional<std::string> match_csv_header(const std::string& header) {
  const auto cols = split(header);
  for (const auto& s : csv_schemas()) {
    if (!s.coordinate_columns) {
      if (cols == s.columns) return s.name;
      continue;
    }
    if (cols.size() < 3 || cols.front() != s.columns.front() || cols.back() != s.columns.back()) continue;
    bool ok = true;
    for (std::size_t k = 1; k + 1 < cols.size(); ++k)
      if (cols[k] != "x" + std::to_string(k)) ok = false;
    if (ok) return s.name;
  }
  return std::nullopt;
}

CsvCheck validate_csv(const fs::path& path) {
  CsvCheck r;
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    r.problem = "unreadable";
    return r;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  if (text.empty()) {
    r.problem = "empty file";
    return r;
  }
  if (text.back() != '\n') {
    r.problem = "missing trailing newline (truncated)";
    return r;
  }
  std::istringstream lines(text);
  std::string header;
  std::getline(lines, header);
  const auto schema = match_csv_header(header);
  if (!schema) {
    r.problem = "header matches no known schema: " + header;
    return r;
  }
  r.schema = *schema;
  const auto cols = split(header);
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(lines, line)) {
    ++lineno;
    const auto f = split(line);
    if (f.size() != cols.size()) {
      r.problem = "line " + std::to_string(lineno) + ": expected " + std::to_string(cols.size()) + " fields, got " +
                  std::to_string(f.size());
      return r;
    }
    for (std::size_t k = 0; k < f.size(); ++k)
      if (!field_ok(r.schema, cols[k], f[k])) {
        r.problem = "line " + std::to_string(lineno) + ": bad value '" + f[k] + "' in column " + cols[k];
        return r;
      }
    ++r.rows;
  }
  r.ok = true;
  return r;
}

void write_mixing_csv(const MixingReport& r, const std::vector<double>& t_grid, std::ostream& out) {
  out << "eps,t,tv\n";
  char buf[96];
  for (std::size_t e = 0; e < r.rows.size() && e < r.tv_curves.size(); ++e)
    for (std::size_t k = 0; k < r.tv_curves[e].size() && k < t_grid.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", r.rows[e].eps, t_grid[k], r.tv_curves[e][k]);
      out << buf;
    }
}

}  // namespace minorlab
