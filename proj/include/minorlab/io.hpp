#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "minorlab/density.hpp"

namespace minorlab {

// Writes to a sibling temp file, then renames over the target.
void atomic_write(const std::filesystem::path& path, const std::string& content);

struct CsvSchema {
  std::string name;
  std::vector<std::string> columns;  // for "endpoints", the d = 1 header
  bool coordinate_columns = false;   // x1..xd between the first and last column
};

// sweep, density, endpoints, kernel, mixing.
const std::vector<CsvSchema>& csv_schemas();

// Name of the schema the header line matches exactly.
std::optional<std::string> match_csv_header(const std::string& header);

struct CsvCheck {
  bool ok = false;
  std::string schema;
  std::size_t rows = 0;
  std::string problem;  // first defect found
};

// Header must match a schema; every row needs the header's field count and a
// trailing newline; numeric columns must parse.
CsvCheck validate_csv(const std::filesystem::path& path);

// Header: eps,t,tv. One row per evaluated grid time.
void write_mixing_csv(const MixingReport& r, const std::vector<double>& t_grid, std::ostream& out);

}  // namespace minorlab
