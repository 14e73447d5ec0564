#pragma once

#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "cli/run_config.hpp"

namespace hyl::cli {

/// Empty cell, number, integer or literal text ("inf", "coexistence", labels).
using Cell = std::variant<std::monostate, double, long, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::string> notices;  // echoed into the provenance footer
};

/// %.{precision}g; infinities become "inf" / "-inf".
std::string format_number(double v, int precision);
std::string format_cell(const Cell& c, int precision);

/// SHA-1 of "blob <size>\0<content>", as printed by git hash-object.
std::string git_blob_hash(const std::string& content);

/// schema=1 line, header, rows, then '#' footer lines with the parameter echo,
/// tool version and the content hash of everything above the footer.
std::string render_csv(const Table& t, const RunConfig& cfg);

/// {"schema":1, "config":..., "columns":..., "rows":[{...}], "provenance":{...}}.
/// Numbers are rounded to the configured precision before serialisation.
nlohmann::json render_json(const Table& t, const RunConfig& cfg);

std::string render(const Table& t, const RunConfig& cfg);

/// Writes to cfg.out, or stdout when it is empty.
void emit(const Table& t, const RunConfig& cfg);

}  // namespace hyl::cli
