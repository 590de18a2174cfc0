#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "frw/likelihood.hpp"

namespace frw {

/// Parses delimited life data with a header naming the columns
/// time, time2, kind, trunc_lower, count (any order; time and kind required).
/// Blank lines and lines starting with '#' are skipped. Errors carry the
/// 1-based line number.
std::vector<Observation> parse_lifedata(std::istream &in, std::string_view source = "<input>");
std::vector<Observation> parse_lifedata_text(std::string_view text, std::string_view source = "<input>");
/// Reads a file, or a bundled dataset when `path` names one (e.g. "rocket_motor").
std::vector<Observation> load_lifedata(const std::string &path);

void write_lifedata(std::ostream &out, const std::vector<Observation> &data);

/// Names of datasets shipped with the library.
std::vector<std::string> bundled_datasets();
/// Raw CSV text of a bundled dataset; throws InputError for unknown names.
std::string_view bundled_dataset_text(std::string_view name);

/// Splits one delimited line on commas, trimming surrounding whitespace.
std::vector<std::string> split_fields(std::string_view line);

/// Strict numeric field parsers; throw InputError naming `what`.
double parse_real(std::string_view field, const std::string &what);
long parse_count(std::string_view field, const std::string &what);

} // namespace frw
