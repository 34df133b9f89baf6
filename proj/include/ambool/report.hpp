#pragma once

#include <string>

#include "ambool/boolean.hpp"

namespace ambool {

/// JSON document with the report fields under stable snake_case keys. Stage
/// timings are wall-clock and therefore left out when `timings` is false.
std::string report_json(const BooleanReport& report, bool timings = true);

/// Throws Error(kIo) when the file cannot be written.
void save_report(const BooleanReport& report, const std::string& path, bool timings = true);

}  // namespace ambool
