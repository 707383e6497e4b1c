#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "nvlab/experiment.hpp"

namespace nvlab {

inline constexpr const char* kTraceCsvHeader = "tau_us,mean_counts,stderr,shots";

void write_trace_csv(const Trace& trace, std::ostream& os);

// Throws UsageError on a missing/invalid header or malformed rows.
Trace read_trace_csv(std::istream& is);

// Same fields as the CSV plus the seed and an echo of the run configuration.
nlohmann::json trace_to_json(const Trace& trace, const nlohmann::json& configEcho);

}  // namespace nvlab
