#include "nvlab/trace_io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "nvlab/error.hpp"

namespace nvlab {

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

void write_trace_csv(const Trace& trace, std::ostream& os) {
  os << kTraceCsvHeader << '\n';
  char line[160];
  for (const auto& p : trace.points) {
    std::snprintf(line, sizeof line, "%.10g,%.12g,%.12g,%llu\n", p.tau * 1e6, p.meanCounts, p.stdError,
                  static_cast<unsigned long long>(p.shots));
    os << line;
  }
}

Trace read_trace_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || trim(line) != kTraceCsvHeader)
    throw UsageError(std::string("trace: expected header '") + kTraceCsvHeader + "'");
  Trace trace;
  std::size_t lineNo = 1;
  while (std::getline(is, line)) {
    ++lineNo;
    line = trim(line);
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field[4];
    for (int i = 0; i < 4; ++i)
      if (!std::getline(row, field[i], ','))
        throw UsageError("trace: line " + std::to_string(lineNo) + " has fewer than 4 fields");
    std::string extra;
    if (std::getline(row, extra, ','))
      throw UsageError("trace: line " + std::to_string(lineNo) + " has more than 4 fields");
    TracePoint p;
    try {
      std::size_t used = 0;
      p.tau = std::stod(field[0], &used) * 1e-6;
      p.meanCounts = std::stod(field[1]);
      p.stdError = std::stod(field[2]);
      p.shots = std::stoull(field[3]);
    } catch (const std::exception&) {
      throw UsageError("trace: line " + std::to_string(lineNo) + " is not numeric");
    }
    if (p.stdError < 0.0) throw UsageError("trace: line " + std::to_string(lineNo) + " has negative stderr");
    if (!trace.points.empty() && !(p.tau > trace.points.back().tau))
      throw UsageError("trace: tau values must be strictly increasing");
    trace.points.push_back(p);
  }
  if (trace.points.empty()) throw UsageError("trace: no data rows");
  return trace;
}

nlohmann::json trace_to_json(const Trace& trace, const nlohmann::json& configEcho) {
  nlohmann::json doc;
  doc["seed"] = trace.seed;
  doc["config"] = configEcho;
  auto& points = doc["points"] = nlohmann::json::array();
  for (const auto& p : trace.points) {
    points.push_back({{"tau_us", p.tau * 1e6},
                      {"mean_counts", p.meanCounts},
                      {"stderr", p.stdError},
                      {"shots", p.shots}});
  }
  return doc;
}

}  // namespace nvlab
