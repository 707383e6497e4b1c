#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "nvlab/experiment.hpp"
#include "nvlab/pulse_program.hpp"

namespace nvlab::cli {

// Single JSON document driving `nvlab simulate`. Unknown keys are rejected.
//
// {
//   "calibration": {"D0_Hz", "T0_K", "dDdT_Hz_per_K", "gammaE_Hz_per_G", "valid_range_K": [lo, hi]},
//   "field": {"Bz_G", "omega_minus_Hz", "omega_plus_Hz"}
//         or {"Bz_G", "detuning_minus_Hz", "detuning_plus_Hz"},  // relative to the lines at T0
//   "temperature_K": 300,
//   "noise": {"static_sigma_Hz", "ou_sigma_Hz" | "hahn_T2_us", "ou_tau_c_us", "pulse_amp_sigma"},
//   "photons": {"p0", "p1"},
//   "sweep": {"tau_us": [...]} or {"tau_start_us", "tau_stop_us", "points"}, plus "shots",
//   "sequence": {"builtin": "tcpmg", "N": 3, "tcpmg_readout": "pi/2" | "3pi/2"}
//            or {"file": "seq.pseq", "N": 3},
//   "seed": 1, "threads": 0, "shot_overhead_us": 45,
//   "output": {"csv": "trace.csv", "json": "trace.json"}
// }
struct RunConfig {
  SweepConfig sweep;
  ProgramAst program;
  std::string sequenceName;
  std::filesystem::path csvPath = "trace.csv";
  std::optional<std::filesystem::path> jsonPath;
  nlohmann::json echo;
};

// Relative sequence paths resolve against `baseDir`. Throws UsageError on
// any schema violation or missing file.
RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& baseDir);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace nvlab::cli
