#include "run_config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string_view>

#include "nvlab/error.hpp"
#include "nvlab/noise.hpp"

namespace nvlab::cli {

namespace {

using nlohmann::json;

void require_object(const json& j, std::string_view where) {
  if (!j.is_object()) throw UsageError(std::string(where) + ": expected an object");
}

void allow_keys(const json& j, std::string_view where, std::initializer_list<std::string_view> keys) {
  require_object(j, where);
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto k : keys) known = known || key == k;
    if (!known) throw UsageError(std::string(where) + ": unknown key '" + key + "'");
  }
}

double number(const json& j, std::string_view where, const char* key, std::optional<double> fallback = {}) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw UsageError(std::string(where) + ": missing '" + key + "'");
  }
  const json& v = j.at(key);
  if (!v.is_number()) throw UsageError(std::string(where) + "." + key + ": expected a number");
  return v.get<double>();
}

int integer(const json& j, std::string_view where, const char* key, std::optional<int> fallback = {}) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw UsageError(std::string(where) + ": missing '" + key + "'");
  }
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw UsageError(std::string(where) + "." + key + ": expected an integer");
  return v.get<int>();
}

std::string text(const json& j, std::string_view where, const char* key) {
  const json& v = j.at(key);
  if (!v.is_string()) throw UsageError(std::string(where) + "." + key + ": expected a string");
  return v.get<std::string>();
}

Calibration parse_calibration(const json& j) {
  allow_keys(j, "calibration", {"D0_Hz", "T0_K", "dDdT_Hz_per_K", "gammaE_Hz_per_G", "valid_range_K"});
  Calibration cal;
  cal.D0 = number(j, "calibration", "D0_Hz", cal.D0);
  cal.T0 = number(j, "calibration", "T0_K", cal.T0);
  cal.dDdT = number(j, "calibration", "dDdT_Hz_per_K", cal.dDdT);
  cal.gammaE = number(j, "calibration", "gammaE_Hz_per_G", cal.gammaE);
  if (j.contains("valid_range_K")) {
    const json& r = j.at("valid_range_K");
    if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number())
      throw UsageError("calibration.valid_range_K: expected [Tmin, Tmax]");
    cal.Tmin = r[0].get<double>();
    cal.Tmax = r[1].get<double>();
  }
  cal.validate();
  return cal;
}

FieldConfig parse_field(const json& j, const Calibration& cal) {
  allow_keys(j, "field",
             {"Bz_G", "omega_minus_Hz", "omega_plus_Hz", "detuning_minus_Hz", "detuning_plus_Hz"});
  const double Bz = number(j, "field", "Bz_G");
  const bool absolute = j.contains("omega_minus_Hz") || j.contains("omega_plus_Hz");
  const bool relative = j.contains("detuning_minus_Hz") || j.contains("detuning_plus_Hz");
  if (absolute == relative)
    throw UsageError("field: give either omega_minus_Hz/omega_plus_Hz or detuning_minus_Hz/detuning_plus_Hz");
  FieldConfig field;
  if (absolute) {
    field.Bz = Bz;
    field.omegaMinus = number(j, "field", "omega_minus_Hz");
    field.omegaPlus = number(j, "field", "omega_plus_Hz");
  } else {
    field = carriers_for_detuning(cal, cal.T0, Bz, number(j, "field", "detuning_minus_Hz"),
                                  number(j, "field", "detuning_plus_Hz"));
  }
  field.validate();
  return field;
}

NoiseModel parse_noise(const json& j) {
  allow_keys(j, "noise", {"static_sigma_Hz", "ou_sigma_Hz", "hahn_T2_us", "ou_tau_c_us", "pulse_amp_sigma"});
  NoiseModel noise;
  noise.staticSigma = number(j, "noise", "static_sigma_Hz", 0.0);
  noise.ouTauC = number(j, "noise", "ou_tau_c_us", noise.ouTauC * 1e6) * 1e-6;
  if (j.contains("ou_sigma_Hz") && j.contains("hahn_T2_us"))
    throw UsageError("noise: ou_sigma_Hz and hahn_T2_us are mutually exclusive");
  if (j.contains("hahn_T2_us")) {
    noise.validate();
    noise.ouSigma = calibrate_ou_sigma_for_hahn(number(j, "noise", "hahn_T2_us") * 1e-6, noise.ouTauC);
  } else {
    noise.ouSigma = number(j, "noise", "ou_sigma_Hz", 0.0);
  }
  noise.pulseAmpSigma = number(j, "noise", "pulse_amp_sigma", 0.0);
  noise.validate();
  return noise;
}

std::vector<double> parse_grid(const json& j) {
  std::vector<double> taus;
  if (j.contains("tau_us")) {
    if (j.contains("tau_start_us") || j.contains("tau_stop_us") || j.contains("points"))
      throw UsageError("sweep: tau_us excludes tau_start_us/tau_stop_us/points");
    const json& list = j.at("tau_us");
    if (!list.is_array()) throw UsageError("sweep.tau_us: expected an array");
    for (const auto& v : list) {
      if (!v.is_number()) throw UsageError("sweep.tau_us: expected numbers");
      taus.push_back(v.get<double>() * 1e-6);
    }
  } else {
    const double start = number(j, "sweep", "tau_start_us");
    const double stop = number(j, "sweep", "tau_stop_us");
    const int points = integer(j, "sweep", "points");
    if (points < 2 || !(stop > start)) throw UsageError("sweep: need points >= 2 and tau_stop_us > tau_start_us");
    for (int i = 0; i < points; ++i) taus.push_back((start + (stop - start) * i / (points - 1)) * 1e-6);
  }
  return taus;
}

}  // namespace

RunConfig parse_run_config(const json& doc, const std::filesystem::path& baseDir) {
  allow_keys(doc, "config",
             {"calibration", "field", "temperature_K", "noise", "photons", "sweep", "sequence", "seed", "threads",
              "shot_overhead_us", "output"});
  RunConfig rc;
  rc.echo = doc;
  SweepConfig& sweep = rc.sweep;

  sweep.physics.calibration = parse_calibration(doc.value("calibration", json::object()));
  if (!doc.contains("field")) throw UsageError("config: missing 'field'");
  sweep.physics.field = parse_field(doc.at("field"), sweep.physics.calibration);
  sweep.physics.temperature = number(doc, "config", "temperature_K", sweep.physics.calibration.T0);
  sweep.noise = parse_noise(doc.value("noise", json::object()));

  const json photons = doc.value("photons", json::object());
  allow_keys(photons, "photons", {"p0", "p1"});
  sweep.photons.p0 = number(photons, "photons", "p0", sweep.photons.p0);
  sweep.photons.p1 = number(photons, "photons", "p1", sweep.photons.p1);

  if (!doc.contains("sweep")) throw UsageError("config: missing 'sweep'");
  const json& grid = doc.at("sweep");
  allow_keys(grid, "sweep", {"tau_us", "tau_start_us", "tau_stop_us", "points", "shots"});
  sweep.taus = parse_grid(grid);
  sweep.shots = integer(grid, "sweep", "shots");

  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned()) throw UsageError("config.seed: expected a non-negative integer");
    sweep.noise.seed = doc.at("seed").get<std::uint64_t>();
  }
  sweep.threads = static_cast<unsigned>(std::max(0, integer(doc, "config", "threads", 0)));
  sweep.shotOverhead = number(doc, "config", "shot_overhead_us", 45.0) * 1e-6;

  if (!doc.contains("sequence")) throw UsageError("config: missing 'sequence'");
  const json& seq = doc.at("sequence");
  allow_keys(seq, "sequence", {"builtin", "file", "N", "tcpmg_readout"});
  sweep.order = integer(seq, "sequence", "N", 1);
  if (seq.contains("builtin") == seq.contains("file"))
    throw UsageError("sequence: give exactly one of 'builtin' or 'file'");
  if (seq.contains("builtin")) {
    const SequenceKind kind = sequence_kind_from_string(text(seq, "sequence", "builtin"));
    BuiltinOptions options;
    if (seq.contains("tcpmg_readout")) {
      const std::string readout = text(seq, "sequence", "tcpmg_readout");
      if (readout == "3pi/2")
        options.tcpmgThreeHalvesReadout = true;
      else if (readout != "pi/2")
        throw UsageError("sequence.tcpmg_readout: expected \"pi/2\" or \"3pi/2\"");
    }
    rc.program = builtin(kind, options);
    rc.sequenceName = std::string(to_string(kind));
  } else {
    if (seq.contains("tcpmg_readout")) throw UsageError("sequence: tcpmg_readout applies to builtins only");
    std::filesystem::path file = text(seq, "sequence", "file");
    if (file.is_relative()) file = baseDir / file;
    std::ifstream in(file);
    if (!in) throw UsageError("sequence file not found: " + file.string());
    std::stringstream buf;
    buf << in.rdbuf();
    rc.program = parse_pseq(buf.str());
    rc.sequenceName = file.filename().string();
  }

  if (doc.contains("output")) {
    const json& out = doc.at("output");
    allow_keys(out, "output", {"csv", "json"});
    if (out.contains("csv")) rc.csvPath = text(out, "output", "csv");
    if (out.contains("json")) rc.jsonPath = std::filesystem::path(text(out, "output", "json"));
  }

  sweep.validate();
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("config file not found: " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("config " + path.string() + ": " + e.what());
  }
  return parse_run_config(doc, path.parent_path());
}

}  // namespace nvlab::cli
