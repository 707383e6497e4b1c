#include "cli.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nvlab/error.hpp"
#include "nvlab/estimator.hpp"
#include "nvlab/svg_plot.hpp"
#include "nvlab/thermal_profile.hpp"
#include "nvlab/trace_io.hpp"
#include "run_config.hpp"

namespace nvlab::cli {

namespace {

using nlohmann::json;

std::ifstream open_input(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw UsageError(std::string(what) + " not found: " + path);
  return in;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path);
  out << content;
  if (!out) throw Error("write failed: " + path);
}

std::string format(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

// --- simulate -------------------------------------------------------------

struct SimulateArgs {
  std::string config;
  std::string csv;
  std::string json;
  int threads = -1;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  RunConfig rc = load_run_config(a.config);
  if (!a.csv.empty()) rc.csvPath = a.csv;
  if (!a.json.empty()) rc.jsonPath = std::filesystem::path(a.json);
  if (a.threads >= 0) rc.sweep.threads = static_cast<unsigned>(a.threads);

  const auto start = std::chrono::steady_clock::now();
  const Trace trace = run_sweep(rc.sweep, rc.program);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::ostringstream csv;
  write_trace_csv(trace, csv);
  write_file(rc.csvPath.string(), csv.str());
  if (rc.jsonPath) write_file(rc.jsonPath->string(), trace_to_json(trace, rc.echo).dump(2) + "\n");

  const double perPoint = rc.sweep.shots * (rc.sweep.shotOverhead + rc.sweep.taus.back());
  out << "sequence=" << rc.sequenceName << " N=" << rc.sweep.order << " points=" << trace.points.size()
      << " shots=" << rc.sweep.shots << " wall=" << format("%.2f", wall) << "s"
      << " lab_time_per_point~" << format("%.2f", perPoint) << "s\n";
  return kExitOk;
}

// --- fit --------------------------------------------------------------------

struct FitArgs {
  std::string trace;
  std::string out;
  std::string plot;
  bool decayOnly = false;
  int detuningSign = 0;
  std::vector<double> carriers;
  double D0 = Calibration{}.D0;
  double T0 = Calibration{}.T0;
  double dDdT = Calibration{}.dDdT;
  std::optional<double> p0, p1;
};

int cmd_fit(const FitArgs& a, std::ostream& out, std::ostream& err) {
  auto in = open_input(a.trace, "trace file");
  const Trace trace = read_trace_csv(in);
  if (trace.points.size() < 8) throw UsageError("trace: at least 8 points required");

  const bool wantThermo = a.detuningSign != 0 || !a.carriers.empty();
  if (wantThermo && (a.carriers.size() != 2 || (a.detuningSign != 1 && a.detuningSign != -1)))
    throw UsageError("temperature extraction needs --detuning-sign (+1 or -1) and --carriers <omega-1> <omega+1>");
  if (a.p0.has_value() != a.p1.has_value()) throw UsageError("--p0 and --p1 must be given together");

  const Dataset data = counts_dataset(trace);
  const FitOptions options = a.decayOnly ? FitOptions::pure_decay() : FitOptions{};
  DecayParams seed = initial_guess(data).params;
  if (a.decayOnly) {
    seed.f = 0.0;
    seed.phi = 0.0;
  }
  const FitResult fit = fit_decay_oscillation(data, seed, options);

  std::optional<ThermoResult> thermo;
  if (wantThermo) {
    Calibration cal;
    cal.D0 = a.D0;
    cal.T0 = a.T0;
    cal.dDdT = a.dDdT;
    FieldConfig field;
    field.omegaMinus = a.carriers[0];
    field.omegaPlus = a.carriers[1];
    if (fit.converged)
      thermo = extract_temperature(fit, field, cal,
                                   a.detuningSign > 0 ? DetuningSign::positive : DetuningSign::negative);
    else
      err << "warning: fit did not converge, temperature not reported\n";
  }
  std::optional<double> eta;
  if (a.p0 && fit.params.TD > 0.0 && std::isfinite(fit.params.TD))
    eta = optimal_sensitivity(PhotonStats{*a.p0, *a.p1}, fit.params.TD, fit.params.n, a.dDdT).eta;

  const std::string report = fit_report_json(fit, thermo, eta).dump(2) + "\n";
  if (a.out.empty())
    out << report;
  else
    write_file(a.out, report);

  if (!a.plot.empty()) {
    PlotSeries dataSeries;
    dataSeries.label = "data";
    PlotSeries model;
    model.label = "fit";
    model.color = "#d62728";
    model.markers = false;
    for (const auto& p : trace.points) {
      dataSeries.x.push_back(p.tau * 1e6);
      dataSeries.y.push_back(p.meanCounts);
      dataSeries.yError.push_back(p.stdError);
    }
    const double t0 = trace.points.front().tau, t1 = trace.points.back().tau;
    for (int i = 0; i <= 600; ++i) {
      const double t = t0 + (t1 - t0) * i / 600.0;
      model.x.push_back(t * 1e6);
      model.y.push_back(decay_model(fit.params, t));
    }
    write_file(a.plot, render_svg({dataSeries, model}, "Decay-oscillation fit", "free evolution time (us)",
                                  "mean counts per shot"));
  }
  return kExitOk;
}

// --- sense ------------------------------------------------------------------

struct SenseArgs {
  std::string report;
  std::optional<double> tdUs;
  double n = 2.0;
  bool nGiven = false;
  double p0 = 0.029;
  double p1 = 0.020;
  double dDdT = Calibration{}.dDdT;
  std::optional<double> tUs;
};

int cmd_sense(const SenseArgs& a, std::ostream& out, std::ostream& err) {
  double TD = 0.0;
  double n = a.n;
  if (!a.report.empty()) {
    auto in = open_input(a.report, "fit report");
    json doc;
    try {
      doc = json::parse(in);
      TD = doc.at("params").at("TD").get<double>();
      if (!a.nGiven) n = doc.at("params").at("n").get<double>();
    } catch (const json::exception& e) {
      throw UsageError("fit report " + a.report + ": " + e.what());
    }
  } else if (a.tdUs) {
    TD = *a.tdUs * 1e-6;
  } else {
    throw UsageError("sense needs --report or --td-us");
  }

  const PhotonStats stats{a.p0, a.p1};
  double eta = 0.0;
  double t = 0.0;
  if (a.tUs) {
    t = *a.tUs * 1e-6;
    if (t > 3.0 * TD) err << "warning: t exceeds 3 TD, evaluating anyway\n";
    eta = sensitivity(stats, TD, n, a.dDdT, t);
  } else {
    const auto best = optimal_sensitivity(stats, TD, n, a.dDdT);
    eta = best.eta;
    t = best.t;
  }
  out << "eta = " << format("%.3f", eta * 1e3) << " mK/sqrt(Hz) at t = " << format("%.3f", t * 1e6) << " us"
      << (a.tUs ? "" : " (optimized)") << " [TD = " << format("%.3f", TD * 1e6) << " us, n = " << format("%.3f", n)
      << ", shot overhead excluded]\n";
  return kExitOk;
}

// --- profile ----------------------------------------------------------------

struct ProfileArgs {
  std::string readings;
  double Q = 1.0;
  double kappa = 2000.0;
  std::string out;
  std::string plot;
};

int cmd_profile(const ProfileArgs& a, std::ostream& out) {
  auto in = open_input(a.readings, "readings file");
  const auto readings = read_readings_csv(in);
  const ProfileFit fit = fit_log_profile(readings, a.Q, a.kappa);

  json doc = {{"c_K", fit.c},         {"c_err_K", fit.cError}, {"b_K", fit.b}, {"b_err_K", fit.bError},
              {"a", fit.a},           {"a_err", fit.aError},   {"R2", fit.rSquared},
              {"Q_W_per_m", fit.Q},   {"kappa_W_per_mK", fit.kappa}, {"points", fit.points}};
  const std::string report = doc.dump(2) + "\n";
  if (a.out.empty())
    out << report;
  else
    write_file(a.out, report);

  if (!a.plot.empty()) {
    PlotSeries data;
    data.label = "readings";
    PlotSeries line;
    line.label = "c ln r + b";
    line.color = "#d62728";
    line.markers = false;
    double lo = readings.front().r, hi = lo;
    for (const auto& p : readings) {
      data.x.push_back(std::log(p.r * 1e6));
      data.y.push_back(p.deltaT);
      data.yError.push_back(p.sigma);
      lo = std::min(lo, p.r);
      hi = std::max(hi, p.r);
    }
    for (int i = 0; i <= 100; ++i) {
      const double r = lo * std::pow(hi / lo, i / 100.0);
      line.x.push_back(std::log(r * 1e6));
      line.y.push_back(predict(fit, r));
    }
    write_file(a.plot, render_svg({data, line}, "Temperature rise vs distance", "ln(r / 1 um)", "deltaT (K)"));
  }
  return kExitOk;
}

// --- compile ----------------------------------------------------------------

struct CompileArgs {
  std::string file;
  std::string builtinName;
  int order = 1;
  double tauUs = 0.0;
  std::string out;
};

int cmd_compile(const CompileArgs& a, std::ostream& out) {
  if (a.file.empty() == a.builtinName.empty()) throw UsageError("compile needs exactly one of <file> or --builtin");
  ProgramAst ast;
  if (!a.file.empty()) {
    auto in = open_input(a.file, "sequence file");
    std::stringstream buf;
    buf << in.rdbuf();
    ast = parse_pseq(buf.str());
  } else {
    ast = builtin(sequence_kind_from_string(a.builtinName));
  }
  const CompiledProgram program = compile(ast, Bindings{a.tauUs * 1e-6, a.order});
  const std::string text = to_json(program) + "\n";
  if (a.out.empty())
    out << text;
  else
    write_file(a.out, text);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"NV-center pulse-sequence thermometry simulator and fitter", "nvlab"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo sweep from a JSON config");
  simulate->add_option("--config", sim.config, "Run configuration (JSON)")->required();
  simulate->add_option("--csv", sim.csv, "Override the trace CSV path");
  simulate->add_option("--json", sim.json, "Override the trace JSON path");
  simulate->add_option("--threads", sim.threads, "Worker threads (NVLAB_THREADS caps this)");

  FitArgs fitArgs;
  auto* fit = app.add_subcommand("fit", "Fit the decaying-oscillation model to a trace CSV");
  fit->add_option("trace", fitArgs.trace, "Trace CSV (tau_us,mean_counts,stderr,shots)")->required();
  fit->add_option("--out", fitArgs.out, "Write the report here instead of stdout");
  fit->add_option("--plot", fitArgs.plot, "Write an SVG with data and fitted curve");
  fit->add_flag("--decay-only", fitArgs.decayOnly, "Hold f = 0 and phi = 0 (echo/CPMG decays)");
  fit->add_option("--detuning-sign", fitArgs.detuningSign, "+1 if the carriers sit above the lines, -1 below");
  fit->add_option("--carriers", fitArgs.carriers, "Carrier frequencies omega-1 omega+1 in Hz")->expected(2);
  fit->add_option("--D0", fitArgs.D0, "Zero-field splitting at T0 (Hz)");
  fit->add_option("--T0", fitArgs.T0, "Reference temperature (K)");
  fit->add_option("--dDdT", fitArgs.dDdT, "dD/dT (Hz/K)");
  fit->add_option("--p0", fitArgs.p0, "Bright-state photons per shot (adds optimal eta)");
  fit->add_option("--p1", fitArgs.p1, "Dark-state photons per shot");

  SenseArgs senseArgs;
  auto* sense = app.add_subcommand("sense", "Thermal sensitivity from coherence parameters");
  sense->add_option("--report", senseArgs.report, "Fit report JSON providing TD and n");
  sense->add_option("--td-us", senseArgs.tdUs, "Coherence time TD (us)");
  auto* nOpt = sense->add_option("--n", senseArgs.n, "Stretch exponent (default 2)");
  sense->add_option("--p0", senseArgs.p0, "Bright-state photons per shot (default 0.029)");
  sense->add_option("--p1", senseArgs.p1, "Dark-state photons per shot (default 0.020)");
  sense->add_option("--dDdT", senseArgs.dDdT, "dD/dT (Hz/K, default -74.2e3)");
  sense->add_option("--t-us", senseArgs.tUs, "Evaluate at this free-evolution time instead of optimizing");

  ProfileArgs profileArgs;
  auto* profile = app.add_subcommand("profile", "Fit deltaT = c ln r + b to probe readings");
  profile->add_option("readings", profileArgs.readings, "Readings CSV (r_um,deltaT_K,sigma_K)")->required();
  profile->add_option("--Q", profileArgs.Q, "Heat per unit length (W/m, default 1)");
  profile->add_option("--kappa", profileArgs.kappa, "Thermal conductivity (W/(m K), default 2000)");
  profile->add_option("--out", profileArgs.out, "Write the report here instead of stdout");
  profile->add_option("--plot", profileArgs.plot, "Write an SVG of deltaT vs ln r");

  CompileArgs compileArgs;
  auto* compileCmd = app.add_subcommand("compile", "Dump the timed instruction list of a sequence as JSON");
  compileCmd->add_option("file", compileArgs.file, ".pseq source");
  compileCmd->add_option("--builtin", compileArgs.builtinName, "Builtin sequence name instead of a file");
  compileCmd->add_option("--N", compileArgs.order, "Sequence order N (default 1)");
  compileCmd->add_option("--tau-us", compileArgs.tauUs, "Total free-evolution time (us)")->required();
  compileCmd->add_option("--out", compileArgs.out, "Write JSON here instead of stdout");

  std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  senseArgs.nGiven = nOpt->count() > 0;

  try {
    if (*simulate) return cmd_simulate(sim, out);
    if (*fit) return cmd_fit(fitArgs, out, err);
    if (*sense) return cmd_sense(senseArgs, out, err);
    if (*profile) return cmd_profile(profileArgs, out);
    if (*compileCmd) return cmd_compile(compileArgs, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace nvlab::cli
