// End-to-end acceptance checks. Prints one [PASS]/[FAIL] line per criterion.
// Usage: nvlab_acceptance [criterion ...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "cli.hpp"
#include "nvlab/estimator.hpp"
#include "nvlab/experiment.hpp"
#include "nvlab/noise.hpp"
#include "nvlab/thermal_profile.hpp"

using namespace nvlab;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> grid(double stop, int points) {
  std::vector<double> t;
  for (int i = 0; i < points; ++i) t.push_back(stop * i / (points - 1));
  return t;
}

// TCPMG-3 thermometry operating point: dry-objective photon rates,
// Hahn-calibrated OU bath, 66 points over 40 us.
SweepConfig thermometry_sweep(double detuning, double temperature, std::uint64_t seed, std::uint64_t shots) {
  SweepConfig c;
  c.physics.field = carriers_for_detuning(c.physics.calibration, c.physics.calibration.T0, 32.0, detuning, detuning);
  c.physics.temperature = temperature;
  c.noise.ouTauC = 30e-6;
  c.noise.ouSigma = calibrate_ou_sigma_for_hahn(10.5e-6, c.noise.ouTauC);
  c.noise.seed = seed;
  c.photons = {0.022, 0.017};
  c.taus = grid(40e-6, 66);
  c.shots = shots;
  c.order = 3;
  return c;
}

FitResult fit_counts(const Trace& trace) {
  const Dataset d = counts_dataset(trace);
  return fit_decay_oscillation(d, initial_guess(d).params);
}

double fit_decay_time(const Trace& trace) {
  const Dataset d = population_dataset(trace);
  const double b = d.y.back();
  const FitResult fit = fit_decay_oscillation(d, {d.y.front() - b, 2.0, 0.0, b, 0.3 * d.t.back(), 0.0},
                                              FitOptions::pure_decay());
  return fit.converged ? fit.params.TD : std::nan("");
}

// --- criteria ---------------------------------------------------------------

Verdict frequency_law() {
  const auto t0 = std::chrono::steady_clock::now();
  SweepConfig c;
  c.physics.field = carriers_for_detuning(c.physics.calibration, c.physics.calibration.T0, 32.0, 159.0e3, 159.0e3);
  c.taus = grid(40e-6, 161);
  c.shots = 1;
  c.order = 3;
  const Trace trace = run_sweep(c, builtin(SequenceKind::tcpmg));
  const Dataset d = population_dataset(trace);
  DecayParams seed = initial_guess(d).params;
  seed.TD = 1.0;
  seed.n = 2.0;
  const FitResult fit = fit_decay_oscillation(d, seed, FitOptions::pure_oscillation());
  const double rel = std::fabs(fit.params.f - 159.0e3) / 159.0e3;
  const double wall = seconds_since(t0);
  return {fit.converged && rel <= 1e-3 && wall < 10.0,
          "f = " + fmt("%.4f", fit.params.f / 1e3) + " kHz, rel err " + fmt("%.2e", rel) + " (tol 1e-3), " +
              fmt("%.2f", wall) + " s (limit 10 s)"};
}

Verdict detuning_sign() {
  const auto t0 = std::chrono::steady_clock::now();
  const double dT = 0.567;
  const double expected = dT * 74.2e3;
  const double detunings[] = {159.0e3, 120.0e3, -200.0e3};
  std::vector<double> shifts;
  std::string detail;
  std::uint64_t seed = 100;
  bool converged = true;
  for (double det : detunings) {
    const FitResult cold = fit_counts(run_sweep(thermometry_sweep(det, 300.0, seed++, 200000), builtin(SequenceKind::tcpmg)));
    const FitResult hot =
        fit_counts(run_sweep(thermometry_sweep(det, 300.0 + dT, seed++, 200000), builtin(SequenceKind::tcpmg)));
    converged = converged && cold.converged && hot.converged;
    const double df = std::fabs(hot.params.f - cold.params.f);
    const double err = std::hypot(hot.error(Param::f), cold.error(Param::f));
    shifts.push_back(df);
    detail += fmt("%+.0f kHz: ", det / 1e3) + fmt("df = %.2f", df / 1e3) + fmt(" +- %.2f kHz; ", err / 1e3);
  }
  const auto [lo, hi] = std::minmax_element(shifts.begin(), shifts.end());
  double worst = 0.0;
  for (double s : shifts) worst = std::max(worst, std::fabs(s - 42.1e3));
  const double wall = seconds_since(t0);
  detail += "spread " + fmt("%.2f", (*hi - *lo) / 1e3) + " kHz, max |df - 42.1| " + fmt("%.2f", worst / 1e3) +
            " kHz (tol 3), expected shift " + fmt("%.2f", expected / 1e3) + " kHz, " + fmt("%.0f", wall) +
            " s (limit 300 s)";
  return {converged && *hi - *lo <= 3e3 && worst <= 3e3 && wall < 300.0, detail};
}

Verdict sensitivity_magnitude() {
  bool pass = true;
  std::string detail;
  for (double n : {2.0, 2.5, 3.0}) {
    const auto best = optimal_sensitivity({0.029, 0.020}, 107.8e-6, n, -74.2e3);
    const double mk = best.eta * 1e3;
    pass = pass && mk >= 7.0 && mk <= 14.0;
    detail += fmt("n = %.1f: ", n) + fmt("eta = %.2f mK/sqrt(Hz)", mk) + fmt(" at t = %.1f us; ", best.t * 1e6);
  }
  const double atEnvelope = sensitivity({0.029, 0.020}, 107.8e-6, 2.0, -74.2e3, 107.8e-6 / 2) * 1e3;
  detail += fmt("n = 2 at t = TD/2: %.2f; window [7, 14]", atEnvelope);
  return {pass, detail};
}

Verdict temperature_precision() {
  const auto t0 = std::chrono::steady_clock::now();
  const Trace trace = run_sweep(thermometry_sweep(159.0e3, 300.0, 7, 200000), builtin(SequenceKind::tcpmg));
  const FitResult fit = fit_counts(trace);
  const double precision = fit.error(Param::f) / 74.2e3;
  const double wall = seconds_since(t0);
  return {fit.converged && precision >= 0.017 && precision <= 0.068 && wall < 600.0,
          "f = " + fmt("%.2f", fit.params.f / 1e3) + fmt(" +- %.3f kHz", fit.error(Param::f) / 1e3) +
              fmt(", TD = %.1f", fit.params.TD * 1e6) + fmt(" +- %.1f us", fit.error(Param::TD) * 1e6) +
              ", precision " + fmt("%.1f mK", precision * 1e3) + " (window [17, 68] mK), " + fmt("%.0f s", wall)};
}

Verdict decoupling_scaling() {
  NoiseModel noise;
  noise.ouTauC = 30e-6;
  noise.ouSigma = calibrate_ou_sigma_for_hahn(10.5e-6, noise.ouTauC);
  noise.seed = 55;
  auto sweep_for = [&](double span) {
    SweepConfig c;
    c.physics.field = carriers_for_detuning(c.physics.calibration, c.physics.calibration.T0, 32.0, 0.0, 0.0);
    c.noise = noise;
    c.taus = grid(span, 40);
    c.shots = 4000;
    return c;
  };

  const double hahn = fit_decay_time(run_sweep(sweep_for(35e-6), builtin(SequenceKind::hahn)));
  std::vector<double> logN, logT;
  std::string detail = fmt("hahn T2 = %.2f us (10.5 +- 10%%); cpmg:", hahn * 1e6);
  bool monotone = true;
  double previous = 0.0;
  for (int N : {1, 2, 4, 8, 16}) {
    SweepConfig c = sweep_for(35e-6 * std::pow(N, 2.0 / 3.0));
    c.order = N;
    const double t2 = fit_decay_time(run_sweep(c, builtin(SequenceKind::cpmg)));
    monotone = monotone && t2 > previous;
    previous = t2;
    logN.push_back(std::log(N));
    logT.push_back(std::log(t2));
    detail += fmt(" %.1f", t2 * 1e6);
  }
  const double mx = std::accumulate(logN.begin(), logN.end(), 0.0) / logN.size();
  const double my = std::accumulate(logT.begin(), logT.end(), 0.0) / logT.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < logN.size(); ++i) {
    sxy += (logN[i] - mx) * (logT[i] - my);
    sxx += (logN[i] - mx) * (logN[i] - mx);
  }
  const double slope = sxy / sxx;
  detail += fmt(" us; slope %.3f (window [0.55, 0.85])", slope);
  const bool hahnOk = std::fabs(hahn / 10.5e-6 - 1.0) <= 0.10;
  return {hahnOk && monotone && slope >= 0.55 && slope <= 0.85, detail + (monotone ? ", monotone" : ", NOT monotone")};
}

Verdict tcpmg_cpmg_equivalence() {
  NoiseModel noise;
  noise.ouTauC = 30e-6;
  noise.ouSigma = calibrate_ou_sigma_for_hahn(10.5e-6, noise.ouTauC);
  noise.seed = 77;
  bool pass = true;
  std::string detail;
  for (int N : {1, 2, 4}) {
    SweepConfig c;
    c.physics.field = carriers_for_detuning(c.physics.calibration, c.physics.calibration.T0, 32.0, 0.0, 0.0);
    c.noise = noise;
    c.taus = grid(40e-6 * std::pow(2.0 * N, 2.0 / 3.0), 30);
    c.shots = 4000;
    SweepConfig t = c, p = c;
    t.order = N;
    p.order = 2 * N;

    const Trace tr = run_sweep(t, builtin(SequenceKind::tcpmg));
    const Trace cp = run_sweep(p, builtin(SequenceKind::cpmg));
    double worst = 0.0;
    for (std::size_t i = 0; i < tr.points.size(); ++i) {
      const double se = std::hypot(tr.points[i].populationStderr, cp.points[i].populationStderr);
      const double diff = std::fabs(tr.points[i].meanPopulation - cp.points[i].meanPopulation);
      worst = std::max(worst, se > 0.0 ? diff / se : (diff > 0.0 ? INFINITY : 0.0));
    }

    t.noise.pulseAmpSigma = p.noise.pulseAmpSigma = 0.01;
    const double t2t = fit_decay_time(run_sweep(t, builtin(SequenceKind::tcpmg)));
    const double t2c = fit_decay_time(run_sweep(p, builtin(SequenceKind::cpmg)));
    pass = pass && worst <= 2.0 && t2t <= t2c;
    detail += "N = " + std::to_string(N) + fmt(": max |diff|/se %.2f", worst) +
              fmt(", noisy pulses T2 %.2f", t2t * 1e6) + fmt(" vs %.2f us; ", t2c * 1e6);
  }
  return {pass, detail + "tol 2 se, T2(tcpmg) <= T2(cpmg)"};
}

Verdict echo_cancellation() {
  double worst = 0.0;
  for (double sigma : {1e3, 10e3, 50e3, 100e3}) {
    for (int N : {1, 2, 3, 8}) {
      SweepConfig c;
      c.physics.field = carriers_for_detuning(c.physics.calibration, c.physics.calibration.T0, 32.0, 35e3, -35e3);
      c.noise.staticSigma = sigma;
      c.noise.seed = 9;
      c.taus = grid(60e-6, 31);
      c.shots = 2000;
      c.order = N;
      const Trace trace = run_sweep(c, builtin(SequenceKind::tcpmg));
      for (const auto& p : trace.points)
        worst = std::max(worst, std::fabs(p.meanPopulation - trace.points.front().meanPopulation));
    }
  }
  return {worst <= 1e-10, fmt("max population deviation %.2e (tol 1e-10) over sigma <= 100 kHz, N in {1,2,3,8}", worst)};
}

Verdict estimator_oracle() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> normal;
  const double shots = 2e5;
  int covered = 0, exact = 0;
  double worstRel = 0.0;
  const int trials = 200;
  for (int k = 0; k < trials; ++k) {
    DecayParams truth;
    truth.a = 0.002 + 0.003 * u(rng);
    truth.b = 0.018 + 0.006 * u(rng);
    truth.n = 1.0 + 2.0 * u(rng);
    truth.TD = 20e-6 + 40e-6 * u(rng);
    truth.f = 80e3 + 170e3 * u(rng);
    truth.phi = kPi * (2.0 * u(rng) - 1.0);

    Dataset clean, noisy;
    for (int i = 0; i < 66; ++i) {
      const double t = 40e-6 * i / 65.0;
      const double y = decay_model(truth, t);
      const double sigma = std::sqrt(y / shots);
      clean.t.push_back(t);
      clean.y.push_back(y);
      clean.sigma.push_back(0.0);
      noisy.t.push_back(t);
      noisy.y.push_back(y + sigma * normal(rng));
      noisy.sigma.push_back(sigma);
    }
    const FitResult fc = fit_decay_oscillation(clean, initial_guess(clean).params);
    const auto got = fc.params.to_array(), want = truth.to_array();
    double rel = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i)
      rel = std::max(rel, i == static_cast<std::size_t>(Param::phi)
                              ? std::fabs(std::remainder(got[i] - want[i], kTwoPi)) / kPi
                              : std::fabs(got[i] / want[i] - 1.0));
    worstRel = std::max(worstRel, rel);
    if (fc.converged && rel <= 1e-6) ++exact;

    const FitResult fn = fit_decay_oscillation(noisy, initial_guess(noisy).params);
    if (fn.converged && std::fabs(fn.params.f - truth.f) <= 3.0 * fn.error(Param::f)) ++covered;
  }
  const double coverage = static_cast<double>(covered) / trials;
  return {coverage >= 0.95 && exact == trials,
          fmt("f within 3 se in %.1f%% of noisy fits (need 95%%); ", coverage * 100) + std::to_string(exact) + "/" +
              std::to_string(trials) + fmt(" noise-free fits within 1e-6 (worst %.1e)", worstRel)};
}

Verdict heat_profile() {
  std::vector<ProbeReading> readings;
  for (int i = 0; i < 12; ++i) {
    const double r = 10e-6 * std::pow(100.0, i / 11.0);
    readings.push_back({r, -0.8 * std::log(r) - 5.0, 0.01});
  }
  const ProfileFit exact = fit_log_profile(readings, 1.0, 2000.0);
  const double exactErr = std::max(std::fabs(exact.c + 0.8), std::fabs(exact.b + 5.0));

  std::mt19937_64 rng(99);
  std::normal_distribution<double> normal;
  for (auto& p : readings) {
    p.sigma = 0.05 * p.deltaT;
    p.deltaT += p.sigma * normal(rng);
  }
  const ProfileFit noisy = fit_log_profile(readings, 1.0, 2000.0);
  const double pull = std::fabs(noisy.c + 0.8) / noisy.cError;
  return {exactErr <= 1e-10 && noisy.rSquared > 0.95 && pull <= 2.0,
          fmt("exact recovery error %.1e (tol 1e-10); ", exactErr) + fmt("5%% noise: R2 %.4f", noisy.rSquared) +
              fmt(", c = %.4f", noisy.c) + fmt(" +- %.4f K", noisy.cError) + fmt(" (%.2f se, tol 2)", pull)};
}

Verdict determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("nvlab_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const nlohmann::json config = {
      {"field", {{"Bz_G", 32.0}, {"detuning_minus_Hz", 159e3}, {"detuning_plus_Hz", 159e3}}},
      {"noise", {{"static_sigma_Hz", 5e3}, {"hahn_T2_us", 10.5}, {"pulse_amp_sigma", 0.01}}},
      {"sweep", {{"tau_start_us", 0.0}, {"tau_stop_us", 40.0}, {"points", 33}, {"shots", 20000}}},
      {"sequence", {{"builtin", "tcpmg"}, {"N", 3}}},
      {"seed", 12345}};
  std::ofstream(dir / "run.json") << config.dump(2);

  std::vector<std::string> files;
  bool ok = true;
  for (int threads : {1, 4, 16}) {
    const fs::path csv = dir / ("trace_" + std::to_string(threads) + ".csv");
    std::ostringstream out, err;
    ok = ok && cli::run({"nvlab", "simulate", "--config", (dir / "run.json").string(), "--csv", csv.string(),
                         "--threads", std::to_string(threads)},
                        out, err) == 0;
    std::ifstream in(csv, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    files.push_back(s.str());
  }
  fs::remove_all(dir);
  const bool same = ok && !files[0].empty() && files[0] == files[1] && files[0] == files[2];
  return {same, "trace files under 1, 4, 16 threads " + std::string(same ? "byte-identical" : "DIFFER") + " (" +
                    std::to_string(files[0].size()) + " bytes)"};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "frequency law", frequency_law},
      {2, "detuning-sign invariance", detuning_sign},
      {3, "sensitivity magnitude", sensitivity_magnitude},
      {4, "temperature precision", temperature_precision},
      {5, "decoupling scaling", decoupling_scaling},
      {6, "tcpmg/cpmg equivalence", tcpmg_cpmg_equivalence},
      {7, "echo cancellation", echo_cancellation},
      {8, "estimator oracle", estimator_oracle},
      {9, "heat-profile fit", heat_profile},
      {10, "determinism", determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failures;
    std::cout << (v.pass ? "[PASS] " : "[FAIL] ") << c.id << " " << c.name << ": " << v.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
