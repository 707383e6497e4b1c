#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "nvlab/error.hpp"
#include "nvlab/experiment.hpp"

using namespace nvlab;

namespace {

Physics physics_for(double detuningMinus, double detuningPlus, double Bz = 30.0) {
  Physics ph;
  ph.field = carriers_for_detuning(ph.calibration, ph.temperature, Bz, detuningMinus, detuningPlus);
  return ph;
}

NoiseTrajectory static_offset(const CompiledProgram& program, double delta) {
  NoiseTrajectory t = sample_trajectory(program, NoiseModel{}, 0);
  std::size_t k = 0;
  for (const auto& ins : program.instructions)
    if (!ins.is_pulse()) t.delayPhase[k++] = delta * ins.duration;
  return t;
}

SweepConfig noise_free_sweep(double detuning, int points, double stop) {
  SweepConfig config;
  config.physics = physics_for(detuning, detuning);
  config.shots = 4;
  config.threads = 1;
  for (int i = 0; i < points; ++i) config.taus.push_back(stop * i / (points - 1));
  return config;
}

}  // namespace

TEST_CASE("t_ramsey on resonance ends dark") {
  const CompiledProgram c = compile(builtin(SequenceKind::t_ramsey), {3e-6, 1});
  CHECK(run_shot(c, physics_for(0.0, 0.0), sample_trajectory(c, {}, 0)) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("tcpmg(3) at 100 kHz average detuning and 5 us is dark") {
  const CompiledProgram c = compile(builtin(SequenceKind::tcpmg, 3), {5e-6, 3});
  CHECK(std::abs(run_shot(c, physics_for(100e3, 100e3), sample_trajectory(c, {}, 0))) < 1e-9);
}

TEST_CASE("static magnetic offset cancels in tcpmg") {
  for (int N : {1, 2, 3, 8}) {
    const CompiledProgram c = compile(builtin(SequenceKind::tcpmg, N), {7.3e-6, N});
    const Physics ph = physics_for(20e3, -20e3);
    const double clean = run_shot(c, ph, static_offset(c, 0.0));
    CHECK(std::abs(run_shot(c, ph, static_offset(c, 50e3)) - clean) < 1e-10);
  }
}

TEST_CASE("frequency law for the thermal sequences") {
  // Signal depends only on the average detuning of the two drives.
  const double avg = 137e3;
  for (double split : {0.0, 40e3, -250e3, 900e3}) {
    const Physics ph = physics_for(avg + split, avg - split, 12.0);
    for (double tau : {1.1e-6, 3.7e-6, 9.2e-6}) {
      const double phase = std::cos(kTwoPi * avg * tau);
      for (auto kind : {SequenceKind::t_ramsey, SequenceKind::te_field}) {
        const CompiledProgram c = compile(builtin(kind), {tau, 1});
        CHECK(run_shot(c, ph, sample_trajectory(c, {}, 0)) == doctest::Approx(0.5 * (1.0 - phase)).epsilon(1e-9));
      }
      for (int N : {1, 2, 4, 8}) {
        const CompiledProgram c = compile(builtin(SequenceKind::tcpmg, N), {tau, N});
        CHECK(run_shot(c, ph, sample_trajectory(c, {}, 0)) == doctest::Approx(0.5 * (1.0 + phase)).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("cpmg and hahn refocus a static offset") {
  for (auto [kind, N] : {std::pair{SequenceKind::hahn, 1}, {SequenceKind::cpmg, 4}}) {
    const CompiledProgram c = compile(builtin(kind, N), {6e-6, N});
    CHECK(run_shot(c, physics_for(0.0, 0.0), static_offset(c, 80e3)) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("photon sampling") {
  const PhotonStats stats;
  SUBCASE("bright and dark means") {
    CounterRng rng(1, 0, Stream::photons);
    const PhotonSample bright = sample_photons(1.0, stats, 1000000, rng);
    CHECK(std::abs(bright.mean - 0.029) < 4.0 * bright.stdError);
    const PhotonSample dark = sample_photons(0.0, stats, 1000000, rng);
    CHECK(std::abs(dark.mean - 0.020) < 4.0 * dark.stdError);
  }
  SUBCASE("per-shot variance equals the mean") {
    CounterRng rng(2, 0, Stream::photons);
    const PhotonStats hot{2.0, 1.0};
    const PhotonSample s = sample_photons(0.5, hot, 1000000, rng);
    const double var = s.stdError * s.stdError * 1000000.0;
    CHECK(var / s.mean == doctest::Approx(1.0).epsilon(0.05));
  }
  SUBCASE("invalid stats") {
    CHECK_THROWS_AS((PhotonStats{0.01, 0.02}.validate()), UsageError);
  }
}

TEST_CASE("noise-free sweeps") {
  SUBCASE("zero detuning is flat at the bright level") {
    SweepConfig config = noise_free_sweep(0.0, 20, 40e-6);
    config.order = 3;
    const Trace trace = run_sweep(config, builtin(SequenceKind::tcpmg));
    for (const auto& p : trace.points) CHECK(p.meanPopulation == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("159 kHz average detuning gives a 159 kHz cosine") {
    SweepConfig config = noise_free_sweep(159e3, 41, 40e-6);
    config.order = 3;
    const Trace trace = run_sweep(config, builtin(SequenceKind::tcpmg));
    REQUIRE(trace.points.size() == 41);
    for (const auto& p : trace.points)
      CHECK(p.meanPopulation == doctest::Approx(0.5 * (1.0 + std::cos(kTwoPi * 159e3 * p.tau))).epsilon(1e-9));
  }
}

TEST_CASE("sweeps are reproducible across thread counts") {
  SweepConfig config = noise_free_sweep(80e3, 9, 20e-6);
  config.shots = 5000;
  config.order = 2;
  config.noise.ouSigma = 90e3;
  config.noise.staticSigma = 5e3;
  config.noise.pulseAmpSigma = 0.01;
  config.noise.seed = 31;
  const Trace one = run_sweep(config, builtin(SequenceKind::tcpmg));
  config.threads = 4;
  const Trace four = run_sweep(config, builtin(SequenceKind::tcpmg));
  REQUIRE(one.points.size() == four.points.size());
  for (std::size_t i = 0; i < one.points.size(); ++i) {
    CHECK(one.points[i].meanCounts == four.points[i].meanCounts);
    CHECK(one.points[i].stdError == four.points[i].stdError);
    CHECK(one.points[i].meanPopulation == four.points[i].meanPopulation);
  }
  config.noise.seed = 32;
  CHECK(run_sweep(config, builtin(SequenceKind::tcpmg)).points[4].meanCounts != one.points[4].meanCounts);
}

TEST_CASE("compile failures name the offending tau") {
  SweepConfig config = noise_free_sweep(0.0, 3, 2e-6);
  CHECK_THROWS_WITH_AS(run_sweep(config, parse_pseq("wait 1us")), doctest::Contains("tau ="), CompileError);
}

TEST_CASE("sweep validation") {
  SweepConfig config = noise_free_sweep(0.0, 3, 2e-6);
  config.taus = {1e-6, 1e-6};
  CHECK_THROWS_AS(config.validate(), UsageError);
  config = noise_free_sweep(0.0, 3, 2e-6);
  config.shots = 0;
  CHECK_THROWS_AS(config.validate(), UsageError);
}

TEST_CASE("NVLAB_THREADS caps the worker count") {
  ::setenv("NVLAB_THREADS", "2", 1);
  CHECK(resolve_threads(16) == 2);
  CHECK(resolve_threads(1) == 1);
  ::unsetenv("NVLAB_THREADS");
  CHECK(resolve_threads(3) == 3);
}
