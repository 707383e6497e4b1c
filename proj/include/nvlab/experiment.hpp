#pragma once

// Monte Carlo experiment runner: compiled program x noise trajectories x
// photon shot noise -> fluorescence trace.

#include <cstdint>
#include <vector>

#include "nvlab/noise.hpp"
#include "nvlab/pulse_program.hpp"
#include "nvlab/rng.hpp"
#include "nvlab/spin.hpp"

namespace nvlab {

// Mean photons per shot for |0> (bright) and |+-1> (dark).
struct PhotonStats {
  double p0 = 0.029;
  double p1 = 0.020;

  void validate() const;
};

struct Physics {
  Calibration calibration;
  FieldConfig field;
  double temperature = 300.0;  // K
};

struct SweepConfig {
  std::vector<double> taus;  // s, strictly increasing
  int shots = 1;
  int order = 1;  // binds N in the program
  Physics physics;
  NoiseModel noise;
  PhotonStats photons;
  unsigned threads = 0;  // 0: hardware concurrency; NVLAB_THREADS caps either way
  // Initialisation + readout dead time per shot, used only for wall-clock
  // estimates. 2e5 shots at 45 us come to about 9 s per point.
  double shotOverhead = 45e-6;

  void validate() const;
};

struct TracePoint {
  double tau = 0.0;  // s
  double meanCounts = 0.0;
  double stdError = 0.0;
  std::uint64_t shots = 0;
  // |0> population before photon sampling.
  double meanPopulation = 0.0;
  double populationStderr = 0.0;
};

struct Trace {
  std::vector<TracePoint> points;
  std::uint64_t seed = 0;
};

// Runs one shot from |0>: pulses are scaled by the trajectory's angle
// multipliers, delays accumulate eps_m * d + m * integral(delta).
// Returns the final |0> population.
double run_shot(const CompiledProgram& program, const Physics& physics,
                const NoiseTrajectory& trajectory);

struct PhotonSample {
  double mean = 0.0;
  double stdError = 0.0;
};

// Poisson counts with mean p1 + (p0 - p1) * P0 for each of `shots` shots.
PhotonSample sample_photons(double P0, const PhotonStats& stats, std::uint64_t shots,
                            CounterRng& rng);

// Thread count after applying the NVLAB_THREADS cap.
unsigned resolve_threads(unsigned requested);

// Compiles `program` at every tau and runs config.shots shots per point.
// Shot k of point i uses noise/photon streams keyed by (seed, i * shots + k),
// and partial sums are combined in a fixed order, so the result is
// bit-identical for any thread count. Compile failures are rethrown as
// CompileError naming the offending tau.
Trace run_sweep(const SweepConfig& config, const ProgramAst& program);

// Compiles `program` at tau and averages run_shot populations over
// `shots` noise realisations (no photon sampling).
double mean_population(const ProgramAst& program, const SweepConfig& config, double tau,
                       std::uint64_t firstShot, int shots);

}  // namespace nvlab
