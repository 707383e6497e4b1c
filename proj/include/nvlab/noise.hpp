#pragma once

// Classical dephasing surrogate for the hyperfine and bath terms: every
// shot sees delta(t) = static offset + Ornstein-Uhlenbeck process, entering
// the |m> phase as m * delta(t). Pulse imperfections are modelled as
// per-pulse multiplicative angle errors.

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "nvlab/pulse_program.hpp"
#include "nvlab/rng.hpp"

namespace nvlab {

struct NoiseModel {
  double staticSigma = 0.0;    // Hz
  double ouSigma = 0.0;        // Hz, stationary std
  double ouTauC = 30e-6;       // s
  double pulseAmpSigma = 0.0;  // fractional
  std::uint64_t seed = 1;

  bool magnetic() const { return staticSigma > 0.0 || ouSigma > 0.0; }
  void validate() const;
};

struct NoiseTrajectory {
  std::vector<double> delayPhase;  // integral of delta over each delay, Hz*s
  std::vector<double> pulseScale;  // rotation-angle multiplier per pulse
};

// Exact discrete-time update of an OU process together with its time
// integral over one step of length dt.
class OuStep {
 public:
  OuStep() = default;
  OuStep(double sigma, double tauC, double dt);

  // Advances `value` and returns the integral of the process over the step.
  template <class Rng>
  double advance(double& value, Rng& rng, std::normal_distribution<double>& normal) const {
    const double previous = value;
    value = decay_ * previous + valueSd_ * normal(rng);
    return drift_ * previous + regression_ * (value - decay_ * previous) + integralSd_ * normal(rng);
  }

  double decay() const { return decay_; }

 private:
  double decay_ = 1.0;
  double valueSd_ = 0.0;
  double drift_ = 0.0;
  double regression_ = 0.0;
  double integralSd_ = 0.0;
};

// Per-program precomputation of the OU step schedule. Every delay is split
// into equal steps no longer than tauC / 20.
class NoisePlan {
 public:
  NoisePlan(const CompiledProgram& program, const NoiseModel& model);

  std::size_t delay_count() const { return delays_.size(); }
  std::size_t pulse_count() const { return pulses_; }

  // Fills `out` for the given shot. Deterministic in (model.seed, shotIndex).
  void sample(std::uint64_t shotIndex, NoiseTrajectory& out) const;

 private:
  struct Delay {
    double duration = 0.0;
    int steps = 0;
    OuStep step;
  };

  NoiseModel model_;
  std::vector<Delay> delays_;
  std::size_t pulses_ = 0;
};

NoiseTrajectory sample_trajectory(const CompiledProgram& program, const NoiseModel& model,
                                  std::uint64_t shotIndex);

// Gaussian static-dephasing std whose free-induction envelope
// exp(-(2 pi sigma t)^2 / 2) reaches 1/e at targetT2star.
double calibrate_static_sigma(double targetT2star);

// Variance (rad^2) of the phase 2 pi * integral s(t) delta(t) dt accumulated by
// a coherence that is inverted at `inversionTimes` within [0, tau], for OU
// noise of std sigma (Hz) and correlation time tauC. Exact double integral
// of the exponential kernel.
double ou_echo_phase_variance(std::span<const double> inversionTimes, double tau, double sigma,
                              double tauC);

// OU sigma for which a Hahn echo (one inversion at tau/2) decays to 1/e at T2.
double calibrate_ou_sigma_for_hahn(double targetT2, double tauC);

}  // namespace nvlab
