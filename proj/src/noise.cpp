#include "nvlab/noise.hpp"

#include <algorithm>
#include <cmath>

#include "nvlab/error.hpp"

namespace nvlab {

void NoiseModel::validate() const {
  if (!(staticSigma >= 0.0) || !(ouSigma >= 0.0) || !(pulseAmpSigma >= 0.0))
    throw UsageError("noise: sigmas must be non-negative");
  if (!(ouTauC > 0.0)) throw UsageError("noise: ouTauC must be positive");
}

OuStep::OuStep(double sigma, double tauC, double dt) {
  const double x = dt / tauC;
  decay_ = std::exp(-x);
  valueSd_ = sigma * std::sqrt(-std::expm1(-2.0 * x));
  drift_ = -tauC * std::expm1(-x);
  const double th = std::tanh(0.5 * x);
  regression_ = tauC * th;
  // Conditional variance of the integral given both endpoints, in units of
  // (sigma tauC)^2: 2x - 4 tanh(x/2). The series avoids cancellation.
  double g;
  if (x < 0.1) {
    const double x2 = x * x;
    g = x * x2 * (1.0 / 6.0 - x2 / 60.0 + 17.0 * x2 * x2 / 10080.0);
  } else {
    g = 2.0 * x - 4.0 * th;
  }
  integralSd_ = sigma * tauC * std::sqrt(std::max(g, 0.0));
}

NoisePlan::NoisePlan(const CompiledProgram& program, const NoiseModel& model) : model_(model) {
  model_.validate();
  const double maxStep = model.ouTauC / 20.0;
  for (const auto& ins : program.instructions) {
    if (ins.is_pulse()) {
      ++pulses_;
      continue;
    }
    Delay d;
    d.duration = ins.duration;
    if (model.ouSigma > 0.0 && ins.duration > 0.0) {
      d.steps = std::max(1, static_cast<int>(std::ceil(ins.duration / maxStep)));
      d.step = OuStep(model.ouSigma, model.ouTauC, ins.duration / d.steps);
    }
    delays_.push_back(d);
  }
}

void NoisePlan::sample(std::uint64_t shotIndex, NoiseTrajectory& out) const {
  out.delayPhase.assign(delays_.size(), 0.0);
  out.pulseScale.assign(pulses_, 1.0);
  std::normal_distribution<double> normal;

  if (model_.staticSigma > 0.0) {
    CounterRng rng(model_.seed, shotIndex, Stream::static_offset);
    const double offset = model_.staticSigma * normal(rng);
    for (std::size_t i = 0; i < delays_.size(); ++i) out.delayPhase[i] = offset * delays_[i].duration;
  }

  if (model_.ouSigma > 0.0) {
    CounterRng rng(model_.seed, shotIndex, Stream::ou);
    normal.reset();
    double value = model_.ouSigma * normal(rng);
    for (std::size_t i = 0; i < delays_.size(); ++i) {
      double integral = 0.0;
      for (int k = 0; k < delays_[i].steps; ++k) integral += delays_[i].step.advance(value, rng, normal);
      out.delayPhase[i] += integral;
    }
  }

  if (model_.pulseAmpSigma > 0.0) {
    CounterRng rng(model_.seed, shotIndex, Stream::pulse);
    normal.reset();
    for (auto& scale : out.pulseScale) scale = 1.0 + model_.pulseAmpSigma * normal(rng);
  }
}

NoiseTrajectory sample_trajectory(const CompiledProgram& program, const NoiseModel& model,
                                  std::uint64_t shotIndex) {
  NoiseTrajectory t;
  NoisePlan(program, model).sample(shotIndex, t);
  return t;
}

double calibrate_static_sigma(double targetT2star) {
  if (!(targetT2star > 0.0)) throw UsageError("calibrate_static_sigma: target must be positive");
  return std::sqrt(2.0) / (kTwoPi * targetT2star);
}

double ou_echo_phase_variance(std::span<const double> inversionTimes, double tau, double sigma,
                              double tauC) {
  if (!(tau >= 0.0) || !(tauC > 0.0)) throw UsageError("ou_echo_phase_variance: invalid times");
  std::vector<double> edges{0.0};
  for (double t : inversionTimes) {
    if (t < 0.0 || t > tau) throw UsageError("ou_echo_phase_variance: inversion outside [0, tau]");
    edges.push_back(t);
  }
  std::sort(edges.begin() + 1, edges.end());
  edges.push_back(tau);

  const std::size_t n = edges.size() - 1;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = (edges[i + 1] - edges[i]) / tauC;
    sum += 2.0 * tauC * tauC * (xi + std::expm1(-xi));
    const double wi = -std::expm1(-xi);
    double sign = -1.0;
    for (std::size_t j = i + 1; j < n; ++j, sign = -sign) {
      const double gap = (edges[j] - edges[i + 1]) / tauC;
      const double wj = -std::expm1(-(edges[j + 1] - edges[j]) / tauC);
      sum += 2.0 * sign * tauC * tauC * std::exp(-gap) * wi * wj;
    }
  }
  return kTwoPi * kTwoPi * sigma * sigma * sum;
}

double calibrate_ou_sigma_for_hahn(double targetT2, double tauC) {
  if (!(targetT2 > 0.0)) throw UsageError("calibrate_ou_sigma_for_hahn: target must be positive");
  const double mid = 0.5 * targetT2;
  const double unit = ou_echo_phase_variance(std::span<const double>(&mid, 1), targetT2, 1.0, tauC);
  return std::sqrt(2.0 / unit);
}

}  // namespace nvlab
