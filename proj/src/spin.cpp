#include "nvlab/spin.hpp"

#include <cmath>

#include "nvlab/error.hpp"

namespace nvlab {

std::string_view to_string(Transition transition) {
  switch (transition) {
    case Transition::minus:
      return "m-1";
    case Transition::plus:
      return "m+1";
    case Transition::symmetric:
      return "sym";
  }
  return "?";
}

SpinState::SpinState(Complex plus, Complex zero, Complex minus) : amps_{plus, zero, minus} {}

SpinState SpinState::basis(Level level) {
  SpinState s(0.0, 0.0, 0.0);
  s.amplitude(level) = 1.0;
  return s;
}

double SpinState::norm_squared() const {
  return std::norm(amps_[0]) + std::norm(amps_[1]) + std::norm(amps_[2]);
}

void Calibration::validate() const {
  if (!(D0 > 0.0)) throw UsageError("calibration: D0 must be positive");
  if (!(dDdT < 0.0)) throw UsageError("calibration: dDdT must be negative");
  if (!(Tmin < Tmax)) throw UsageError("calibration: valid range must satisfy Tmin < Tmax");
  if (!(gammaE > 0.0)) throw UsageError("calibration: gammaE must be positive");
}

void FieldConfig::validate() const {
  if (!(Bz >= 0.0)) throw UsageError("field: Bz must be non-negative");
  if (!(omegaMinus > 0.0) || !(omegaPlus > 0.0))
    throw UsageError("field: drive carriers must be positive");
}

double transition_frequency(const Calibration& cal, double temperature, double Bz, Level m) {
  return cal.zero_field_splitting(temperature) + static_cast<int>(m) * cal.gammaE * Bz;
}

FieldConfig carriers_for_detuning(const Calibration& cal, double temperature, double Bz,
                                  double detuningMinus, double detuningPlus) {
  FieldConfig field;
  field.Bz = Bz;
  field.omegaMinus = transition_frequency(cal, temperature, Bz, Level::minus) + detuningMinus;
  field.omegaPlus = transition_frequency(cal, temperature, Bz, Level::plus) + detuningPlus;
  return field;
}

LevelRates detuning_rates(const Calibration& cal, const FieldConfig& field, double temperature,
                          double delta) {
  const double D = cal.zero_field_splitting(temperature);
  const double zeeman = cal.gammaE * field.Bz;
  // Subtract the carrier before adding the small terms to keep precision.
  return {(D - field.omegaPlus) + zeeman + delta, (D - field.omegaMinus) - zeeman - delta};
}

namespace {

// SU(2) rotation on the pair (upper, lower) with upper playing the role of |0>.
void rotate_pair(Complex& upper, Complex& lower, double angle, double axisPhase) {
  const double c = std::cos(0.5 * angle);
  const double s = std::sin(0.5 * angle);
  const Complex offDiagUpper = Complex(0.0, -s) * std::polar(1.0, -axisPhase);
  const Complex offDiagLower = Complex(0.0, -s) * std::polar(1.0, axisPhase);
  const Complex u = upper;
  const Complex l = lower;
  upper = c * u + offDiagUpper * l;
  lower = offDiagLower * u + c * l;
}

}  // namespace

SpinState apply_pulse(const SpinState& state, const PulseSpec& pulse, double angleScale) {
  SpinState out = state;
  const double angle = pulse.angle * angleScale;
  switch (pulse.transition) {
    case Transition::minus:
      rotate_pair(out.amplitude(Level::zero), out.amplitude(Level::minus), angle, pulse.axisPhase);
      break;
    case Transition::plus:
      rotate_pair(out.amplitude(Level::zero), out.amplitude(Level::plus), angle, pulse.axisPhase);
      break;
    case Transition::symmetric: {
      const double r = 1.0 / std::sqrt(2.0);
      const Complex p = out.amplitude(Level::plus);
      const Complex m = out.amplitude(Level::minus);
      Complex bright = r * (p + m);
      const Complex dark = r * (p - m);
      rotate_pair(out.amplitude(Level::zero), bright, 2.0 * angle, pulse.axisPhase);
      out.amplitude(Level::plus) = r * (bright + dark);
      out.amplitude(Level::minus) = r * (bright - dark);
      break;
    }
  }
  return out;
}

SpinState advance_phases(const SpinState& state, double cyclesPlus, double cyclesMinus) {
  SpinState out = state;
  // Reduce to [0, 1) cycles before scaling by 2 pi to keep the argument small.
  out.amplitude(Level::plus) *= std::polar(1.0, -kTwoPi * (cyclesPlus - std::floor(cyclesPlus)));
  out.amplitude(Level::minus) *=
      std::polar(1.0, -kTwoPi * (cyclesMinus - std::floor(cyclesMinus)));
  return out;
}

SpinState free_evolve(const SpinState& state, double duration, const LevelRates& eps) {
  if (duration < 0.0) throw UsageError("free_evolve: negative duration");
  return advance_phases(state, eps.plus * duration, eps.minus * duration);
}

double population(const SpinState& state, Level level) { return std::norm(state.amplitude(level)); }

}  // namespace nvlab
