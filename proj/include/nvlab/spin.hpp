#pragma once

// Spin-1 ground-state propagation in the doubly-rotating frame of the two
// microwave drives. |0> is the phase reference; all frequencies are stored in
// cycles (Hz) and 2*pi only appears inside the propagators.

#include <array>
#include <complex>
#include <string_view>

namespace nvlab {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Spin projection m_s.
enum class Level : int { plus = +1, zero = 0, minus = -1 };

// Two-level subspace addressed by a pulse. `symmetric` couples |0> to the
// bright zero-field state (|+1> + |-1>)/sqrt(2).
enum class Transition { minus, plus, symmetric };

std::string_view to_string(Transition transition);

class SpinState {
 public:
  // |0>
  SpinState() = default;
  SpinState(Complex plus, Complex zero, Complex minus);

  static SpinState basis(Level level);

  Complex amplitude(Level level) const { return amps_[index(level)]; }
  Complex& amplitude(Level level) { return amps_[index(level)]; }

  double norm_squared() const;

 private:
  static constexpr std::size_t index(Level level) {
    return static_cast<std::size_t>(1 - static_cast<int>(level));
  }

  std::array<Complex, 3> amps_{Complex{0.0}, Complex{1.0}, Complex{0.0}};
};

// Linear D(T) model valid inside validRange.
struct Calibration {
  double D0 = 2.87e9;           // Hz at T0
  double T0 = 300.0;            // K
  double dDdT = -74.2e3;        // Hz/K
  double gammaE = 2.799249e6;   // Hz/G, g = 2.00
  double Tmin = 280.0;          // K
  double Tmax = 330.0;          // K

  double zero_field_splitting(double temperature) const { return D0 + dDdT * (temperature - T0); }
  bool in_range(double temperature) const { return temperature >= Tmin && temperature <= Tmax; }

  // Throws UsageError when the invariants (dDdT < 0, D0 > 0, Tmin < Tmax) fail.
  void validate() const;
};

struct FieldConfig {
  double Bz = 0.0;          // G
  double omegaMinus = 0.0;  // carrier for |0> <-> |-1>, Hz
  double omegaPlus = 0.0;   // carrier for |0> <-> |+1>, Hz

  void validate() const;
};

// Transition frequency f(0 -> m) = D + m * gammaE * Bz.
double transition_frequency(const Calibration& cal, double temperature, double Bz, Level m);

// Carriers placed at the given detunings from the two transitions at
// `temperature`: omega_m = f(0 -> m) + detuning_m.
FieldConfig carriers_for_detuning(const Calibration& cal, double temperature, double Bz,
                                  double detuningMinus, double detuningPlus);

struct PulseSpec {
  Transition transition = Transition::minus;
  double angle = kPi;      // rad, in (0, 2*pi]
  double axisPhase = 0.0;  // rad; 0 = X, pi/2 = Y

  bool operator==(const PulseSpec&) const = default;
};

// Phase accumulation rates of |+1> and |-1> relative to |0>, in Hz.
struct LevelRates {
  double plus = 0.0;
  double minus = 0.0;
};

// eps_m = D(T) + m * gammaE * Bz + m * delta - omega_m for m = +/-1.
LevelRates detuning_rates(const Calibration& cal, const FieldConfig& field, double temperature,
                          double delta = 0.0);

// Ideal instantaneous rotation by pulse.angle * angleScale about the in-plane
// axis at pulse.axisPhase. For the symmetric transition the nominal angle
// is doubled: a nominal pi/4 prepares an equal |0>,|B> superposition and a
// nominal pi swaps |+1> and |-1>.
SpinState apply_pulse(const SpinState& state, const PulseSpec& pulse, double angleScale = 1.0);

// a_m <- a_m * exp(-i 2 pi eps_m duration). Throws UsageError for
// negative durations.
SpinState free_evolve(const SpinState& state, double duration, const LevelRates& eps);

// a_m <- a_m * exp(-i 2 pi cycles_m). Used when the phase has already been
// integrated over a time-dependent detuning.
SpinState advance_phases(const SpinState& state, double cyclesPlus, double cyclesMinus);

double population(const SpinState& state, Level level);

}  // namespace nvlab
