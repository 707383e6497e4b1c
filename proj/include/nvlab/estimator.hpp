#pragma once

// Decaying-oscillation fit
//
//   I(t) = a * exp(-(t / TD)^n) * cos(2 pi f t + phi) + b
//
// and the thermometry quantities derived from it.

#include <array>
#include <optional>
#include <vector>

#include <json.hpp>

#include "nvlab/experiment.hpp"
#include "nvlab/spin.hpp"

namespace nvlab {

struct Dataset {
  std::vector<double> t;      // s
  std::vector<double> y;
  std::vector<double> sigma;  // <= 0 everywhere means unweighted

  std::size_t size() const { return t.size(); }
};

Dataset counts_dataset(const Trace& trace);
Dataset population_dataset(const Trace& trace);

enum class Param : std::size_t { a = 0, n, phi, b, TD, f };
inline constexpr std::size_t kParamCount = 6;

struct DecayParams {
  double a = 0.0;
  double n = 2.0;
  double phi = 0.0;  // rad
  double b = 0.0;
  double TD = 1.0;   // s
  double f = 0.0;    // Hz

  std::array<double, kParamCount> to_array() const { return {a, n, phi, b, TD, f}; }
  static DecayParams from_array(const std::array<double, kParamCount>& v) {
    return {v[0], v[1], v[2], v[3], v[4], v[5]};
  }
};

double decay_model(const DecayParams& p, double t);

struct InitialGuess {
  DecayParams params;
  bool degenerate = false;  // constant trace, amplitude seed is zero
};

// Needs at least 8 points; throws UsageError otherwise.
InitialGuess initial_guess(const Dataset& data);
InitialGuess initial_guess(const Trace& trace);

struct FitOptions {
  std::array<bool, kParamCount> fixed{};
  int maxIterations = 200;
  double tolerance = 1e-8;
  // Scan the linear parameters over a frequency window around the seed
  // before the Gauss-Newton iterations.
  bool refineFrequency = true;

  FitOptions& fix(Param p) {
    fixed[static_cast<std::size_t>(p)] = true;
    return *this;
  }
  bool is_fixed(Param p) const { return fixed[static_cast<std::size_t>(p)]; }

  // Non-oscillating decay: f = 0 and phi = 0 held fixed.
  static FitOptions pure_decay();
  // Undamped cosine: TD held at +inf and n fixed.
  static FitOptions pure_oscillation();
};

enum class FitStatus { converged, max_iterations, singular, degenerate };

struct FitResult {
  DecayParams params;
  std::array<double, kParamCount> stdErrors{};
  std::array<std::array<double, kParamCount>, kParamCount> covariance{};
  FitStatus status = FitStatus::degenerate;
  bool converged = false;
  double residualNorm = 0.0;  // sqrt of the weighted chi^2
  double chi2 = 0.0;
  int dof = 0;
  int iterations = 0;

  double error(Param p) const { return stdErrors[static_cast<std::size_t>(p)]; }
};

const char* to_string(FitStatus status);

// Weighted (1/sigma^2) damped Gauss-Newton fit with a central-difference
// Jacobian. Never throws on numerical trouble: a singular normal matrix or a
// degenerate trace is reported through status/converged.
FitResult fit_decay_oscillation(const Dataset& data, const DecayParams& seed,
                                const FitOptions& options = {});
FitResult fit_decay_oscillation(const Trace& trace, const DecayParams& seed,
                                const FitOptions& options = {});

enum class DetuningSign : int { positive = +1, negative = -1 };

struct ThermoResult {
  double D = 0.0;            // Hz
  double temperature = 0.0;  // K
  double deltaT = 0.0;       // K relative to the calibration reference T0
  double precision = 0.0;    // K
  DetuningSign sign = DetuningSign::positive;
  bool inRange = true;
};

// D = (omega_-1 + omega_+1)/2 - sign * f. The sign of the mean detuning is
// not observable from the trace, so the caller has to supply it. Throws
// NumericError when the fit did not converge.
ThermoResult extract_temperature(const FitResult& fit, const FieldConfig& field,
                                 const Calibration& cal, DetuningSign sign);

// Thermal sensitivity in K/sqrt(Hz) at free-evolution time t. Throws
// UsageError unless p0 > p1, TD > 0 and t > 0.
double sensitivity(const PhotonStats& stats, double TD, double n, double dDdT, double t);

struct OptimalSensitivity {
  double eta = 0.0;  // K/sqrt(Hz)
  double t = 0.0;    // s
};

// Golden-section minimum of sensitivity() over t in (0, 3 TD].
OptimalSensitivity optimal_sensitivity(const PhotonStats& stats, double TD, double n, double dDdT);

// {params, stderrs, covariance, converged, status, ...} plus the optional
// thermometry and sensitivity entries.
nlohmann::json fit_report_json(const FitResult& fit, const std::optional<ThermoResult>& thermo,
                               const std::optional<double>& eta);

}  // namespace nvlab
