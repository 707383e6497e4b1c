#pragma once

// Steady-state temperature rise around a line heater,
//   deltaT(r) = c * ln(r) + b,   c = a * Q / kappa,
// fitted by weighted linear least squares in x = ln r.

#include <iosfwd>
#include <vector>

namespace nvlab {

struct ProbeReading {
  double r = 0.0;       // m
  double deltaT = 0.0;  // K
  double sigma = 1.0;   // K
};

struct ProfileFit {
  double c = 0.0;  // K
  double b = 0.0;  // K, value at r = 1 m
  double a = 0.0;  // c * kappa / Q
  double cError = 0.0;
  double bError = 0.0;
  double aError = 0.0;
  double covCB = 0.0;
  double rSquared = 0.0;  // weighted
  double Q = 1.0;         // W/m
  double kappa = 2000.0;  // W/(m K)
  std::size_t points = 0;
};

// Throws UsageError for fewer than two readings or non-positive r, sigma,
// Q or kappa, and NumericError when all radii coincide.
ProfileFit fit_log_profile(const std::vector<ProbeReading>& readings, double Q, double kappa);

// Throws UsageError for r <= 0.
double predict(const ProfileFit& fit, double r);

// CSV with header r_um,deltaT_K,sigma_K. Throws UsageError when malformed
// or empty.
std::vector<ProbeReading> read_readings_csv(std::istream& is);

}  // namespace nvlab
