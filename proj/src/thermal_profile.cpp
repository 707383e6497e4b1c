#include "nvlab/thermal_profile.hpp"

#include <cmath>
#include <istream>
#include <sstream>
#include <string>

#include "nvlab/error.hpp"

namespace nvlab {

ProfileFit fit_log_profile(const std::vector<ProbeReading>& readings, double Q, double kappa) {
  if (!(Q > 0.0) || !(kappa > 0.0)) throw UsageError("profile: Q and kappa must be positive");
  if (readings.size() < 2) throw UsageError("profile: at least two readings required");

  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (const auto& p : readings) {
    if (!(p.r > 0.0)) throw UsageError("profile: distances must be positive");
    if (!(p.sigma > 0.0)) throw UsageError("profile: uncertainties must be positive");
    const double w = 1.0 / (p.sigma * p.sigma);
    sw += w;
    sx += w * std::log(p.r);
    sy += w * p.deltaT;
  }
  const double xMean = sx / sw;
  const double yMean = sy / sw;

  // Centred sums keep the normal equations well conditioned.
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& p : readings) {
    const double w = 1.0 / (p.sigma * p.sigma);
    const double dx = std::log(p.r) - xMean;
    const double dy = p.deltaT - yMean;
    sxx += w * dx * dx;
    sxy += w * dx * dy;
    syy += w * dy * dy;
  }
  if (!(sxx > 0.0))
    throw NumericError("profile: singular design, all distances are equal");

  ProfileFit fit;
  fit.Q = Q;
  fit.kappa = kappa;
  fit.points = readings.size();
  fit.c = sxy / sxx;
  fit.b = yMean - fit.c * xMean;
  fit.cError = std::sqrt(1.0 / sxx);
  fit.bError = std::sqrt(1.0 / sw + xMean * xMean / sxx);
  fit.covCB = -xMean / sxx;
  fit.a = fit.c * kappa / Q;
  fit.aError = fit.cError * kappa / Q;

  double ssRes = 0.0;
  for (const auto& p : readings) {
    const double w = 1.0 / (p.sigma * p.sigma);
    const double resid = p.deltaT - (fit.c * std::log(p.r) + fit.b);
    ssRes += w * resid * resid;
  }
  fit.rSquared = syy > 0.0 ? 1.0 - ssRes / syy : 1.0;
  return fit;
}

double predict(const ProfileFit& fit, double r) {
  if (!(r > 0.0)) throw UsageError("profile: prediction radius must be positive");
  return fit.c * std::log(r) + fit.b;
}

std::vector<ProbeReading> read_readings_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw UsageError("readings: empty file");
  if (line.rfind("r_um,deltaT_K,sigma_K", 0) != 0)
    throw UsageError("readings: expected header 'r_um,deltaT_K,sigma_K'");
  std::vector<ProbeReading> out;
  std::size_t lineNo = 1;
  while (std::getline(is, line)) {
    ++lineNo;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream row(line);
    std::string f[3];
    for (auto& field : f)
      if (!std::getline(row, field, ',')) throw UsageError("readings: line " + std::to_string(lineNo) + " malformed");
    try {
      out.push_back({std::stod(f[0]) * 1e-6, std::stod(f[1]), std::stod(f[2])});
    } catch (const std::exception&) {
      throw UsageError("readings: line " + std::to_string(lineNo) + " is not numeric");
    }
  }
  if (out.empty()) throw UsageError("readings: no data rows");
  return out;
}

}  // namespace nvlab
