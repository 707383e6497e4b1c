#include "nvlab/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "nvlab/error.hpp"

namespace nvlab {

Dataset counts_dataset(const Trace& trace) {
  Dataset d;
  for (const auto& p : trace.points) {
    d.t.push_back(p.tau);
    d.y.push_back(p.meanCounts);
    d.sigma.push_back(p.stdError);
  }
  return d;
}

Dataset population_dataset(const Trace& trace) {
  Dataset d;
  for (const auto& p : trace.points) {
    d.t.push_back(p.tau);
    d.y.push_back(p.meanPopulation);
    d.sigma.push_back(p.populationStderr);
  }
  return d;
}

double decay_model(const DecayParams& p, double t) {
  const double envelope = std::exp(-std::pow(t / p.TD, p.n));
  return p.a * envelope * std::cos(kTwoPi * p.f * t + p.phi) + p.b;
}

const char* to_string(FitStatus status) {
  switch (status) {
    case FitStatus::converged:
      return "converged";
    case FitStatus::max_iterations:
      return "max_iterations";
    case FitStatus::singular:
      return "singular";
    case FitStatus::degenerate:
      return "degenerate";
  }
  return "?";
}

FitOptions FitOptions::pure_decay() {
  FitOptions o;
  o.fix(Param::f).fix(Param::phi);
  o.refineFrequency = false;
  return o;
}

FitOptions FitOptions::pure_oscillation() {
  FitOptions o;
  o.fix(Param::TD).fix(Param::n);
  return o;
}

namespace {

double wrap_phase(double phi) {
  phi = std::remainder(phi, kTwoPi);
  return phi <= -kPi ? phi + kTwoPi : phi;
}

void validate_dataset(const Dataset& data, std::size_t minPoints) {
  if (data.y.size() != data.t.size() || data.sigma.size() != data.t.size())
    throw UsageError("dataset: t, y and sigma lengths differ");
  if (data.size() < minPoints)
    throw UsageError("dataset: at least " + std::to_string(minPoints) + " points required");
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data.t[i]) || !std::isfinite(data.y[i]))
      throw UsageError("dataset: non-finite value");
    if (i > 0 && !(data.t[i] > data.t[i - 1])) throw UsageError("dataset: times must increase");
  }
}

std::vector<double> weights_of(const Dataset& data) {
  const bool weighted = std::all_of(data.sigma.begin(), data.sigma.end(), [](double s) { return s > 0.0; });
  std::vector<double> w(data.size(), 1.0);
  if (weighted)
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = 1.0 / (data.sigma[i] * data.sigma[i]);
  return w;
}

}  // namespace

InitialGuess initial_guess(const Dataset& data) {
  validate_dataset(data, 8);
  const std::size_t m = data.size();
  const double span = data.t.back() - data.t.front();
  const double dt = span / static_cast<double>(m - 1);

  // Resample onto a uniform grid when the input is not one.
  std::vector<double> y(m);
  bool uniform = true;
  for (std::size_t i = 0; i < m; ++i)
    if (std::fabs(data.t[i] - (data.t.front() + dt * i)) > 1e-6 * dt) uniform = false;
  if (uniform) {
    y = data.y;
  } else {
    std::size_t j = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const double t = data.t.front() + dt * i;
      while (j + 2 < m && data.t[j + 1] < t) ++j;
      const double w = (t - data.t[j]) / (data.t[j + 1] - data.t[j]);
      y[i] = data.y[j] + std::clamp(w, 0.0, 1.0) * (data.y[j + 1] - data.y[j]);
    }
  }

  InitialGuess guess;
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / m;
  double ss = 0.0;
  for (double v : y) ss += (v - mean) * (v - mean);
  const double rms = std::sqrt(ss / m);
  guess.params.b = mean;
  guess.params.TD = 0.5 * span;
  guess.params.n = 2.0;
  if (!(rms > 1e-12 * std::max(std::fabs(mean), std::numeric_limits<double>::min()))) {
    guess.degenerate = true;
    guess.params.a = 0.0;
    guess.params.f = 0.0;
    return guess;
  }
  guess.params.a = std::sqrt(2.0) * rms;

  // Zero-padded DFT (4x) over the non-DC half spectrum.
  constexpr int kPad = 4;
  const double binWidth = 1.0 / (static_cast<double>(m) * dt);
  double bestMag = -1.0;
  std::complex<double> bestValue;
  double bestF = 0.0;
  for (std::size_t k = 1; k <= kPad * m / 2; ++k) {
    const double f = static_cast<double>(k) * binWidth / kPad;
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const double t = data.t.front() + dt * i;
      acc += (y[i] - mean) * std::polar(1.0, -kTwoPi * f * t);
    }
    if (std::abs(acc) > bestMag) {
      bestMag = std::abs(acc);
      bestValue = acc;
      bestF = f;
    }
  }
  guess.params.f = bestF;
  guess.params.phi = std::arg(bestValue);
  return guess;
}

InitialGuess initial_guess(const Trace& trace) { return initial_guess(counts_dataset(trace)); }

namespace {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using ParamArray = std::array<double, kParamCount>;

class Problem {
 public:
  Problem(const Dataset& data, const FitOptions& options) : data_(data), options_(options) {
    w_ = weights_of(data);
    sqrtW_.resize(w_.size());
    for (std::size_t i = 0; i < w_.size(); ++i) sqrtW_[i] = std::sqrt(w_[i]);
    for (std::size_t k = 0; k < kParamCount; ++k)
      if (!options.fixed[k]) free_.push_back(k);
    const double span = std::max(data.t.back() - data.t.front(), data.t.back());
    double yScale = 0.0;
    for (double v : data.y) yScale = std::max(yScale, std::fabs(v));
    yScale = std::max(yScale, std::numeric_limits<double>::min());
    typical_ = {yScale, 1.0, 1.0, yScale, span, 1.0 / span};
  }

  const std::vector<std::size_t>& free() const { return free_; }
  std::size_t points() const { return data_.size(); }
  double typical(std::size_t k) const { return typical_[k]; }

  Vector residuals(const ParamArray& p) const {
    const DecayParams params = DecayParams::from_array(p);
    Vector r(static_cast<Eigen::Index>(data_.size()));
    for (std::size_t i = 0; i < data_.size(); ++i)
      r[static_cast<Eigen::Index>(i)] = sqrtW_[i] * (data_.y[i] - decay_model(params, data_.t[i]));
    return r;
  }

  // Jacobian of the weighted model (= -d residual / d p) for free params.
  Matrix jacobian(const ParamArray& p) const {
    Matrix J(static_cast<Eigen::Index>(data_.size()), static_cast<Eigen::Index>(free_.size()));
    for (std::size_t c = 0; c < free_.size(); ++c) {
      const std::size_t k = free_[c];
      const double h = 1e-6 * std::max(std::fabs(p[k]), typical_[k]);
      ParamArray up = p, down = p;
      up[k] += h;
      down[k] -= h;
      const DecayParams pu = DecayParams::from_array(up);
      const DecayParams pd = DecayParams::from_array(down);
      for (std::size_t i = 0; i < data_.size(); ++i)
        J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
            sqrtW_[i] * (decay_model(pu, data_.t[i]) - decay_model(pd, data_.t[i])) / (2.0 * h);
    }
    return J;
  }

  // Keeps parameters inside their domain; sign flips of a and f are folded
  // into phi when phi is free.
  void project(ParamArray& p) const {
    auto idx = [](Param q) { return static_cast<std::size_t>(q); };
    const bool phiFree = !options_.is_fixed(Param::phi);
    if (p[idx(Param::f)] < 0.0) {
      if (phiFree) {
        p[idx(Param::f)] = -p[idx(Param::f)];
        p[idx(Param::phi)] = -p[idx(Param::phi)];
      } else {
        p[idx(Param::f)] = 0.0;
      }
    }
    if (p[idx(Param::a)] < 0.0 && phiFree) {
      p[idx(Param::a)] = -p[idx(Param::a)];
      p[idx(Param::phi)] += kPi;
    }
    if (phiFree) p[idx(Param::phi)] = wrap_phase(p[idx(Param::phi)]);
    if (!options_.is_fixed(Param::n)) p[idx(Param::n)] = std::clamp(p[idx(Param::n)], 0.5, 4.0);
    if (!options_.is_fixed(Param::TD))
      p[idx(Param::TD)] = std::max(p[idx(Param::TD)], 1e-6 * typical_[idx(Param::TD)]);
  }

  // Best frequency on a grid around the seed with the linear parameters
  // (a cos phi, a sin phi, b) solved exactly at each candidate.
  void refine_frequency(ParamArray& p) const {
    auto idx = [](Param q) { return static_cast<std::size_t>(q); };
    const double span = typical_[idx(Param::TD)];
    const double f0 = p[idx(Param::f)];
    const double halfWidth = std::max(0.3 * f0, 1.0 / span);
    const double step = 0.1 / span;
    const double lo = std::max(0.0, f0 - halfWidth);
    const int count = static_cast<int>(std::ceil((f0 + halfWidth - lo) / step));
    const bool bFree = !options_.is_fixed(Param::b);

    double bestChi2 = std::numeric_limits<double>::infinity();
    ParamArray best = p;
    for (int s = 0; s <= count; ++s) {
      const double f = lo + s * step;
      Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
      Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
      for (std::size_t i = 0; i < data_.size(); ++i) {
        const double t = data_.t[i];
        const double env = std::exp(-std::pow(t / p[idx(Param::TD)], p[idx(Param::n)]));
        const Eigen::Vector3d basis(env * std::cos(kTwoPi * f * t), -env * std::sin(kTwoPi * f * t),
                                    bFree ? 1.0 : 0.0);
        const double target = data_.y[i] - (bFree ? 0.0 : p[idx(Param::b)]);
        A += w_[i] * basis * basis.transpose();
        rhs += w_[i] * target * basis;
      }
      if (!bFree) A(2, 2) = 1.0;
      const Eigen::Vector3d c = A.ldlt().solve(rhs);
      if (!c.allFinite()) continue;
      ParamArray trial = p;
      trial[idx(Param::f)] = f;
      trial[idx(Param::a)] = std::hypot(c[0], c[1]);
      trial[idx(Param::phi)] = std::atan2(c[1], c[0]);
      if (bFree) trial[idx(Param::b)] = c[2];
      const double chi2 = residuals(trial).squaredNorm();
      if (chi2 < bestChi2) {
        bestChi2 = chi2;
        best = trial;
      }
    }
    if (std::isfinite(bestChi2)) p = best;
  }

 private:
  const Dataset& data_;
  const FitOptions& options_;
  std::vector<double> w_;
  std::vector<double> sqrtW_;
  std::vector<std::size_t> free_;
  ParamArray typical_{};
};

}  // namespace

FitResult fit_decay_oscillation(const Dataset& data, const DecayParams& seed, const FitOptions& options) {
  validate_dataset(data, 8);
  for (double v : seed.to_array())
    if (std::isnan(v)) throw UsageError("fit: seed contains NaN");

  FitResult result;
  result.params = seed;

  const double first = data.y.front();
  const bool constant =
      std::all_of(data.y.begin(), data.y.end(), [&](double v) { return v == first; });
  if (constant) {
    result.params.a = 0.0;
    result.params.b = first;
    result.status = FitStatus::degenerate;
    return result;
  }

  Problem problem(data, options);
  const auto& free = problem.free();
  const auto nFree = static_cast<Eigen::Index>(free.size());
  result.dof = static_cast<int>(data.size()) - static_cast<int>(free.size());
  if (free.empty() || result.dof < 0) throw UsageError("fit: not enough points for the free parameters");

  ParamArray p = seed.to_array();
  problem.project(p);
  if (options.refineFrequency && !options.is_fixed(Param::f) && !options.is_fixed(Param::a) &&
      !options.is_fixed(Param::phi))
    problem.refine_frequency(p);

  Vector r = problem.residuals(p);
  double chi2 = r.squaredNorm();
  double lambda = 1e-3;
  bool converged = false;
  int iteration = 0;
  for (; iteration < options.maxIterations && !converged; ++iteration) {
    const Matrix J = problem.jacobian(p);
    const Matrix A = J.transpose() * J;
    const Vector g = J.transpose() * r;
    const double maxDiag = A.diagonal().maxCoeff();
    if (!(maxDiag > 0.0)) break;

    bool accepted = false;
    while (!accepted && lambda < 1e16) {
      Matrix damped = A;
      for (Eigen::Index k = 0; k < nFree; ++k)
        damped(k, k) += lambda * std::max(A(k, k), 1e-12 * maxDiag);
      const Vector step = damped.ldlt().solve(g);
      if (!step.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      ParamArray trial = p;
      double relChange = 0.0;
      for (Eigen::Index c = 0; c < nFree; ++c) {
        const std::size_t k = free[static_cast<std::size_t>(c)];
        trial[k] += step[c];
        relChange = std::max(relChange, std::fabs(step[c]) / std::max(std::fabs(p[k]), problem.typical(k)));
      }
      problem.project(trial);
      const Vector rTrial = problem.residuals(trial);
      const double chi2Trial = rTrial.squaredNorm();
      if (std::isfinite(chi2Trial) && chi2Trial <= chi2) {
        p = trial;
        r = rTrial;
        chi2 = chi2Trial;
        lambda = std::max(lambda * 0.3, 1e-12);
        accepted = true;
        if (relChange < options.tolerance) converged = true;
      } else {
        // A rejected step this small means chi^2 is flat to rounding.
        if (relChange < options.tolerance) {
          converged = true;
          break;
        }
        lambda *= 4.0;
      }
    }
    if (!accepted && !converged) break;
  }

  result.params = DecayParams::from_array(p);
  result.iterations = iteration;
  result.chi2 = chi2;
  result.residualNorm = std::sqrt(chi2);
  result.status = converged ? FitStatus::converged : FitStatus::max_iterations;

  // Covariance from the column-scaled normal matrix.
  const Matrix J = problem.jacobian(p);
  const Matrix A = J.transpose() * J;
  Vector scale(nFree);
  bool singular = false;
  for (Eigen::Index k = 0; k < nFree; ++k) {
    scale[k] = std::sqrt(A(k, k));
    if (!(scale[k] > 0.0) || !std::isfinite(scale[k])) singular = true;
  }
  if (!singular) {
    const Matrix S = scale.cwiseInverse().asDiagonal() * A * scale.cwiseInverse().asDiagonal();
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(S);
    const double minEig = eig.eigenvalues().minCoeff();
    const double maxEig = eig.eigenvalues().maxCoeff();
    if (!(minEig > 1e-14 * maxEig)) {
      singular = true;
    } else {
      const double s2 = result.dof > 0 ? chi2 / result.dof : 1.0;
      const Matrix cov = scale.cwiseInverse().asDiagonal() * S.inverse() *
                         scale.cwiseInverse().asDiagonal() * s2;
      for (Eigen::Index i = 0; i < nFree; ++i) {
        const std::size_t ki = free[static_cast<std::size_t>(i)];
        result.stdErrors[ki] = std::sqrt(std::max(cov(i, i), 0.0));
        for (Eigen::Index j = 0; j < nFree; ++j)
          result.covariance[ki][free[static_cast<std::size_t>(j)]] = cov(i, j);
      }
    }
  }
  if (singular) result.status = FitStatus::singular;
  result.converged = result.status == FitStatus::converged;
  return result;
}

FitResult fit_decay_oscillation(const Trace& trace, const DecayParams& seed, const FitOptions& options) {
  return fit_decay_oscillation(counts_dataset(trace), seed, options);
}

ThermoResult extract_temperature(const FitResult& fit, const FieldConfig& field,
                                 const Calibration& cal, DetuningSign sign) {
  if (!fit.converged) throw NumericError("extract_temperature: fit did not converge");
  cal.validate();
  ThermoResult out;
  out.sign = sign;
  const double carrierMean = 0.5 * (field.omegaMinus + field.omegaPlus);
  out.D = carrierMean - static_cast<int>(sign) * fit.params.f;
  out.temperature = cal.T0 + (out.D - cal.D0) / cal.dDdT;
  out.deltaT = out.temperature - cal.T0;
  out.precision = fit.error(Param::f) / std::fabs(cal.dDdT);
  out.inRange = cal.in_range(out.temperature);
  return out;
}

double sensitivity(const PhotonStats& stats, double TD, double n, double dDdT, double t) {
  if (!(stats.p0 > stats.p1)) throw UsageError("sensitivity: require p0 > p1");
  if (!(TD > 0.0) || !(t > 0.0)) throw UsageError("sensitivity: TD and t must be positive");
  if (!(dDdT != 0.0)) throw UsageError("sensitivity: dDdT must be non-zero");
  const double contrast = stats.p0 - stats.p1;
  const double shotFactor = std::sqrt(2.0 * (stats.p0 + stats.p1) / (contrast * contrast));
  return shotFactor / (kTwoPi * std::fabs(dDdT) * std::exp(-std::pow(t / TD, n)) * std::sqrt(t));
}

OptimalSensitivity optimal_sensitivity(const PhotonStats& stats, double TD, double n, double dDdT) {
  // Validates the inputs.
  sensitivity(stats, TD, n, dDdT, TD);
  const double invPhi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.0;
  double hi = 3.0 * TD;
  auto eta = [&](double t) { return t > 0.0 ? sensitivity(stats, TD, n, dDdT, t) : std::numeric_limits<double>::infinity(); };
  double x1 = hi - invPhi * (hi - lo);
  double x2 = lo + invPhi * (hi - lo);
  double f1 = eta(x1);
  double f2 = eta(x2);
  while (hi - lo > 1e-6 * (lo + hi)) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invPhi * (hi - lo);
      f1 = eta(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invPhi * (hi - lo);
      f2 = eta(x2);
    }
  }
  const double t = 0.5 * (lo + hi);
  return {eta(t), t};
}

nlohmann::json fit_report_json(const FitResult& fit, const std::optional<ThermoResult>& thermo,
                               const std::optional<double>& eta) {
  static constexpr const char* kNames[kParamCount] = {"a", "n", "phi", "b", "TD", "f"};
  nlohmann::json doc;
  const auto values = fit.params.to_array();
  for (std::size_t k = 0; k < kParamCount; ++k) {
    doc["params"][kNames[k]] = std::isfinite(values[k]) ? nlohmann::json(values[k]) : nlohmann::json(nullptr);
    doc["stderrs"][kNames[k]] = fit.stdErrors[k];
  }
  doc["covariance"] = fit.covariance;
  doc["converged"] = fit.converged;
  doc["status"] = to_string(fit.status);
  doc["chi2"] = fit.chi2;
  doc["dof"] = fit.dof;
  doc["iterations"] = fit.iterations;
  doc["units"] = {{"TD", "s"}, {"f", "Hz"}, {"phi", "rad"}};
  if (thermo) {
    doc["D_Hz"] = thermo->D;
    doc["T_K"] = thermo->temperature;
    doc["deltaT_K"] = thermo->deltaT;
    doc["precision_K"] = thermo->precision;
    doc["detuning_sign"] = static_cast<int>(thermo->sign);
    doc["in_range"] = thermo->inRange;
  }
  if (eta) doc["eta_K_per_sqrtHz"] = *eta;
  return doc;
}

}  // namespace nvlab
