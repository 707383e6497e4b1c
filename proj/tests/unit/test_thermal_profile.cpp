#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "nvlab/error.hpp"
#include "nvlab/thermal_profile.hpp"

using namespace nvlab;

namespace {

std::vector<ProbeReading> generated(double c, double b, std::initializer_list<double> radiiUm, double sigma = 0.01) {
  std::vector<ProbeReading> out;
  for (double r : radiiUm) out.push_back({r * 1e-6, c * std::log(r * 1e-6) + b, sigma});
  return out;
}

}  // namespace

TEST_CASE("exact recovery from generated readings") {
  const ProfileFit fit = fit_log_profile(generated(-0.8, 5.0, {50, 76, 100, 200, 273}), 1.0, 2000.0);
  CHECK(std::abs(fit.c + 0.8) < 1e-10);
  CHECK(std::abs(fit.b - 5.0) < 1e-10);
  CHECK(fit.a == doctest::Approx(-1600.0).epsilon(1e-10));
  CHECK(fit.rSquared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.points == 5);
}

TEST_CASE("singular design and invalid inputs") {
  CHECK_THROWS_AS(fit_log_profile(generated(-0.8, 5.0, {100, 100}), 1.0, 2000.0), NumericError);
  CHECK_THROWS_AS(fit_log_profile(generated(-0.8, 5.0, {100}), 1.0, 2000.0), UsageError);
  CHECK_THROWS_AS(fit_log_profile(generated(-0.8, 5.0, {50, 100}), 0.0, 2000.0), UsageError);
  CHECK_THROWS_AS(fit_log_profile(generated(-0.8, 5.0, {50, 100}), 1.0, -1.0), UsageError);
  CHECK_THROWS_AS(fit_log_profile(generated(-0.8, 5.0, {50, 100}, 0.0), 1.0, 2000.0), UsageError);
}

TEST_CASE("predict") {
  const ProfileFit fit = fit_log_profile(generated(-0.8, 5.0, {50, 76, 100, 200, 273}), 1.0, 2000.0);
  CHECK(predict(fit, 76e-6) == doctest::Approx(-0.8 * std::log(76e-6) + 5.0).epsilon(1e-12));
  CHECK(predict(fit, 150e-6) == predict(fit, 150e-6));
  double prev = predict(fit, 1e-6);
  for (double r = 2e-6; r < 1e-3; r *= 1.5) {
    const double v = predict(fit, r);
    CHECK(v < prev);
    prev = v;
  }
  CHECK_THROWS_AS(predict(fit, 0.0), UsageError);
}

TEST_CASE("property: scaling r shifts b by c ln s") {
  const auto base = generated(-0.6, 2.0, {30, 60, 120, 240});
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 0.01);
  auto noisy = base;
  for (auto& p : noisy) p.deltaT += noise(rng);
  const ProfileFit f1 = fit_log_profile(noisy, 1.0, 2000.0);
  for (double s : {0.1, 2.0, 37.0}) {
    auto scaled = noisy;
    for (auto& p : scaled) p.r *= s;
    const ProfileFit f2 = fit_log_profile(scaled, 1.0, 2000.0);
    CHECK(f2.c == doctest::Approx(f1.c).epsilon(1e-10));
    CHECK(f2.b == doctest::Approx(f1.b - f1.c * std::log(s)).epsilon(1e-10));
  }
}

TEST_CASE("property: R^2 tends to one as noise vanishes") {
  std::mt19937_64 rng(4);
  double prev = 0.0;
  for (double level : {0.1, 0.01, 0.001, 1e-5}) {
    auto readings = generated(-0.8, 5.0, {50, 76, 100, 200, 273, 400}, level);
    std::normal_distribution<double> noise(0.0, level);
    for (auto& p : readings) p.deltaT += noise(rng);
    const double r2 = fit_log_profile(readings, 1.0, 2000.0).rSquared;
    CHECK(r2 >= prev - 1e-3);
    prev = r2;
  }
  CHECK(prev > 0.999999);
}

TEST_CASE("readings csv") {
  std::istringstream good("r_um,deltaT_K,sigma_K\n50,1.0,0.1\n100,0.5,0.1\n");
  const auto readings = read_readings_csv(good);
  REQUIRE(readings.size() == 2);
  CHECK(readings[0].r == doctest::Approx(50e-6));
  std::istringstream empty("");
  CHECK_THROWS_AS(read_readings_csv(empty), UsageError);
  std::istringstream bad("r,dT,s\n1,2,3\n");
  CHECK_THROWS_AS(read_readings_csv(bad), UsageError);
}
