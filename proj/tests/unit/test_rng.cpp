#include <doctest.h>

#include <random>
#include <set>

#include "nvlab/rng.hpp"

using namespace nvlab;

TEST_CASE("counter rng is a pure function of key and counter") {
  CounterRng a(1, 2, Stream::ou), b(1, 2, Stream::ou);
  for (int i = 0; i < 100; ++i) CHECK(a() == b());
  CounterRng c(1, 2, Stream::pulse), d(1, 3, Stream::ou), e(2, 2, Stream::ou);
  CounterRng f(1, 2, Stream::ou);
  const auto first = f();
  CHECK(c() != first);
  CHECK(d() != first);
  CHECK(e() != first);
}

TEST_CASE("counter rng output is roughly uniform") {
  CounterRng rng(2024, 0, Stream::synthetic);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) sum += u(rng);
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.005));
}

TEST_CASE("neighbouring shot keys do not collide") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t shot = 0; shot < 10000; ++shot) seen.insert(CounterRng(1, shot, Stream::ou)());
  CHECK(seen.size() == 10000);
}
