#include "nvlab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include "nvlab/error.hpp"

namespace nvlab {

void PhotonStats::validate() const {
  if (!(p1 > 0.0) || !(p0 > p1)) throw UsageError("photon stats: require p0 > p1 > 0");
}

void SweepConfig::validate() const {
  if (taus.empty()) throw UsageError("sweep: empty tau grid");
  for (std::size_t i = 0; i < taus.size(); ++i) {
    if (!(taus[i] >= 0.0)) throw UsageError("sweep: tau values must be non-negative");
    if (i > 0 && !(taus[i] > taus[i - 1])) throw UsageError("sweep: tau grid must be strictly increasing");
  }
  if (shots < 1) throw UsageError("sweep: shots must be at least 1");
  if (order < 1) throw UsageError("sweep: order N must be at least 1");
  physics.calibration.validate();
  physics.field.validate();
  noise.validate();
  photons.validate();
}

double run_shot(const CompiledProgram& program, const Physics& physics,
                const NoiseTrajectory& trajectory) {
  const LevelRates eps =
      detuning_rates(physics.calibration, physics.field, physics.temperature, 0.0);
  SpinState state;
  std::size_t pulse = 0;
  std::size_t delay = 0;
  for (const auto& ins : program.instructions) {
    if (ins.is_pulse()) {
      const double scale = pulse < trajectory.pulseScale.size() ? trajectory.pulseScale[pulse] : 1.0;
      state = apply_pulse(state, ins.pulse, scale);
      ++pulse;
    } else {
      const double noise = delay < trajectory.delayPhase.size() ? trajectory.delayPhase[delay] : 0.0;
      state = advance_phases(state, eps.plus * ins.duration + noise, eps.minus * ins.duration - noise);
      ++delay;
    }
  }
  return std::clamp(population(state, Level::zero), 0.0, 1.0);
}

PhotonSample sample_photons(double P0, const PhotonStats& stats, std::uint64_t shots,
                            CounterRng& rng) {
  if (!(P0 >= 0.0 && P0 <= 1.0)) throw UsageError("sample_photons: P0 outside [0, 1]");
  if (shots == 0) return {};
  std::poisson_distribution<std::uint64_t> poisson(stats.p1 + (stats.p0 - stats.p1) * P0);
  std::uint64_t sum = 0;
  std::uint64_t sumSq = 0;
  for (std::uint64_t i = 0; i < shots; ++i) {
    const std::uint64_t c = poisson(rng);
    sum += c;
    sumSq += c * c;
  }
  const double n = static_cast<double>(shots);
  PhotonSample out;
  out.mean = static_cast<double>(sum) / n;
  if (shots > 1) {
    const long double var = (static_cast<long double>(sumSq) * n - static_cast<long double>(sum) * sum) /
                            (static_cast<long double>(n) * (n - 1));
    out.stdError = std::sqrt(std::max(0.0, static_cast<double>(var)) / n);
  }
  return out;
}

unsigned resolve_threads(unsigned requested) {
  unsigned threads = requested > 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* cap = std::getenv("NVLAB_THREADS")) {
    const long value = std::strtol(cap, nullptr, 10);
    if (value >= 1) threads = std::min<unsigned>(threads, static_cast<unsigned>(value));
  }
  return std::max(1u, threads);
}

namespace {

constexpr std::uint64_t kBlockShots = 2048;

struct BlockSums {
  std::uint64_t counts = 0;
  std::uint64_t countsSq = 0;
  double population = 0.0;
  double populationSq = 0.0;
};

struct PointPlan {
  CompiledProgram program;
  NoisePlan noise;
};

}  // namespace

Trace run_sweep(const SweepConfig& config, const ProgramAst& program) {
  config.validate();

  std::vector<PointPlan> plans;
  plans.reserve(config.taus.size());
  for (double tau : config.taus) {
    try {
      CompiledProgram compiled = compile(program, Bindings{tau, config.order});
      NoisePlan noise(compiled, config.noise);
      plans.push_back(PointPlan{std::move(compiled), std::move(noise)});
    } catch (const CompileError& e) {
      std::ostringstream msg;
      msg << "tau = " << tau << " s: " << e.what();
      throw CompileError(msg.str());
    }
  }

  const auto shots = static_cast<std::uint64_t>(config.shots);
  const std::uint64_t blocksPerPoint = (shots + kBlockShots - 1) / kBlockShots;
  const std::uint64_t totalBlocks = blocksPerPoint * plans.size();
  std::vector<BlockSums> sums(totalBlocks);
  const PhotonStats& photons = config.photons;

  auto work = [&](std::uint64_t block) {
    const std::uint64_t point = block / blocksPerPoint;
    const std::uint64_t first = (block % blocksPerPoint) * kBlockShots;
    const std::uint64_t last = std::min(shots, first + kBlockShots);
    const PointPlan& plan = plans[point];
    NoiseTrajectory trajectory;
    BlockSums acc;
    for (std::uint64_t k = first; k < last; ++k) {
      const std::uint64_t shot = point * shots + k;
      plan.noise.sample(shot, trajectory);
      const double P0 = run_shot(plan.program, config.physics, trajectory);
      CounterRng rng(config.noise.seed, shot, Stream::photons);
      std::poisson_distribution<std::uint64_t> poisson(photons.p1 + (photons.p0 - photons.p1) * P0);
      const std::uint64_t c = poisson(rng);
      acc.counts += c;
      acc.countsSq += c * c;
      acc.population += P0;
      acc.populationSq += P0 * P0;
    }
    sums[block] = acc;
  };

  const unsigned threads =
      static_cast<unsigned>(std::min<std::uint64_t>(resolve_threads(config.threads), totalBlocks));
  if (threads <= 1) {
    for (std::uint64_t b = 0; b < totalBlocks; ++b) work(b);
  } else {
    std::atomic<std::uint64_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::uint64_t b = next++; b < totalBlocks; b = next++) work(b);
      });
    }
  }

  Trace trace;
  trace.seed = config.noise.seed;
  const double n = static_cast<double>(shots);
  for (std::size_t i = 0; i < plans.size(); ++i) {
    BlockSums total;
    for (std::uint64_t b = 0; b < blocksPerPoint; ++b) {
      const BlockSums& s = sums[i * blocksPerPoint + b];
      total.counts += s.counts;
      total.countsSq += s.countsSq;
      total.population += s.population;
      total.populationSq += s.populationSq;
    }
    TracePoint p;
    p.tau = config.taus[i];
    p.shots = shots;
    p.meanCounts = static_cast<double>(total.counts) / n;
    p.meanPopulation = total.population / n;
    if (shots > 1) {
      const long double varCounts =
          (static_cast<long double>(total.countsSq) * n -
           static_cast<long double>(total.counts) * total.counts) /
          (static_cast<long double>(n) * (n - 1));
      p.stdError = std::sqrt(std::max(0.0, static_cast<double>(varCounts)) / n);
      const double varPop = (total.populationSq - n * p.meanPopulation * p.meanPopulation) / (n - 1);
      p.populationStderr = std::sqrt(std::max(0.0, varPop) / n);
    }
    trace.points.push_back(p);
  }
  return trace;
}

double mean_population(const ProgramAst& program, const SweepConfig& config, double tau,
                       std::uint64_t firstShot, int shots) {
  const CompiledProgram compiled = compile(program, Bindings{tau, config.order});
  const NoisePlan plan(compiled, config.noise);
  NoiseTrajectory trajectory;
  double sum = 0.0;
  for (int k = 0; k < shots; ++k) {
    plan.sample(firstShot + static_cast<std::uint64_t>(k), trajectory);
    sum += run_shot(compiled, config.physics, trajectory);
  }
  return sum / shots;
}

}  // namespace nvlab
