#include <benchmark/benchmark.h>

#include <random>

#include "cavsim/analysis.hpp"
#include "cavsim/dynamics.hpp"
#include "cavsim/lightshift.hpp"
#include "cavsim/units.hpp"

using namespace cavsim;

namespace {

RunConfig bench_config() {
  RunConfig c;
  c.trap_tone = {1560e-9, 36.0, 157e-6, Vec3::UnitY(), +1, 0.0};
  c.comp_tone = {1527e-9, 5.2, 155e-6, Vec3::UnitX(), -1, 0.0};
  c.trap_schedule = PowerSchedule::constant(36.0);
  c.comp_schedule = PowerSchedule::constant(5.2);
  return c;
}

std::vector<Atom> bench_ensemble(std::size_t n) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> gp(0.0, 100e-6);
  std::normal_distribution<double> gv(0.0, 0.05);
  std::vector<Atom> atoms(n);
  for (std::size_t i = 0; i < n; ++i) {
    atoms[i].position = Vec3(gp(rng), gp(rng), gp(rng));
    atoms[i].velocity = Vec3(gv(rng), gv(rng), gv(rng));
    atoms[i].dark = i % 2 == 0;
    atoms[i].rng_id = i + 1;
    atoms[i].rng.seed(derive_stream_seed(1, i + 1));
  }
  return atoms;
}

void BM_Force(benchmark::State& state) {
  const AtomicData& rb = AtomicData::rb87();
  Engine engine(rb, bench_config());
  const auto atoms = bench_ensemble(64);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(engine.force(atoms[i++ % atoms.size()]));
  }
}
BENCHMARK(BM_Force);

void BM_Step(benchmark::State& state) {
  const AtomicData& rb = AtomicData::rb87();
  RunConfig cfg = bench_config();
  cfg.loss_rate = 0.0;
  cfg.threads = int(state.range(1));
  Engine engine(rb, cfg);
  auto atoms = bench_ensemble(std::size_t(state.range(0)));
  for (auto _ : state) {
    engine.step(atoms, 1e-5);
    if (atoms.empty()) state.SkipWithError("ensemble emptied");
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Step)->Args({256, 1})->Args({1024, 1})->Args({1024, 4})->Args({4096, 8});

void BM_LevelShift(benchmark::State& state) {
  const AtomicData& rb = AtomicData::rb87();
  const std::vector<ToneField> tones = {bench_config().trap_tone,
                                        bench_config().comp_tone};
  const Vec3 p(30e-6, -20e-6, 1e-3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(differential_shift_Hz(rb, tones, p));
  }
}
BENCHMARK(BM_LevelShift);

void BM_LorentzianFit(benchmark::State& state) {
  ShiftSpectrum s;
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 0.01);
  for (int i = 0; i < 400; ++i) {
    const double x = -60e6 + 120e6 * i / 399.0;
    const double u = 2.0 * (x + 5e6) / 12e6;
    s.detuning_Hz.push_back(x);
    s.weight.push_back(1.0 / (1.0 + u * u) + g(rng));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_lorentzian(s));
  }
}
BENCHMARK(BM_LorentzianFit);

}  // namespace

BENCHMARK_MAIN();
