#include <doctest.h>

#include <random>

#include "cavsim/lightshift.hpp"
#include "cavsim/units.hpp"

using namespace cavsim;

namespace {
ToneField trap_36W() { return {1560e-9, 36.0, 157e-6, Vec3::UnitY(), +1, 0.0}; }
ToneField comp_tone(double p) {
  return {1527e-9, p, 155e-6, Vec3::UnitX(), -1, 0.0};
}
const Vec3 kFocus = Vec3::Zero();
}  // namespace

TEST_CASE("focal scalar shifts") {
  const AtomicData& rb = AtomicData::rb87();
  const std::vector<ToneField> solo = {trap_36W()};
  const auto g = level_shift(rb, LevelId(Level::S5_1_2), solo, kFocus);
  CHECK(g.scalar_shift_Hz == doctest::Approx(-1.7984e6).epsilon(0.001));
  const auto e = level_shift(rb, LevelId(Level::P5_3_2), solo, kFocus);
  CHECK(e.scalar_shift_Hz == doctest::Approx(-86.1415e6).epsilon(0.001));

  const std::vector<ToneField> pair = {trap_36W(), comp_tone(5.2)};
  const auto g2 = level_shift(rb, LevelId(Level::S5_1_2), pair, kFocus);
  CHECK(g2.scalar_shift_Hz == doctest::Approx(-2.0689e6).epsilon(0.001));
}

TEST_CASE("differential shift across compensation settings") {
  const AtomicData& rb = AtomicData::rb87();
  CHECK(differential_shift_Hz(rb, {trap_36W(), comp_tone(0.0)}, kFocus) ==
        doctest::Approx(-84.343e6).epsilon(0.001));
  CHECK(differential_shift_Hz(rb, {trap_36W(), comp_tone(5.2)}, kFocus) ==
        doctest::Approx(+69.791e6).epsilon(0.001));
  // the effective red detuning this implies for -2.5 Gamma cooling light
  const double gamma = rb.constants().gamma;
  CHECK(kTwoPi * 69.791e6 / gamma + 2.5 == doctest::Approx(14.0).epsilon(0.01));
}

TEST_CASE("shift is linear in tone power") {
  const AtomicData& rb = AtomicData::rb87();
  ToneField half = trap_36W();
  half.power *= 0.5;
  const double full =
      level_shift(rb, LevelId(Level::S5_1_2), {trap_36W()}, kFocus).scalar_shift;
  const double part =
      level_shift(rb, LevelId(Level::S5_1_2), {half}, kFocus).scalar_shift;
  CHECK(part * 2.0 == doctest::Approx(full).epsilon(1e-12));
  // and additive over tones
  const double sum = level_shift(rb, LevelId(Level::S5_1_2),
                                 {trap_36W(), comp_tone(5.2)}, kFocus)
                         .scalar_shift;
  const double c_only =
      level_shift(rb, LevelId(Level::S5_1_2), {comp_tone(5.2)}, kFocus).scalar_shift;
  CHECK(sum == doctest::Approx(full + c_only).epsilon(1e-12));
}

TEST_CASE("compensation solve") {
  const AtomicData& rb = AtomicData::rb87();
  const ToneField comp = solve_compensation(rb, trap_36W());
  CHECK(comp.power == doctest::Approx(2.9112).epsilon(0.001));
  CHECK(trap_36W().peak_intensity() / comp.peak_intensity() ==
        doctest::Approx(12.053).epsilon(0.001));
  // zeroes the excited scalar shift at the focus
  const double e = level_shift(rb, LevelId(Level::P5_3_2), {trap_36W(), comp}, kFocus)
                       .scalar_shift_Hz;
  CHECK(std::abs(e) < 100.0);
  // geometry: orthogonal polarization, counter-propagating
  CHECK(std::abs(comp.polarization.dot(trap_36W().polarization)) < 1e-12);
  CHECK(comp.propagation_sign == -trap_36W().propagation_sign);

  ToneField off = trap_36W();
  off.power = 0.0;
  CHECK(solve_compensation(rb, off).power == 0.0);
}

TEST_CASE("excited sublevel spreads grow with compensation") {
  const AtomicData& rb = AtomicData::rb87();
  const double s0 =
      sublevel_shifts(rb, 3, {trap_36W(), comp_tone(0.0)}, kFocus).full_spread_Hz();
  const double s28 =
      sublevel_shifts(rb, 3, {trap_36W(), comp_tone(2.8)}, kFocus).full_spread_Hz();
  const double s52 =
      sublevel_shifts(rb, 3, {trap_36W(), comp_tone(5.2)}, kFocus).full_spread_Hz();
  CHECK(s0 == doctest::Approx(20.976e6).epsilon(0.001));
  CHECK(s28 == doctest::Approx(32.168e6).epsilon(0.001));
  CHECK(s52 == doctest::Approx(43.936e6).epsilon(0.001));
  CHECK(s0 < s28);
  CHECK(s28 < s52);
}

TEST_CASE("sublevel shifts come in mirror pairs") {
  // single linear tone: eigenvalues are degenerate in |mF'|
  const AtomicData& rb = AtomicData::rb87();
  const auto r = sublevel_shifts(rb, 3, {trap_36W()}, kFocus);
  REQUIRE(r.sublevel_shifts_Hz.size() == 7);
  auto v = r.sublevel_shifts_Hz;
  std::sort(v.begin(), v.end());
  // the m = 0 state sits alone, the |m| > 0 states pair up
  CHECK(v[1] == doctest::Approx(v[2]).epsilon(1e-9));
  CHECK(v[3] == doctest::Approx(v[4]).epsilon(1e-9));
  CHECK(v[5] == doctest::Approx(v[6]).epsilon(1e-9));
}

TEST_CASE("boltzmann sample statistics") {
  const AtomicData& rb = AtomicData::rb87();
  const std::vector<ToneField> tones = {trap_36W()};
  std::mt19937_64 rng(11);
  const auto cold = sample_boltzmann(rb, tones, 0.0, 50, rng);
  REQUIRE(cold.size() == 50);
  for (const auto& p : cold) CHECK(p.norm() == 0.0);

  const auto warm = sample_boltzmann(rb, tones, 15e-6, 4000, rng);
  double var_x = 0.0;
  for (const auto& p : warm) var_x += p.x() * p.x();
  var_x /= warm.size();
  // transverse width near the harmonic prediction at 15 uK
  const double omega = kTwoPi * 184.086;
  const double sigma2 = kBoltzmann * 15e-6 / (rb.constants().mass * omega * omega);
  CHECK(var_x == doctest::Approx(sigma2).epsilon(0.25));
  // stays inside the bound region
  for (const auto& p : warm) CHECK(std::abs(p.z()) <= 500e-6);
}

TEST_CASE("spectrum synthesis") {
  const AtomicData& rb = AtomicData::rb87();
  const std::vector<ToneField> tones = {trap_36W(), comp_tone(5.2)};
  std::mt19937_64 rng(3);
  const auto sample = sample_boltzmann(rb, tones, 15e-6, 400, rng);
  const ShiftSpectrum spec = synthesize_spectrum(rb, tones, sample);
  // integrated weight equals the sample size
  CHECK(spec.total_weight() == doctest::Approx(400.0).epsilon(0.02));
  for (std::size_t i = 1; i < spec.detuning_Hz.size(); ++i)
    CHECK(spec.detuning_Hz[i] > spec.detuning_Hz[i - 1]);
  CHECK_THROWS_AS(synthesize_spectrum(rb, tones, {}), EmptySampleError);
}
