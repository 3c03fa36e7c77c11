#include <doctest.h>

#include <random>

#include "cavsim/atomic_data.hpp"
#include "cavsim/readout.hpp"
#include "cavsim/units.hpp"

using namespace cavsim;

TEST_CASE("dispersive shift rate") {
  DispersiveParams p;
  CHECK(p.omega() / kTwoPi == doctest::Approx(4.229).epsilon(0.005));
  CHECK(dispersive_shift_rate(p.g, p.delta) == doctest::Approx(p.omega()).epsilon(1e-12));
  CHECK_THROWS_AS(dispersive_shift_rate(p.g, 0.0), ZeroDetuningError);
}

TEST_CASE("cooperativity figures") {
  const double gamma = AtomicData::rb87().constants().gamma;
  const DispersiveParams p;
  CHECK(cooperativity(p.g, p.kappa, gamma) == doctest::Approx(0.0560).epsilon(0.01));
  const double n = 4e6;
  CHECK(collective_cooperativity(p.g, p.kappa, gamma, n) ==
        doctest::Approx(n * cooperativity(p.g, p.kappa, gamma)).epsilon(1e-12));
  CHECK(collective_cooperativity(p.g, p.kappa, gamma, 4e6) ==
        doctest::Approx(2.24e5).epsilon(0.01));
}

TEST_CASE("mode overlap weight geometry") {
  const DispersiveParams p;
  CHECK(mode_overlap_weight(p, 780e-9, Vec3::Zero()) == doctest::Approx(1.0));
  const double off = mode_overlap_weight(p, 780e-9, Vec3(p.mode_waist, 0, 0));
  CHECK(off == doctest::Approx(std::exp(-2.0)).epsilon(1e-6));
  CHECK(mode_overlap_weight(p, 780e-9, Vec3(5e-3, 0, 0)) < 1e-10);
}

TEST_CASE("cavity shift signs and linearity") {
  const DispersiveParams p;
  SpinSummary all_f2{0.0, 1.0};
  SpinSummary all_f1{1.0, 0.0};
  const double up = cavity_shift_Hz(all_f2, p);
  const double down = cavity_shift_Hz(all_f1, p);
  CHECK(up > 0.0);
  CHECK(up == doctest::Approx(-down).epsilon(1e-12));
  CHECK(up == doctest::Approx(0.5 * p.omega() / kTwoPi).epsilon(1e-9));

  // superposition: shift of the union equals the sum of the parts
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 50e-6);
  std::vector<Vec3> pos;
  std::vector<bool> f2;
  for (int i = 0; i < 200; ++i) {
    pos.emplace_back(g(rng), g(rng), g(rng));
    f2.push_back(i % 3 != 0);
  }
  const SpinSummary whole = weigh_ensemble(p, 780e-9, pos, f2);
  std::vector<Vec3> pa(pos.begin(), pos.begin() + 120), pb(pos.begin() + 120, pos.end());
  std::vector<bool> fa(f2.begin(), f2.begin() + 120), fb(f2.begin() + 120, f2.end());
  const SpinSummary a = weigh_ensemble(p, 780e-9, pa, fa);
  const SpinSummary b = weigh_ensemble(p, 780e-9, pb, fb);
  CHECK(cavity_shift_Hz(whole, p) ==
        doctest::Approx(cavity_shift_Hz(a, p) + cavity_shift_Hz(b, p)).epsilon(1e-9));

  // the macro-atom scale multiplies through
  const SpinSummary scaled = weigh_ensemble(p, 780e-9, pos, f2, 1e4);
  CHECK(scaled.n_F2 == doctest::Approx(1e4 * whole.n_F2).epsilon(1e-9));
  CHECK(cavity_shift_Hz(scaled, p) ==
        doctest::Approx(1e4 * cavity_shift_Hz(whole, p)).epsilon(1e-9));
}

TEST_CASE("probe scan recovers the dip") {
  const DispersiveParams p;
  std::mt19937_64 rng(41);
  const double truth = 2.7e3;

  SUBCASE("noise free") {
    const ProbeScan s = probe_scan(truth, p.kappa, 2e6, 801, 0.0, rng);
    REQUIRE(s.detuning_Hz.size() == 801);
    const double grid = 2e6 / 800.0;
    CHECK(std::abs(s.fitted_dip_Hz - truth) < grid);
    // reflection dips at the shifted resonance and recovers far away
    const auto min_it =
        std::min_element(s.reflected_power.begin(), s.reflected_power.end());
    const std::size_t idx = min_it - s.reflected_power.begin();
    CHECK(std::abs(s.detuning_Hz[idx] - truth) < 2 * grid);
    CHECK(s.reflected_power.front() > 0.9);
    CHECK(s.reflected_power.back() > 0.9);
  }

  SUBCASE("deterministic for a fixed stream") {
    std::mt19937_64 r1(99), r2(99);
    const ProbeScan a = probe_scan(truth, p.kappa, 2e6, 401, 0.05, r1);
    const ProbeScan b = probe_scan(truth, p.kappa, 2e6, 401, 0.05, r2);
    CHECK(a.fitted_dip_Hz == b.fitted_dip_Hz);
    CHECK(a.reflected_power == b.reflected_power);
  }

  SUBCASE("moderate noise") {
    const ProbeScan s = probe_scan(truth, p.kappa, 2e6, 801, 0.03, rng);
    CHECK(std::abs(s.fitted_dip_Hz - truth) < p.kappa / kTwoPi / 50.0);
  }

  SUBCASE("error cases") {
    CHECK_THROWS_AS(probe_scan(5e6, p.kappa, 2e6, 801, 0.0, rng), ScanError);
    CHECK_THROWS_AS(probe_scan(0.0, p.kappa, 2e6, 4, 0.0, rng), ScanError);
  }
}
