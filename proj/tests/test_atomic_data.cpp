#include <doctest.h>

#include <fstream>
#include <sstream>

#include "cavsim/atomic_data.hpp"

using namespace cavsim;

TEST_CASE("bundled constants") {
  const AtomicConstants& c = AtomicData::rb87().constants();
  CHECK(c.mass == doctest::Approx(1.44316060e-25).epsilon(1e-7));
  CHECK(c.gamma == doctest::Approx(3.8117e7).epsilon(1e-4));
  CHECK(c.saturation_intensity == doctest::Approx(16.6933).epsilon(1e-4));
  CHECK(c.hyperfine_splitting_Hz == doctest::Approx(6.834682610904e9).epsilon(1e-12));
  CHECK(c.d2_wavelength == doctest::Approx(780.241209686e-9).epsilon(1e-9));
}

TEST_CASE("tabulated scalar polarizabilities") {
  const AtomicData& rb = AtomicData::rb87();
  const LevelId g(Level::S5_1_2), e(Level::P5_3_2);
  CHECK(rb.scalar_polarizability(g, 1560e-9) == doctest::Approx(6.804e-39).epsilon(1e-6));
  CHECK(rb.scalar_polarizability(g, 1527e-9) == doctest::Approx(6.906e-39).epsilon(1e-6));
  CHECK(rb.scalar_polarizability(e, 1560e-9) == doctest::Approx(3.259e-37).epsilon(1e-6));
  CHECK(rb.scalar_polarizability(e, 1527e-9) == doctest::Approx(-3.928e-36).epsilon(1e-6));

  // the headline ratio between excited and ground response at 1560 nm
  CHECK(rb.scalar_polarizability(e, 1560e-9) / rb.scalar_polarizability(g, 1560e-9) ==
        doctest::Approx(47.9).epsilon(0.01));
}

TEST_CASE("sum over states reproduces the table") {
  const AtomicData& rb = AtomicData::rb87();
  const double g_sum = rb.scalar_sum_over_states(LevelId(Level::S5_1_2), 1560e-9);
  CHECK(g_sum == doctest::Approx(6.804e-39).epsilon(0.01));
  const double e_sum = rb.scalar_sum_over_states(LevelId(Level::P5_3_2), 1560e-9);
  CHECK(e_sum == doctest::Approx(3.259e-37).epsilon(0.04));
  const double e27 = rb.scalar_sum_over_states(LevelId(Level::P5_3_2), 1527e-9);
  CHECK(e27 == doctest::Approx(-3.928e-36).epsilon(0.05));
}

TEST_CASE("tensor polarizability") {
  const AtomicData& rb = AtomicData::rb87();
  const LevelId e(Level::P5_3_2);
  // frozen values from the sum over states with the bundled line data
  CHECK(rb.tensor_polarizability(e, 1560e-9) ==
        doctest::Approx(-4.408863165598038e-38).epsilon(1e-9));
  CHECK(rb.tensor_polarizability(e, 1527e-9) ==
        doctest::Approx(4.101702083825096e-37).epsilon(1e-9));
  // J = 1/2 levels carry no tensor part
  CHECK(rb.tensor_polarizability(LevelId(Level::S5_1_2), 1560e-9) == 0.0);
}

TEST_CASE("wigner 6j spot values") {
  // exact rationals for small arguments
  CHECK(wigner_6j(1, 1, 1, 1, 1, 1) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  CHECK(wigner_6j(2, 1, 1, 1, 1, 1) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  CHECK(wigner_6j(1, 1, 0, 1, 1, 1) == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
  // triangle-violating arguments vanish
  CHECK(wigner_6j(3, 1, 1, 1, 1, 1) == 0.0);
}

TEST_CASE("level id validation") {
  CHECK_NOTHROW(LevelId(Level::S5_1_2, 2, -2));
  CHECK_THROWS_AS(LevelId(Level::S5_1_2, 3), std::invalid_argument);
  CHECK_THROWS_AS(LevelId(Level::P5_3_2, 2, 3), std::invalid_argument);
  CHECK_NOTHROW(LevelId(Level::P5_3_2, 3, -3));
}

TEST_CASE("unknown level and missing lines raise") {
  const AtomicData& rb = AtomicData::rb87();
  CHECK_THROWS_AS(rb.scalar_polarizability(LevelId(Level::S6_1_2), 1560e-9),
                  UnknownLevelError);
  CHECK_THROWS_AS(rb.tensor_polarizability(LevelId(Level::D4_5_2), 1560e-9),
                  MissingMatrixElementError);
}

TEST_CASE("embedded data matches the data file") {
  std::ifstream in(std::string(CAVSIM_SOURCE_DIR) + "/core/data/rb87.json");
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  const AtomicData file = AtomicData::from_json_text(buf.str());
  const AtomicData& mem = AtomicData::rb87();
  CHECK(file.constants().mass == mem.constants().mass);
  CHECK(file.constants().gamma == mem.constants().gamma);
  REQUIRE(file.table().size() == mem.table().size());
  for (std::size_t i = 0; i < file.table().size(); ++i) {
    CHECK(file.table()[i].alpha_scalar == mem.table()[i].alpha_scalar);
    CHECK(file.table()[i].wavelength == mem.table()[i].wavelength);
  }
}
