#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cavsim/units.hpp"

namespace cavsim {

// Electronic levels of 87Rb relevant to the two-tone trap.
enum class Level { S5_1_2, P5_3_2, P5_1_2, D4_3_2, D4_5_2, S6_1_2 };

const char* level_name(Level level);
Level level_from_name(const std::string& name);
double level_J(Level level);

// Electronic level with optional hyperfine labels.
struct LevelId {
  Level level = Level::S5_1_2;
  std::optional<int> F;
  std::optional<int> mF;

  LevelId() = default;
  LevelId(Level l) : level(l) {}
  LevelId(Level l, int f) : level(l), F(f) { validate(); }
  LevelId(Level l, int f, int mf) : level(l), F(f), mF(mf) { validate(); }

  void validate() const;
};

struct AtomicConstants {
  double mass = 0.0;                      // kg
  double gamma = 0.0;                     // natural linewidth of 5P3/2, rad/s
  double saturation_intensity = 0.0;      // D2 cycling, W/m^2
  double hyperfine_splitting_Hz = 0.0;    // ground-state splitting
  double d2_wavelength = 0.0;             // m
  double k_B = kBoltzmann;
  double eps0c = kEpsilon0C;
};

// One dipole transition used by the sum-over-states polarizability.
struct TransitionLine {
  Level upper;
  double wavelength = 0.0;       // m, vacuum
  double reduced_dipole_au = 0.0;  // sqrt of symmetric line strength, atomic units
};

struct PolarizabilityEntry {
  LevelId level;
  double wavelength = 0.0;  // m
  double alpha_scalar = 0.0;  // J per (V/m)^2
  double alpha_tensor = 0.0;
};

struct UnknownLevelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MissingMatrixElementError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// 87Rb constants, the tabulated scalar polarizabilities and the transition
// data backing the sum-over-states fallback. Immutable after construction.
class AtomicData {
 public:
  // Bundled 87Rb data set.
  static const AtomicData& rb87();

  // Parse the same structure from a JSON document (see data/rb87.json).
  static AtomicData from_json_text(const std::string& text);
  static AtomicData from_json_file(const std::string& path);

  const AtomicConstants& constants() const { return constants_; }

  // Scalar polarizability with the sign convention dE = -1/2 alpha E_rms^2.
  // Table entries are returned exactly; other wavelengths fall back to the
  // sum over states when transition data exist for the level.
  double scalar_polarizability(const LevelId& level, double wavelength) const;

  // Tensor part; identically zero for J = 1/2 levels.
  double tensor_polarizability(const LevelId& level, double wavelength) const;

  // Sum-over-states evaluation, bypassing the table. Used as the tensor
  // route and as a cross-check of the tabulated scalars.
  double scalar_sum_over_states(const LevelId& level, double wavelength) const;

  const std::vector<PolarizabilityEntry>& table() const { return table_; }

 private:
  AtomicConstants constants_;
  std::vector<PolarizabilityEntry> table_;
  std::vector<std::pair<Level, std::vector<TransitionLine>>> lines_;

  const std::vector<TransitionLine>* lines_for(Level level) const;
};

// Wigner 6-j symbol for the small angular momenta needed here.
double wigner_6j(double j1, double j2, double j3, double j4, double j5, double j6);

}  // namespace cavsim
