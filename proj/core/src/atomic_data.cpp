#include "cavsim/atomic_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rb87_embedded.hpp"

namespace cavsim {

namespace {

constexpr double kNuclearSpin = 1.5;  // 87Rb

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

bool triangle_ok(double a, double b, double c) {
  return c >= std::abs(a - b) - 1e-9 && c <= a + b + 1e-9 &&
         std::abs(std::round(a + b + c) - (a + b + c)) < 1e-9;
}

double tri_coeff(double a, double b, double c) {
  return factorial(int(std::round(a + b - c))) *
         factorial(int(std::round(a - b + c))) *
         factorial(int(std::round(-a + b + c))) /
         factorial(int(std::round(a + b + c + 1)));
}

}  // namespace

double wigner_6j(double j1, double j2, double j3, double j4, double j5, double j6) {
  if (!triangle_ok(j1, j2, j3) || !triangle_ok(j1, j5, j6) ||
      !triangle_ok(j4, j2, j6) || !triangle_ok(j4, j5, j3))
    return 0.0;
  const double pref = std::sqrt(tri_coeff(j1, j2, j3) * tri_coeff(j1, j5, j6) *
                                tri_coeff(j4, j2, j6) * tri_coeff(j4, j5, j3));
  const int tmin = int(std::round(std::max({j1 + j2 + j3, j1 + j5 + j6,
                                            j4 + j2 + j6, j4 + j5 + j3})));
  const int tmax = int(std::round(std::min({j1 + j2 + j4 + j5, j2 + j3 + j5 + j6,
                                            j3 + j1 + j6 + j4})));
  double sum = 0.0;
  for (int t = tmin; t <= tmax; ++t) {
    double denom = factorial(t - int(std::round(j1 + j2 + j3))) *
                   factorial(t - int(std::round(j1 + j5 + j6))) *
                   factorial(t - int(std::round(j4 + j2 + j6))) *
                   factorial(t - int(std::round(j4 + j5 + j3))) *
                   factorial(int(std::round(j1 + j2 + j4 + j5)) - t) *
                   factorial(int(std::round(j2 + j3 + j5 + j6)) - t) *
                   factorial(int(std::round(j3 + j1 + j6 + j4)) - t);
    sum += ((t % 2) ? -1.0 : 1.0) * factorial(t + 1) / denom;
  }
  return pref * sum;
}

const char* level_name(Level level) {
  switch (level) {
    case Level::S5_1_2: return "5S1/2";
    case Level::P5_3_2: return "5P3/2";
    case Level::P5_1_2: return "5P1/2";
    case Level::D4_3_2: return "4D3/2";
    case Level::D4_5_2: return "4D5/2";
    case Level::S6_1_2: return "6S1/2";
  }
  return "?";
}

Level level_from_name(const std::string& name) {
  for (Level l : {Level::S5_1_2, Level::P5_3_2, Level::P5_1_2, Level::D4_3_2,
                  Level::D4_5_2, Level::S6_1_2})
    if (name == level_name(l)) return l;
  throw UnknownLevelError("unknown level name: " + name);
}

double level_J(Level level) {
  switch (level) {
    case Level::S5_1_2:
    case Level::P5_1_2:
    case Level::S6_1_2: return 0.5;
    case Level::P5_3_2:
    case Level::D4_3_2: return 1.5;
    case Level::D4_5_2: return 2.5;
  }
  return 0.0;
}

void LevelId::validate() const {
  if (!F) {
    if (mF) throw std::invalid_argument("mF given without F");
    return;
  }
  const double J = level_J(level);
  const int fmin = int(std::round(std::abs(J - kNuclearSpin)));
  const int fmax = int(std::round(J + kNuclearSpin));
  if (*F < fmin || *F > fmax)
    throw std::invalid_argument("F=" + std::to_string(*F) + " outside [" +
                                std::to_string(fmin) + "," + std::to_string(fmax) +
                                "] for " + level_name(level));
  if (mF && std::abs(*mF) > *F)
    throw std::invalid_argument("|mF| > F");
}

const AtomicData& AtomicData::rb87() {
  static const AtomicData data = AtomicData::from_json_text(kRb87Json);
  return data;
}

AtomicData AtomicData::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open atomic data file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

AtomicData AtomicData::from_json_text(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  AtomicData data;
  const auto& c = j.at("constants");
  data.constants_.mass = c.at("mass_kg").get<double>();
  data.constants_.gamma = c.at("natural_linewidth_rad_s").get<double>();
  data.constants_.saturation_intensity =
      c.at("d2_saturation_intensity_W_m2").get<double>();
  data.constants_.hyperfine_splitting_Hz =
      c.at("ground_hyperfine_splitting_Hz").get<double>();
  data.constants_.d2_wavelength = c.at("d2_wavelength_m").get<double>();
  if (data.constants_.mass <= 0 || data.constants_.gamma <= 0 ||
      data.constants_.saturation_intensity <= 0 ||
      data.constants_.hyperfine_splitting_Hz <= 0)
    throw std::runtime_error("atomic constants must be strictly positive");

  for (const auto& e : j.at("scalar_polarizabilities")) {
    PolarizabilityEntry entry;
    entry.level = LevelId(level_from_name(e.at("level").get<std::string>()));
    entry.wavelength = e.at("wavelength_nm").get<double>() * 1e-9;
    entry.alpha_scalar = e.at("alpha_SI").get<double>();
    data.table_.push_back(entry);
  }

  for (const auto& [name, arr] : j.at("transition_lines").items()) {
    if (name.rfind("_", 0) == 0) continue;  // comment keys
    std::vector<TransitionLine> lines;
    for (const auto& e : arr) {
      TransitionLine line;
      line.upper = level_from_name(e.at("upper").get<std::string>());
      line.wavelength = e.at("wavelength_nm").get<double>() * 1e-9;
      line.reduced_dipole_au = e.at("reduced_dipole_au").get<double>();
      lines.push_back(line);
    }
    data.lines_.emplace_back(level_from_name(name), std::move(lines));
  }
  return data;
}

const std::vector<TransitionLine>* AtomicData::lines_for(Level level) const {
  for (const auto& [l, lines] : lines_)
    if (l == level) return &lines;
  return nullptr;
}

double AtomicData::scalar_polarizability(const LevelId& level, double wavelength) const {
  for (const auto& e : table_)
    if (e.level.level == level.level && std::abs(e.wavelength - wavelength) < 0.5e-9)
      return e.alpha_scalar;
  if (lines_for(level.level)) return scalar_sum_over_states(level, wavelength);
  throw UnknownLevelError(std::string("no polarizability data for ") +
                          level_name(level.level));
}

double AtomicData::scalar_sum_over_states(const LevelId& level, double wavelength) const {
  const auto* lines = lines_for(level.level);
  if (!lines)
    throw MissingMatrixElementError(std::string("no transition data for ") +
                                    level_name(level.level));
  const double J = level_J(level.level);
  const double omega = kTwoPi * kSpeedOfLight / wavelength;
  const double d_au = kElementaryCharge * kBohrRadius;
  double sum = 0.0;
  for (const auto& line : *lines) {
    const double omega0 = kTwoPi * kSpeedOfLight / line.wavelength;
    const double S = line.reduced_dipole_au * line.reduced_dipole_au * d_au * d_au;
    sum += S * omega0 / (omega0 * omega0 - omega * omega);
  }
  return 2.0 / (3.0 * (2.0 * J + 1.0) * kHbar) * sum;
}

double AtomicData::tensor_polarizability(const LevelId& level, double wavelength) const {
  const double J = level_J(level.level);
  if (J < 1.0) return 0.0;
  const auto* lines = lines_for(level.level);
  if (!lines)
    throw MissingMatrixElementError(std::string("tensor polarizability needs "
                                                "transition data for ") +
                                    level_name(level.level));
  const double omega = kTwoPi * kSpeedOfLight / wavelength;
  const double d_au = kElementaryCharge * kBohrRadius;
  const double pref =
      4.0 * std::sqrt(5.0 * J * (2.0 * J - 1.0) /
                      (6.0 * (J + 1.0) * (2.0 * J + 1.0) * (2.0 * J + 3.0)));
  double sum = 0.0;
  for (const auto& line : *lines) {
    const double Jp = level_J(line.upper);
    const double omega0 = kTwoPi * kSpeedOfLight / line.wavelength;
    const double S = line.reduced_dipole_au * line.reduced_dipole_au * d_au * d_au;
    const double phase = (int(std::round(J + Jp)) % 2) ? -1.0 : 1.0;
    sum += phase * wigner_6j(J, 1.0, Jp, 1.0, J, 2.0) * S * omega0 /
           (omega0 * omega0 - omega * omega);
  }
  return pref * sum / kHbar;
}

}  // namespace cavsim
