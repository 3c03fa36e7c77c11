#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "cavsim/atomic_data.hpp"
#include "cavsim/units.hpp"

namespace cavsim {

using Vec3 = Eigen::Vector3d;

// One intracavity light tone. The cavity axis is the local z axis and all
// tone waists are co-located at the origin.
struct ToneField {
  double wavelength = 1560e-9;   // m
  double power = 0.0;            // circulating power, W
  double waist = 157e-6;         // m, averaged over the principal axes
  Vec3 polarization = Vec3::UnitY();  // linear, unit norm
  int propagation_sign = +1;     // along +z or -z
  double backscatter_fraction = 0.0;  // in [0, 1)

  void validate() const;
  double rayleigh_range() const { return kPi * waist * waist / wavelength; }
  double peak_intensity() const { return 2.0 * power / (kPi * waist * waist); }

  // Fundamental Gaussian beam intensity, divergence included.
  double intensity(const Vec3& p) const;
  Vec3 intensity_gradient(const Vec3& p) const;

  // Residual standing-wave factor from mirror back-scatter, applied along z.
  double axial_modulation_factor(double z) const;
};

struct CavityMode {
  double wavelength = 0.0;  // m
  char polarization = 's';  // out-of-plane 's' (high finesse) or in-plane 'p'
  double finesse = 0.0;
  double waist = 0.0;       // m
  std::optional<double> measured_kappa = std::nullopt;  // rad/s, when known
};

struct CavityParams {
  double circumference = 0.0984;  // m
  std::vector<CavityMode> modes;
  double coupling_g = kTwoPi * 85e3;  // 780-nm high-finesse mode, rad/s

  void validate() const;
  const CavityMode& mode(double wavelength, char polarization) const;

  // The cavity used in this work, App.-style parameter set.
  static CavityParams nominal();
};

// c / L, in Hz.
double free_spectral_range(const CavityParams& cavity);

// FWHM linewidth 2*pi*FSR/finesse, in rad/s.
double linewidth_from_finesse(const CavityParams& cavity, const CavityMode& mode);

// Peak relative intensity modulation 2*sqrt(fraction).
double backscatter_modulation(double backscatter_fraction);

struct GravityConfig {
  bool enabled = false;
  Vec3 pull = -Vec3::UnitY();  // direction of the gravitational force, unit
};

// Ground-state (5S1/2) dipole potential from all tones, plus the gravity
// term when enabled. More negative = more trapping; zero at infinity.
double ground_potential(const AtomicData& data, const std::vector<ToneField>& tones,
                        const Vec3& point, const GravityConfig& gravity = {});

Vec3 ground_potential_gradient(const AtomicData& data,
                               const std::vector<ToneField>& tones, const Vec3& point,
                               const GravityConfig& gravity = {});

struct TrapShape {
  double depth_optical = 0.0;    // J, from minimum to the field-free level
  double depth_effective = 0.0;  // J, lowest escape path incl. gravity sag
  Vec3 minimum = Vec3::Zero();
  Vec3 frequencies_Hz = Vec3::Zero();  // sorted by axis x, y, z
};

struct NotTrappingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

TrapShape trap_shape(const AtomicData& data, const std::vector<ToneField>& tones,
                     const GravityConfig& gravity = {});

}  // namespace cavsim
