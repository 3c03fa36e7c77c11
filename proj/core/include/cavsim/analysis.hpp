#pragma once

#include <stdexcept>
#include <vector>

#include "cavsim/lightshift.hpp"
#include "cavsim/trap_optics.hpp"

namespace cavsim {

struct TofSeries {
  std::vector<double> times;                // s, strictly increasing, >= 0
  std::vector<Vec3> widths;                 // per-axis cloud sigma, m

  void validate() const;
};

struct FitResult {
  std::vector<double> estimates;
  std::vector<double> uncertainties;  // 1-sigma
  double residual_norm = 0.0;
  bool converged = false;
  bool clamped = false;  // negative temperature clamped to zero
};

struct TofFit {
  FitResult per_axis[3];  // parameters: {T (K), sigma0 (m)}
  double temperature_K(int axis) const { return per_axis[axis].estimates[0]; }
};

struct LorentzianFit {
  FitResult fit;  // parameters: {center_Hz, fwhm_Hz, amplitude, offset}
  bool multi_peak_warning = false;
  double center_Hz() const { return fit.estimates[0]; }
  double fwhm_Hz() const { return fit.estimates[1]; }
};

struct EmptyEnsembleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Ballistic expansion of (position, velocity) samples; per-axis standard
// deviations at each requested time.
TofSeries tof_expand(const std::vector<Vec3>& positions,
                     const std::vector<Vec3>& velocities,
                     const std::vector<double>& times, bool with_gravity,
                     const Vec3& gravity_pull = -Vec3::UnitY());

// Weighted least squares on sigma(t) = sqrt(sigma0^2 + kB T t^2 / m).
TofFit fit_tof(const TofSeries& series, double mass,
               double width_inflation = 0.0);

// Single-Lorentzian fit with amplitude and offset nuisance parameters.
LorentzianFit fit_lorentzian(const ShiftSpectrum& spectrum);

}  // namespace cavsim
