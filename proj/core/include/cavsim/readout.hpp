#pragma once

#include <random>
#include <stdexcept>
#include <vector>

#include "cavsim/trap_optics.hpp"

namespace cavsim {

struct DispersiveParams {
  double g = kTwoPi * 85e3;        // atom-cavity coupling, rad/s
  double delta = kTwoPi * 3.417e9; // probe detuning from the excited state, rad/s
  double kappa = kTwoPi * 85e3;    // probe-mode FWHM linewidth, rad/s
  double mode_waist = 111e-6;      // 780-nm mode, m

  double omega() const;            // dispersive shift rate 2 g^2 / delta, rad/s
};

struct SpinSummary {
  double n_F1 = 0.0;  // mode-overlap-weighted counts
  double n_F2 = 0.0;
  double j_z() const { return 0.5 * (n_F2 - n_F1); }
};

struct ZeroDetuningError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct ScanError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Omega = 2 g^2 / Delta.
double dispersive_shift_rate(double g, double delta);

// Single-atom cooperativity C = 4 g^2 / (kappa Gamma) and its collective form.
double cooperativity(double g, double kappa, double gamma);
double collective_cooperativity(double g, double kappa, double gamma, double n);

// Normalized 780-nm mode intensity at a position, used as the coupling weight.
double mode_overlap_weight(const DispersiveParams& params, double wavelength,
                           const Vec3& position);

// Cavity resonance shift Omega * J_z, in Hz.
double cavity_shift_Hz(const SpinSummary& spins, const DispersiveParams& params);

// Overlap-weighted spin summary from per-atom positions and manifolds
// (true = F=2 bright, false = F=1 dark), with an optional macro-atom scale.
SpinSummary weigh_ensemble(const DispersiveParams& params, double wavelength,
                           const std::vector<Vec3>& positions,
                           const std::vector<bool>& in_F2, double scale = 1.0);

struct ProbeScan {
  std::vector<double> detuning_Hz;       // probe grid
  std::vector<double> reflected_power;   // normalized, dip at resonance
  double fitted_dip_Hz = 0.0;
};

// Synthesizes a Lorentzian reflection dip of FWHM kappa centered at the
// shifted resonance, adds white noise, and returns the fitted minimum.
ProbeScan probe_scan(double true_shift_Hz, double kappa, double scan_span_Hz,
                     std::size_t points, double noise_rms, std::mt19937_64& rng,
                     double dip_depth = 0.8);

}  // namespace cavsim
