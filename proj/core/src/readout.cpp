#include "cavsim/readout.hpp"

#include <cmath>

#include "cavsim/analysis.hpp"

namespace cavsim {

double dispersive_shift_rate(double g, double delta) {
  if (delta == 0.0) throw ZeroDetuningError("dispersive shift undefined at zero detuning");
  return 2.0 * g * g / delta;
}

double DispersiveParams::omega() const { return dispersive_shift_rate(g, delta); }

double cooperativity(double g, double kappa, double gamma) {
  if (kappa <= 0 || gamma <= 0)
    throw std::invalid_argument("kappa and gamma must be positive");
  return 4.0 * g * g / (kappa * gamma);
}

double collective_cooperativity(double g, double kappa, double gamma, double n) {
  return n * cooperativity(g, kappa, gamma);
}

double mode_overlap_weight(const DispersiveParams& params, double wavelength,
                           const Vec3& position) {
  const double zr = kPi * params.mode_waist * params.mode_waist / wavelength;
  const double wz2 =
      params.mode_waist * params.mode_waist *
      (1.0 + (position.z() / zr) * (position.z() / zr));
  const double r2 = position.x() * position.x() + position.y() * position.y();
  // normalized to 1 at the mode center
  return params.mode_waist * params.mode_waist / wz2 * std::exp(-2.0 * r2 / wz2);
}

double cavity_shift_Hz(const SpinSummary& spins, const DispersiveParams& params) {
  return params.omega() / kTwoPi * spins.j_z();
}

SpinSummary weigh_ensemble(const DispersiveParams& params, double wavelength,
                           const std::vector<Vec3>& positions,
                           const std::vector<bool>& in_F2, double scale) {
  SpinSummary s;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const double w = scale * mode_overlap_weight(params, wavelength, positions[i]);
    if (in_F2[i])
      s.n_F2 += w;
    else
      s.n_F1 += w;
  }
  return s;
}

ProbeScan probe_scan(double true_shift_Hz, double kappa, double scan_span_Hz,
                     std::size_t points, double noise_rms, std::mt19937_64& rng,
                     double dip_depth) {
  if (points < 8) throw ScanError("probe scan needs at least 8 points");
  const double half = 0.5 * scan_span_Hz;
  if (true_shift_Hz < -half || true_shift_Hz > half)
    throw ScanError("reflection dip outside the scan range");

  ProbeScan scan;
  scan.detuning_Hz.resize(points);
  scan.reflected_power.resize(points);
  const double hwhm = 0.5 * kappa / kTwoPi;
  std::normal_distribution<double> noise(0.0, noise_rms);
  for (std::size_t i = 0; i < points; ++i) {
    const double x = -half + scan_span_Hz * double(i) / double(points - 1);
    const double u = (x - true_shift_Hz) / hwhm;
    double y = 1.0 - dip_depth / (1.0 + u * u);
    if (noise_rms > 0) y += noise(rng);
    scan.detuning_Hz[i] = x;
    scan.reflected_power[i] = y;
  }

  // Fit the inverted dip with the Lorentzian machinery.
  ShiftSpectrum inv;
  inv.detuning_Hz = scan.detuning_Hz;
  inv.weight.resize(points);
  for (std::size_t i = 0; i < points; ++i)
    inv.weight[i] = 1.0 - scan.reflected_power[i];
  try {
    const auto fit = fit_lorentzian(inv);
    scan.fitted_dip_Hz = fit.center_Hz();
  } catch (const FitError&) {
    throw ScanError("dip fit failed; noise level too high");
  }
  return scan;
}

}  // namespace cavsim
