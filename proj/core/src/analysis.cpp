#include "cavsim/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "cavsim/fitting.hpp"
#include "cavsim/units.hpp"

namespace cavsim {

void TofSeries::validate() const {
  if (times.size() != widths.size() || times.empty())
    throw std::invalid_argument("TofSeries times/widths mismatch");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < 0) throw std::invalid_argument("TOF times must be >= 0");
    if (i > 0 && times[i] <= times[i - 1])
      throw std::invalid_argument("TOF times must be strictly increasing");
    for (int a = 0; a < 3; ++a)
      if (widths[i][a] <= 0) throw std::invalid_argument("TOF widths must be > 0");
  }
}

TofSeries tof_expand(const std::vector<Vec3>& positions,
                     const std::vector<Vec3>& velocities,
                     const std::vector<double>& times, bool with_gravity,
                     const Vec3& gravity_pull) {
  if (positions.empty() || positions.size() != velocities.size())
    throw EmptyEnsembleError("tof_expand needs a non-empty ensemble");
  TofSeries out;
  out.times = times;
  const double n = double(positions.size());
  for (double t : times) {
    Vec3 mean = Vec3::Zero(), m2 = Vec3::Zero();
    const Vec3 g_off = with_gravity ? Vec3(0.5 * kGravity * t * t * gravity_pull)
                                    : Vec3(Vec3::Zero());
    for (std::size_t i = 0; i < positions.size(); ++i) {
      const Vec3 p = positions[i] + velocities[i] * t + g_off;
      mean += p;
    }
    mean /= n;
    for (std::size_t i = 0; i < positions.size(); ++i) {
      const Vec3 p = positions[i] + velocities[i] * t + g_off;
      m2 += (p - mean).cwiseProduct(p - mean);
    }
    out.widths.push_back((m2 / n).cwiseSqrt());
  }
  return out;
}

TofFit fit_tof(const TofSeries& series, double mass, double width_inflation) {
  series.validate();
  if (series.times.size() < 3)
    throw FitError("fit_tof needs at least 3 time points");
  const int n = int(series.times.size());
  TofFit out;
  for (int axis = 0; axis < 3; ++axis) {
    // Optional imaging-diffusion correction, removed in quadrature.
    std::vector<double> sig(n);
    for (int i = 0; i < n; ++i) {
      const double s = series.widths[i][axis];
      sig[i] = std::sqrt(std::max(s * s - width_inflation * width_inflation,
                                  1e-6 * s * s));
    }

    auto model = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r,
                     Eigen::MatrixXd& J) {
      const double T = p[0], s0 = p[1];
      for (int i = 0; i < n; ++i) {
        const double t = series.times[i];
        const double m2 = s0 * s0 + kBoltzmann * T * t * t / mass;
        const double m = std::sqrt(std::max(m2, 1e-30));
        r[i] = m - sig[i];
        J(i, 0) = kBoltzmann * t * t / (2.0 * mass * m);
        J(i, 1) = s0 / m;
      }
    };

    // Moment initialization from the first and last points.
    const double t_last = series.times[n - 1];
    double T0 = mass * (sig[n - 1] * sig[n - 1] - sig[0] * sig[0]) /
                (kBoltzmann * t_last * t_last);
    T0 = std::max(T0, 1e-9);
    Eigen::VectorXd init(2);
    init << T0, sig[0];
    const LmResult lm = levenberg_marquardt(model, init, n);

    FitResult& f = out.per_axis[axis];
    f.converged = lm.converged;
    f.residual_norm = lm.residual_norm;
    double T = lm.parameters[0];
    if (T < 0) {
      T = 0.0;
      f.clamped = true;
    }
    f.estimates = {T, std::abs(lm.parameters[1])};
    f.uncertainties = {lm.uncertainties[0], lm.uncertainties[1]};
    if (!lm.converged) throw FitError("TOF fit did not converge");
  }
  return out;
}

LorentzianFit fit_lorentzian(const ShiftSpectrum& spectrum) {
  const auto& x = spectrum.detuning_Hz;
  const auto& y = spectrum.weight;
  const int n = int(x.size());
  if (n < 5) throw FitError("spectrum too short for a Lorentzian fit");

  const auto [ymin_it, ymax_it] = std::minmax_element(y.begin(), y.end());
  const double off0 = *ymin_it;
  const double amp0 = *ymax_it - *ymin_it;
  if (amp0 <= 0) throw FitError("spectrum has no peak");
  const double c0 = x[std::distance(y.begin(), ymax_it)];
  // crude half-maximum width
  double lo = x.front(), hi = x.back();
  for (int i = 0; i < n; ++i)
    if (y[i] - off0 > 0.5 * amp0) {
      lo = x[i];
      break;
    }
  for (int i = n - 1; i >= 0; --i)
    if (y[i] - off0 > 0.5 * amp0) {
      hi = x[i];
      break;
    }
  const double w0 = std::max(hi - lo, (x[1] - x[0]) * 2);

  auto model = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r,
                   Eigen::MatrixXd& J) {
    const double c = p[0], w = p[1], A = p[2], off = p[3];
    for (int i = 0; i < n; ++i) {
      const double u = 2.0 * (x[i] - c) / w;
      const double L = 1.0 / (1.0 + u * u);
      r[i] = off + A * L - y[i];
      const double dLdu = -2.0 * u * L * L;
      J(i, 0) = A * dLdu * (-2.0 / w);
      J(i, 1) = A * dLdu * (-u / w);
      J(i, 2) = L;
      J(i, 3) = 1.0;
    }
  };

  Eigen::VectorXd init(4);
  init << c0, w0, amp0, off0;
  const LmResult lm = levenberg_marquardt(model, init, n);
  if (!lm.converged) throw FitError("Lorentzian fit did not converge");

  LorentzianFit out;
  out.fit.converged = true;
  out.fit.residual_norm = lm.residual_norm;
  out.fit.estimates = {lm.parameters[0], std::abs(lm.parameters[1]),
                       lm.parameters[2], lm.parameters[3]};
  out.fit.uncertainties = {lm.uncertainties[0], lm.uncertainties[1],
                           lm.uncertainties[2], lm.uncertainties[3]};
  // Residual structure beyond ~15% of the peak signals a second component.
  double signal = 0.0;
  for (int i = 0; i < n; ++i) signal += (y[i] - off0) * (y[i] - off0);
  out.multi_peak_warning = lm.residual_norm > 0.15 * std::sqrt(signal);
  return out;
}

}  // namespace cavsim
