#include "cavsim/trap_optics.hpp"

#include <cmath>

namespace cavsim {

void ToneField::validate() const {
  if (power < 0) throw std::invalid_argument("tone power must be >= 0");
  if (waist <= 0) throw std::invalid_argument("tone waist must be > 0");
  if (backscatter_fraction < 0 || backscatter_fraction >= 1)
    throw std::invalid_argument("back-scatter fraction must lie in [0, 1)");
  if (std::abs(polarization.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("polarization must be unit norm");
  if (propagation_sign != 1 && propagation_sign != -1)
    throw std::invalid_argument("propagation sign must be +1 or -1");
}

double ToneField::intensity(const Vec3& p) const {
  if (power == 0.0) return 0.0;
  const double zr = rayleigh_range();
  const double wz2 = waist * waist * (1.0 + (p.z() / zr) * (p.z() / zr));
  const double r2 = p.x() * p.x() + p.y() * p.y();
  return 2.0 * power / (kPi * wz2) * std::exp(-2.0 * r2 / wz2);
}

Vec3 ToneField::intensity_gradient(const Vec3& p) const {
  if (power == 0.0) return Vec3::Zero();
  const double zr = rayleigh_range();
  const double u = p.z() / zr;
  const double wz2 = waist * waist * (1.0 + u * u);
  const double r2 = p.x() * p.x() + p.y() * p.y();
  const double I = 2.0 * power / (kPi * wz2) * std::exp(-2.0 * r2 / wz2);
  Vec3 g;
  g.x() = I * (-4.0 * p.x() / wz2);
  g.y() = I * (-4.0 * p.y() / wz2);
  // d/dz acts on both the 1/w^2(z) prefactor and the exponent.
  const double dwz2_dz = 2.0 * waist * waist * u / zr;
  g.z() = I * dwz2_dz * (2.0 * r2 / (wz2 * wz2) - 1.0 / wz2);
  return g;
}

double ToneField::axial_modulation_factor(double z) const {
  if (backscatter_fraction == 0.0) return 1.0;
  const double k = kTwoPi / wavelength;
  return 1.0 + 2.0 * std::sqrt(backscatter_fraction) * std::cos(2.0 * k * z);
}

void CavityParams::validate() const {
  if (circumference <= 0) throw std::invalid_argument("circumference must be > 0");
  for (const auto& m : modes)
    if (m.finesse <= 1) throw std::invalid_argument("finesse must exceed 1");
}

const CavityMode& CavityParams::mode(double wavelength, char polarization) const {
  for (const auto& m : modes)
    if (std::abs(m.wavelength - wavelength) < 5e-9 && m.polarization == polarization)
      return m;
  throw std::invalid_argument("no such cavity mode");
}

CavityParams CavityParams::nominal() {
  CavityParams c;
  c.circumference = 0.0984;
  c.coupling_g = kTwoPi * 85e3;
  c.modes = {
      {780e-9, 's', 39e3, 111e-6, kTwoPi * 85e3},
      {780e-9, 'p', 2.2e3, 111e-6, kTwoPi * 1.39e6},
      {1560e-9, 's', 103e3, 157e-6, kTwoPi * 30e3},
      {1560e-9, 'p', 30e3, 157e-6, std::nullopt},
      {1527e-9, 'p', 30e3, 155e-6, std::nullopt},
  };
  return c;
}

double free_spectral_range(const CavityParams& cavity) {
  cavity.validate();
  return kSpeedOfLight / cavity.circumference;
}

double linewidth_from_finesse(const CavityParams& cavity, const CavityMode& mode) {
  if (mode.finesse <= 1) throw std::invalid_argument("finesse must exceed 1");
  return kTwoPi * free_spectral_range(cavity) / mode.finesse;
}

double backscatter_modulation(double backscatter_fraction) {
  if (backscatter_fraction < 0 || backscatter_fraction >= 1)
    throw std::invalid_argument("back-scatter fraction must lie in [0, 1)");
  return 2.0 * std::sqrt(backscatter_fraction);
}

double ground_potential(const AtomicData& data, const std::vector<ToneField>& tones,
                        const Vec3& point, const GravityConfig& gravity) {
  double u = 0.0;
  for (const auto& tone : tones) {
    const double alpha =
        data.scalar_polarizability(LevelId(Level::S5_1_2), tone.wavelength);
    u -= alpha * tone.intensity(point) / (2.0 * data.constants().eps0c);
  }
  if (gravity.enabled)
    u -= data.constants().mass * kGravity * gravity.pull.dot(point);
  return u;
}

Vec3 ground_potential_gradient(const AtomicData& data,
                               const std::vector<ToneField>& tones, const Vec3& point,
                               const GravityConfig& gravity) {
  Vec3 g = Vec3::Zero();
  for (const auto& tone : tones) {
    const double alpha =
        data.scalar_polarizability(LevelId(Level::S5_1_2), tone.wavelength);
    g -= alpha / (2.0 * data.constants().eps0c) * tone.intensity_gradient(point);
  }
  if (gravity.enabled) g -= data.constants().mass * kGravity * gravity.pull;
  return g;
}

namespace {

// Characteristic transverse/longitudinal length scales of the tone set.
void trap_scales(const std::vector<ToneField>& tones, double& wmin, double& zrmin) {
  wmin = 1.0;
  zrmin = 1.0;
  for (const auto& t : tones) {
    if (t.power <= 0) continue;
    wmin = std::min(wmin, t.waist);
    zrmin = std::min(zrmin, t.rayleigh_range());
  }
}

}  // namespace

TrapShape trap_shape(const AtomicData& data, const std::vector<ToneField>& tones,
                     const GravityConfig& gravity) {
  for (const auto& t : tones) t.validate();
  double wmin, zrmin;
  trap_scales(tones, wmin, zrmin);

  auto U = [&](const Vec3& p) { return ground_potential(data, tones, p, gravity); };

  // Gradient-descent polish from the focus; the minimum only moves along
  // the gravity axis for this geometry, but the full 3D step is cheap.
  Vec3 x = Vec3::Zero();
  for (int iter = 0; iter < 200; ++iter) {
    const Vec3 g = ground_potential_gradient(data, tones, x, gravity);
    Vec3 h(wmin, wmin, zrmin);
    // crude diagonal preconditioner from the harmonic scales
    Vec3 step;
    for (int i = 0; i < 3; ++i) {
      const double curv = std::abs(U(Vec3::Zero())) * 4.0 / (h[i] * h[i]) + 1e-300;
      step[i] = -g[i] / curv;
      step[i] = std::clamp(step[i], -h[i] / 4.0, h[i] / 4.0);
    }
    x += step;
    if (step.norm() < 1e-12) break;
  }
  const double u_min = U(x);
  if (u_min >= 0.0)
    throw NotTrappingError("potential is not attractive at the focus");
  if (x.head<2>().norm() > 5 * wmin || std::abs(x.z()) > 5 * zrmin)
    throw NotTrappingError("potential minimum ran to the boundary");

  // Numerical Hessian, central differences with per-axis steps.
  Eigen::Matrix3d H;
  const Vec3 h(wmin / 50.0, wmin / 50.0, zrmin / 50.0);
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) {
      Vec3 ei = Vec3::Zero(), ej = Vec3::Zero();
      ei[i] = h[i];
      ej[j] = h[j];
      const double v = (U(x + ei + ej) - U(x + ei - ej) - U(x - ei + ej) +
                        U(x - ei - ej)) /
                       (4.0 * h[i] * h[j]);
      H(i, j) = v;
      H(j, i) = v;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(H);
  if (es.eigenvalues().minCoeff() < 0)
    throw NotTrappingError("Hessian not positive semidefinite at the minimum");

  TrapShape shape;
  shape.minimum = x;
  shape.depth_optical = -ground_potential(data, tones, x, GravityConfig{});
  for (int i = 0; i < 3; ++i)
    shape.frequencies_Hz[i] =
        std::sqrt(H(i, i) / data.constants().mass) / kTwoPi;

  if (gravity.enabled) {
    // Barrier along the pull direction sets the effective depth.
    double barrier = u_min;
    for (int i = 1; i <= 4000; ++i) {
      const double t = i * (6.0 * wmin) / 4000.0;
      barrier = std::max(barrier, U(x + t * gravity.pull));
    }
    shape.depth_effective = barrier - u_min;
  } else {
    shape.depth_effective = shape.depth_optical;
  }
  return shape;
}

}  // namespace cavsim
