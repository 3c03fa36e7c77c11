#include "cavsim/lightshift.hpp"

#include <algorithm>
#include <cmath>

namespace cavsim {

double LevelShiftResult::full_spread_Hz() const {
  if (sublevel_shifts_Hz.empty()) return 0.0;
  const auto [lo, hi] =
      std::minmax_element(sublevel_shifts_Hz.begin(), sublevel_shifts_Hz.end());
  return *hi - *lo;
}

double ShiftSpectrum::total_weight() const {
  double s = 0.0;
  for (double w : weight) s += w;
  return s;
}

LevelShiftResult level_shift(const AtomicData& data, const LevelId& level,
                             const std::vector<ToneField>& tones, const Vec3& point) {
  LevelShiftResult r;
  r.level = level;
  r.position = point;
  for (const auto& tone : tones) {
    const double alpha = data.scalar_polarizability(level, tone.wavelength);
    r.scalar_shift -= alpha * tone.intensity(point) / (2.0 * data.constants().eps0c);
  }
  r.scalar_shift_Hz = J_to_Hz(r.scalar_shift);
  return r;
}

double differential_shift_Hz(const AtomicData& data,
                             const std::vector<ToneField>& tones, const Vec3& point) {
  const auto excited = level_shift(data, LevelId(Level::P5_3_2), tones, point);
  const auto ground = level_shift(data, LevelId(Level::S5_1_2), tones, point);
  return excited.scalar_shift_Hz - ground.scalar_shift_Hz;
}

ToneField solve_compensation(const AtomicData& data, const ToneField& trap_tone,
                             double comp_wavelength, double comp_waist,
                             double rel_tol) {
  trap_tone.validate();
  ToneField comp;
  comp.wavelength = comp_wavelength;
  comp.waist = comp_waist;
  comp.propagation_sign = -trap_tone.propagation_sign;
  // Orthogonal linear polarizations for the two tones.
  comp.polarization = (std::abs(trap_tone.polarization.dot(Vec3::UnitX())) < 0.9)
                          ? trap_tone.polarization.cross(Vec3::UnitZ()).normalized()
                          : Vec3::UnitY();
  if (trap_tone.power == 0.0) {
    comp.power = 0.0;
    return comp;
  }

  const LevelId excited(Level::P5_3_2);
  const double shift0 =
      level_shift(data, excited, {trap_tone}, Vec3::Zero()).scalar_shift;
  auto residual = [&](double p) {
    comp.power = p;
    return level_shift(data, excited, {trap_tone, comp}, Vec3::Zero()).scalar_shift;
  };

  // Bracket and bisect; the residual is linear in power, so this converges
  // fast regardless of the polarizability magnitudes involved.
  double lo = 0.0, hi = trap_tone.power;
  while (residual(hi) * shift0 > 0) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (residual(mid) * shift0 > 0)
      lo = mid;
    else
      hi = mid;
    if ((hi - lo) < rel_tol * std::max(hi, 1e-12)) break;
  }
  comp.power = 0.5 * (lo + hi);
  return comp;
}

namespace {

// Angular momentum matrices for total F, z-quantized, m = -F..F ordering.
void f_matrices(int F, Eigen::MatrixXd& Fx, Eigen::MatrixXd& Fy_i,
                Eigen::MatrixXd& Fz) {
  const int dim = 2 * F + 1;
  Fx = Eigen::MatrixXd::Zero(dim, dim);
  Fy_i = Eigen::MatrixXd::Zero(dim, dim);  // i*Fy, real
  Fz = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    const double m = -F + i;
    Fz(i, i) = m;
    if (i + 1 < dim) {
      const double c = 0.5 * std::sqrt(F * (F + 1.0) - m * (m + 1.0));
      Fx(i + 1, i) = c;
      Fx(i, i + 1) = c;
      Fy_i(i + 1, i) = c;   // i*Fy = (F+ - F-)/2 in this real representation
      Fy_i(i, i + 1) = -c;
    }
  }
}

// Tensor operator [3 (F.e)^2 - F^2] / (F(2F-1)) quantized along a linear
// polarization axis e. Hermitian by construction.
Eigen::MatrixXcd tensor_operator_c(int F, const Vec3& axis) {
  Eigen::MatrixXd Fx, Fy_i, Fz;
  f_matrices(F, Fx, Fy_i, Fz);
  const int dim = 2 * F + 1;
  Eigen::MatrixXcd Fc = Eigen::MatrixXcd::Zero(dim, dim);
  Fc += axis.x() * Fx;
  Fc += std::complex<double>(0, -1) * axis.y() * Fy_i;
  Fc += axis.z() * Fz;
  Eigen::MatrixXcd t = 3.0 * (Fc * Fc);
  for (int i = 0; i < dim; ++i) t(i, i) -= F * (F + 1.0);
  t /= F * (2.0 * F - 1.0);
  return t;
}

}  // namespace

LevelShiftResult sublevel_shifts(const AtomicData& data, int F_prime,
                                 const std::vector<ToneField>& tones,
                                 const Vec3& point) {
  const LevelId level(Level::P5_3_2, F_prime);
  const int dim = 2 * F_prime + 1;
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(dim, dim);
  double scalar_total = 0.0;
  for (const auto& tone : tones) {
    const double I = tone.intensity(point);
    const double pref = -I / (2.0 * data.constants().eps0c);
    const double a_s = data.scalar_polarizability(level, tone.wavelength);
    const double a_t = data.tensor_polarizability(level, tone.wavelength);
    scalar_total += pref * a_s;
    H += pref * a_t * tensor_operator_c(F_prime, tone.polarization);
  }
  for (int i = 0; i < dim; ++i) H(i, i) += scalar_total;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  LevelShiftResult r;
  r.level = level;
  r.position = point;
  r.scalar_shift = scalar_total;
  r.scalar_shift_Hz = J_to_Hz(scalar_total);
  for (int i = 0; i < dim; ++i) {
    r.sublevel_shifts.push_back(es.eigenvalues()[i]);
    r.sublevel_shifts_Hz.push_back(J_to_Hz(es.eigenvalues()[i]));
  }
  return r;
}

std::vector<Vec3> sample_boltzmann(const AtomicData& data,
                                   const std::vector<ToneField>& tones,
                                   double temperature_K, std::size_t n,
                                   std::mt19937_64& rng,
                                   double axial_halfwidth, double energy_cut) {
  if (n == 0) return {};
  const double kT = data.constants().k_B * temperature_K;
  auto U = [&](const Vec3& p) { return ground_potential(data, tones, p); };

  if (temperature_K <= 0.0) return std::vector<Vec3>(n, Vec3::Zero());

  // Harmonic-scale Metropolis walk in the full potential, confined to the
  // bound region (see the header note on normalizability).
  const auto shape = trap_shape(data, tones);
  const double u_min = U(shape.minimum);
  const double u_max = u_min + energy_cut * shape.depth_optical;
  Vec3 sigma;
  for (int i = 0; i < 3; ++i) {
    const double omega = kTwoPi * shape.frequencies_Hz[i];
    sigma[i] = std::sqrt(kT / data.constants().mass) / omega;
  }
  sigma[2] = std::min(sigma[2], 0.5 * axial_halfwidth);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Vec3 x = shape.minimum;
  double ux = u_min;
  std::vector<Vec3> out;
  out.reserve(n);
  const int burn = 200, thin = 10;
  for (int step = 0; out.size() < n; ++step) {
    Vec3 trial = x;
    for (int i = 0; i < 3; ++i) trial[i] += sigma[i] * gauss(rng);
    const bool inside =
        std::abs(trial.z() - shape.minimum.z()) <= axial_halfwidth;
    const double ut = inside ? U(trial) : u_max + kT;
    if (ut <= u_max && (ut <= ux || uni(rng) < std::exp(-(ut - ux) / kT))) {
      x = trial;
      ux = ut;
    }
    if (step >= burn && step % thin == 0) out.push_back(x);
  }
  return out;
}

ShiftSpectrum synthesize_spectrum(const AtomicData& data,
                                  const std::vector<ToneField>& tones,
                                  const std::vector<Vec3>& sample,
                                  const SpectrumOptions& opt) {
  if (sample.empty()) throw EmptySampleError("spectrum sample is empty");

  // Collect one line per atom (scalar) or one per excited sublevel: the
  // probe couples F=2 to every F'=3 Stark eigenstate.
  std::vector<double> lines;
  std::vector<double> line_weights;
  for (const auto& p : sample) {
    const double ground = level_shift(data, LevelId(Level::S5_1_2), tones, p).scalar_shift_Hz;
    if (opt.include_tensor) {
      const auto exc = sublevel_shifts(data, opt.tensor_F_prime, tones, p);
      const double w = 1.0 / exc.sublevel_shifts_Hz.size();
      for (double e : exc.sublevel_shifts_Hz) {
        lines.push_back(e - ground);
        line_weights.push_back(w);
      }
    } else {
      lines.push_back(differential_shift_Hz(data, tones, p));
      line_weights.push_back(1.0);
    }
  }

  const auto [lo_it, hi_it] = std::minmax_element(lines.begin(), lines.end());
  const double lo = *lo_it - opt.pad_Hz, hi = *hi_it + opt.pad_Hz;
  ShiftSpectrum spec;
  spec.probe_linewidth_Hz = opt.probe_linewidth_Hz;
  for (const auto& t : tones) spec.tone_powers_W.push_back(t.power);
  spec.detuning_Hz.resize(opt.bins);
  spec.weight.assign(opt.bins, 0.0);
  const double dx = (hi - lo) / (opt.bins - 1);
  for (std::size_t i = 0; i < opt.bins; ++i) spec.detuning_Hz[i] = lo + dx * i;

  // Lorentzian response of the probe around each line, normalized per line.
  const double hwhm = 0.5 * opt.probe_linewidth_Hz;
  for (std::size_t l = 0; l < lines.size(); ++l) {
    double norm = 0.0;
    std::vector<double> contrib(opt.bins);
    for (std::size_t i = 0; i < opt.bins; ++i) {
      const double d = spec.detuning_Hz[i] - lines[l];
      contrib[i] = 1.0 / (1.0 + (d / hwhm) * (d / hwhm));
      norm += contrib[i];
    }
    for (std::size_t i = 0; i < opt.bins; ++i)
      spec.weight[i] += line_weights[l] * contrib[i] / norm;
  }
  return spec;
}

}  // namespace cavsim
