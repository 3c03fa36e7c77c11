#include "cavsim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "cavsim/lightshift.hpp"

namespace cavsim {

namespace {

constexpr double kMuBOverHbar = 8.79410066e10;     // rad/s per T, g-factor ~1
constexpr double kExcitedHyperfineGap = 266.65e6;  // F'=3 to F'=2, Hz

double sq(double x) { return x * x; }

}  // namespace

std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t stream) {
  // splitmix64 over the combined words
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void CoolingConfig::validate() const {
  if (beam_intensity < 0 || repump_intensity < 0)
    throw std::invalid_argument("beam intensities must be >= 0");
  if (capture_radius <= 0)
    throw std::invalid_argument("capture radius must be > 0");
  if (pgc_floor_K < 0 || pgc_rate < 0)
    throw std::invalid_argument("sub-Doppler parameters must be >= 0");
}

void SourceConfig::validate() const {
  if (rate < 0) throw std::invalid_argument("source rate must be >= 0");
  if (temperature <= 0) throw std::invalid_argument("source temperature must be > 0");
  if (ring_radius <= 0) throw std::invalid_argument("ring radius must be > 0");
}

void RunConfig::validate() const {
  trap_tone.validate();
  comp_tone.validate();
  cooling.validate();
  source.validate();
  if (dt <= 0 || duration < 0) throw std::invalid_argument("bad timing");
  if (scale <= 0) throw std::invalid_argument("scale must be > 0");
  if (sample_interval <= 0) throw std::invalid_argument("bad sample interval");
}

double PowerSchedule::at(double t) const {
  if (knots.empty()) return 0.0;
  if (t <= knots.front().first) return knots.front().second;
  if (t >= knots.back().first) return knots.back().second;
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (t <= knots[i].first) {
      const auto& [t0, p0] = knots[i - 1];
      const auto& [t1, p1] = knots[i];
      return p0 + (p1 - p0) * (t - t0) / (t1 - t0);
    }
  }
  return knots.back().second;
}

Engine::Engine(const AtomicData& data, RunConfig config)
    : data_(data), config_(std::move(config)) {
  config_.validate();
  tones_ = {config_.trap_tone, config_.comp_tone};
  inject_rng_.seed(derive_stream_seed(config_.seed, 0));
  refresh_tones();
}

void Engine::refresh_tones() {
  tones_[0].power = config_.trap_schedule.at(time_);
  tones_[1].power = config_.comp_schedule.at(time_);
  try {
    const TrapShape shape = trap_shape(data_, tones_, config_.gravity);
    trap_minimum_ = shape.minimum;
    escape_energy_ =
        ground_potential(data_, tones_, shape.minimum, config_.gravity) +
        shape.depth_effective;
    max_trap_freq_ = shape.frequencies_Hz.maxCoeff();
  } catch (const NotTrappingError&) {
    trap_minimum_ = Vec3::Zero();
    escape_energy_ = -1e300;  // nothing qualifies as trapped
    max_trap_freq_ = 0.0;
  }
}

double Engine::differential_shift_Hz_at(const Vec3& p) const {
  return differential_shift_Hz(data_, tones_, p);
}

std::vector<Atom> Engine::inject(double dt) {
  std::vector<Atom> out;
  const double mean = config_.source.rate / config_.scale * dt;
  if (mean <= 0) return out;
  std::poisson_distribution<int> pois(mean);
  const int n = pois(inject_rng_);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double sigma_v =
      std::sqrt(data_.constants().k_B * config_.source.temperature /
                data_.constants().mass);
  for (int i = 0; i < n; ++i) {
    Atom a;
    a.rng_id = next_id_++;
    a.rng.seed(derive_stream_seed(config_.seed, a.rng_id));
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double phi = kTwoPi * uni(a.rng);
    a.position = config_.source.center +
                 Vec3(config_.source.ring_radius * std::cos(phi),
                      config_.source.ring_radius * std::sin(phi),
                      0.5 * config_.source.ring_radius * gauss(a.rng));
    a.velocity = Vec3(sigma_v * gauss(a.rng), sigma_v * gauss(a.rng),
                      sigma_v * gauss(a.rng));
    a.dark = false;
    out.push_back(std::move(a));
  }
  return out;
}

ForceResult Engine::force(const Atom& atom) const {
  ForceResult res;
  const AtomicConstants& c = data_.constants();

  // Dipole force and differential shift from one intensity pass per tone.
  double diff_shift_Hz = 0.0;
  for (const auto& tone : tones_) {
    const double a_g =
        data_.scalar_polarizability(LevelId(Level::S5_1_2), tone.wavelength);
    const double a_e =
        data_.scalar_polarizability(LevelId(Level::P5_3_2), tone.wavelength);
    const Vec3 gi = tone.intensity_gradient(atom.position);
    const double I = tone.intensity(atom.position);
    res.force += a_g / (2.0 * c.eps0c) * gi;
    diff_shift_Hz += (a_g - a_e) * I / (2.0 * c.eps0c * kPlanck);
  }
  if (config_.gravity.enabled)
    res.force += c.mass * kGravity * config_.gravity.pull;

  res.delta_eff = c.gamma * config_.cooling.detuning_gamma - kTwoPi * diff_shift_Hz;
  if (atom.dark) return res;  // isolated from the cooling light

  const CoolingConfig& cool = config_.cooling;
  const double s = cool.beam_intensity / c.saturation_intensity;
  if (s > 0) {
    const double s_tot = 6.0 * s;
    const double k = kTwoPi / c.d2_wavelength;
    const double gamma = c.gamma;
    double r_sum = 0.0;
    for (int axis = 0; axis < 3; ++axis) {
      double zeeman = 0.0;
      if (cool.gradient_on)
        zeeman = kMuBOverHbar * cool.gradient_T_per_m *
                 (atom.position[axis] - cool.mot_center[axis]);
      const double dp = res.delta_eff - k * atom.velocity[axis] - zeeman;
      const double dm = res.delta_eff + k * atom.velocity[axis] + zeeman;
      const double rp = 0.5 * gamma * s / (1.0 + s_tot + sq(2.0 * dp / gamma));
      const double rm = 0.5 * gamma * s / (1.0 + s_tot + sq(2.0 * dm / gamma));
      res.force[axis] += kHbar * k * (rp - rm);
      r_sum += rp + rm;
    }
    res.scatter_rate = r_sum;
    res.diffusion += kHbar * kHbar * k * k * r_sum / 3.0;

    // Position-dependent polarization-gradient stage: engages only where
    // the light shift has pushed the effective detuning deep to the red.
    if (res.delta_eff < 0 &&
        -res.delta_eff > cool.pgc_threshold_gamma * gamma && cool.pgc_rate > 0) {
      const double roll =
          1.0 / (1.0 + sq(atom.velocity.norm() / cool.pgc_velocity_cutoff));
      const double t_eq = std::max(
          cool.pgc_floor_K, cool.pgc_temperature_coeff * kHbar * gamma * gamma *
                                s_tot / (4.0 * -res.delta_eff * c.k_B));
      res.force += -c.mass * cool.pgc_rate * roll * atom.velocity;
      res.diffusion += c.mass * cool.pgc_rate * roll * c.k_B * t_eq;
    }
  }
  return res;
}

void Engine::pump(Atom& atom, double dt) const {
  const AtomicConstants& c = data_.constants();
  const CoolingConfig& cool = config_.cooling;
  const double diff_Hz = differential_shift_Hz_at(atom.position);
  const double delta_eff =
      c.gamma * cool.detuning_gamma - kTwoPi * diff_Hz;
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  if (!atom.dark) {
    // off-resonant excitation to the lower excited hyperfine level, which
    // decays to F=1 half the time
    const double s_tot = 6.0 * cool.beam_intensity / c.saturation_intensity;
    if (s_tot > 0) {
      const double d_dep = delta_eff - kTwoPi * kExcitedHyperfineGap;
      const double r = 0.5 * 0.5 * c.gamma * s_tot /
                       (1.0 + s_tot + sq(2.0 * d_dep / c.gamma));
      if (uni(atom.rng) < -std::expm1(-r * dt)) atom.dark = true;
    }
  } else {
    const double s_rep = cool.repump_intensity / c.saturation_intensity;
    if (s_rep > 0) {
      const double d_rep =
          kTwoPi * (cool.repump_detuning_Hz - diff_Hz);
      const double r = (2.0 / 3.0) * 0.5 * c.gamma * s_rep /
                       (1.0 + s_rep + sq(2.0 * d_rep / c.gamma));
      if (uni(atom.rng) < -std::expm1(-r * dt)) atom.dark = false;
    }
  }
}

AtomStatus Engine::classify(const Atom& atom) const {
  const Vec3 d = atom.position - trap_minimum_;
  if (d.norm() < config_.cooling.capture_radius) {
    const double e = 0.5 * data_.constants().mass * atom.velocity.squaredNorm() +
                     ground_potential(data_, tones_, atom.position, config_.gravity);
    if (e < escape_energy_) return AtomStatus::Trapped;
  }
  return AtomStatus::Transiting;
}

void Engine::step(std::vector<Atom>& atoms, double dt) {
  if (max_trap_freq_ > 0 && dt > 1.0 / (50.0 * max_trap_freq_))
    throw TimestepError("dt exceeds 1/(50 f_max) for the current trap");
  const double mass = data_.constants().mass;

  auto advance = [&](Atom& a) {
    const ForceResult f1 = force(a);
    const Vec3 v_half = a.velocity + f1.force / mass * (0.5 * dt);
    a.position += v_half * dt;
    Atom probe = a;  // force at the new position with the half-step velocity
    probe.velocity = v_half;
    const ForceResult f2 = force(probe);
    a.velocity = v_half + f2.force / mass * (0.5 * dt);
    if (f2.diffusion > 0) {
      std::normal_distribution<double> gauss(0.0, 1.0);
      const double sv = std::sqrt(2.0 * f2.diffusion * dt) / mass;
      a.velocity += Vec3(sv * gauss(a.rng), sv * gauss(a.rng), sv * gauss(a.rng));
    }
    a.scattered_photons += f2.scatter_rate * dt;
    pump(a, dt);
  };

  const int nthreads = std::max(1, config_.threads);
  if (nthreads == 1 || atoms.size() < 64) {
    for (auto& a : atoms) advance(a);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (atoms.size() + nthreads - 1) / nthreads;
    for (int t = 0; t < nthreads; ++t) {
      const std::size_t lo = t * chunk;
      const std::size_t hi = std::min(atoms.size(), lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back([&, lo, hi] {
        for (std::size_t i = lo; i < hi; ++i) advance(atoms[i]);
      });
    }
    for (auto& th : pool) th.join();
  }

  // departures: simulation boundary and the one-body loss channel
  std::erase_if(atoms, [&](Atom& a) {
    if (a.position.head<2>().norm() > config_.sim_radius ||
        std::abs(a.position.z()) > config_.sim_half_length) {
      ++departed_count_;
      return true;
    }
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    if (config_.loss_rate > 0 && uni(a.rng) < config_.loss_rate * dt) {
      ++departed_count_;
      return true;
    }
    return false;
  });
  time_ += dt;
}

RunResult Engine::run() { return run({}); }

RunResult Engine::run(std::vector<Atom> atoms) {
  RunResult out;
  if (config_.duration <= 0) {
    out.atoms = std::move(atoms);
    for (const auto& a : out.atoms) out.status.push_back(classify(a));
    return out;
  }

  const auto record = [&]() {
    EnsembleTrace& tr = out.trace;
    tr.times.push_back(time_);
    double n_trap = 0, n_transit = 0, n_f1 = 0;
    Vec3 vsum = Vec3::Zero(), v2sum = Vec3::Zero();
    std::vector<Vec3> mode_pos;
    std::vector<bool> mode_f2;
    for (const auto& a : atoms) {
      const AtomStatus st = classify(a);
      if (st == AtomStatus::Trapped) {
        n_trap += 1;
        if (a.dark) n_f1 += 1;
        vsum += a.velocity;
        v2sum += a.velocity.cwiseProduct(a.velocity);
      } else {
        n_transit += 1;
      }
      mode_pos.push_back(a.position);
      mode_f2.push_back(!a.dark);
    }
    tr.trapped.push_back(n_trap * config_.scale);
    tr.transiting.push_back(n_transit * config_.scale);
    tr.departed.push_back(departed_count_ * config_.scale);
    Vec3 temp = Vec3::Zero();
    if (n_trap > 1) {
      const Vec3 mean = vsum / n_trap;
      const Vec3 var = v2sum / n_trap - mean.cwiseProduct(mean);
      temp = data_.constants().mass / data_.constants().k_B * var;
    }
    tr.temperature_K.push_back(temp);
    tr.f1_fraction.push_back(n_trap > 0 ? n_f1 / n_trap : 0.0);
    const SpinSummary spins =
        weigh_ensemble(config_.dispersive, 780e-9, mode_pos, mode_f2, config_.scale);
    tr.cavity_shift_Hz.push_back(cavity_shift_Hz(spins, config_.dispersive));
  };

  const double t_end = time_ + config_.duration;
  double next_sample = time_;
  double p_trap = tones_[0].power, p_comp = tones_[1].power;
  while (time_ < t_end - 0.5 * config_.dt) {
    if (time_ >= next_sample - 0.5 * config_.dt) {
      record();
      next_sample += config_.sample_interval;
    }
    // track the schedules; re-derive the escape threshold on power changes
    const double pt = config_.trap_schedule.at(time_);
    const double pc = config_.comp_schedule.at(time_);
    if (std::abs(pt - p_trap) > 1e-3 * std::max(1.0, p_trap) ||
        std::abs(pc - p_comp) > 1e-3 * std::max(1.0, p_comp)) {
      refresh_tones();
      p_trap = pt;
      p_comp = pc;
    } else {
      tones_[0].power = pt;
      tones_[1].power = pc;
    }
    auto born = inject(config_.dt);
    for (auto& a : born) atoms.push_back(std::move(a));
    step(atoms, config_.dt);
  }
  record();

  out.atoms = std::move(atoms);
  for (const auto& a : out.atoms) out.status.push_back(classify(a));
  return out;
}

RunResult run_accumulation(const AtomicData& data, const RunConfig& config) {
  Engine engine(data, config);
  return engine.run();
}

RunResult run_molasses(const AtomicData& data, RunConfig config,
                       std::vector<Atom> initial, double duration) {
  config.duration = duration;
  config.source.rate = 0.0;
  config.cooling.gradient_on = false;
  config.cooling.detuning_gamma = -20.0;
  config.cooling.beam_intensity = 8.0;       // 0.8 mW/cm^2
  config.comp_schedule = PowerSchedule::constant(2.8);
  Engine engine(data, config);
  return engine.run(std::move(initial));
}

RunResult run_ramp_protocol(const AtomicData& data, RunConfig config,
                            double hold_power, double final_power,
                            double ramp_time) {
  const double t_ramp = std::max(0.0, config.duration - ramp_time);
  config.comp_schedule.knots = {{0.0, hold_power},
                                {t_ramp, hold_power},
                                {config.duration, final_power}};
  Engine engine(data, config);
  return engine.run();
}

}  // namespace cavsim
