#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "cavsim/atomic_data.hpp"
#include "cavsim/readout.hpp"
#include "cavsim/trap_optics.hpp"

namespace cavsim {

enum class AtomStatus { Trapped, Transiting, Departed };

// One simulated macro-atom trajectory.
struct Atom {
  Vec3 position = Vec3::Zero();   // m
  Vec3 velocity = Vec3::Zero();   // m/s
  bool dark = false;              // F=1 (dark) vs F=2 (bright)
  double scattered_photons = 0.0; // expected cumulative count
  std::uint64_t rng_id = 0;
  std::mt19937_64 rng;            // private stream, derived from (seed, rng_id)
};

struct CoolingConfig {
  double detuning_gamma = -2.5;      // cooling-beam detuning, units of Gamma
  double beam_intensity = 100.0;     // per beam, W/m^2 (10 mW/cm^2)
  double repump_intensity = 3.6;     // W/m^2 (360 uW/cm^2)
  double repump_detuning_Hz = 0.0;
  bool gradient_on = true;
  double gradient_T_per_m = 0.10;    // 10 G/cm
  Vec3 mot_center = Vec3::Zero();
  double capture_radius = 1.0e-3;    // m, trapped-classification region

  // Phenomenological sub-Doppler (Sisyphus) stage
  double pgc_threshold_gamma = 4.0;  // engages once |delta_eff| exceeds this
  double pgc_rate = 1.0e4;           // friction rate beta/m, 1/s
  double pgc_temperature_coeff = 0.1;
  double pgc_floor_K = 3e-6;
  double pgc_velocity_cutoff = 1.0;  // m/s

  void validate() const;
};

struct SourceConfig {
  double rate = 6e7;            // physical atoms/s
  double temperature = 300e-6;  // K
  double ring_radius = 500e-6;  // injection ring, MOT 1/e^2 radius
  Vec3 center = Vec3::Zero();   // ring center (MOT center)

  void validate() const;
};

struct EnsembleTrace {
  std::vector<double> times;            // s
  std::vector<double> trapped;          // physical atom counts
  std::vector<double> transiting;
  std::vector<double> departed;
  std::vector<Vec3> temperature_K;      // per axis, of trapped atoms
  std::vector<double> f1_fraction;      // of trapped atoms
  std::vector<double> cavity_shift_Hz;  // all atoms in the mode
};

// Piecewise-linear power schedule; constant extrapolation outside the knots.
struct PowerSchedule {
  std::vector<std::pair<double, double>> knots;  // (t_s, P_W)
  double at(double t) const;
  static PowerSchedule constant(double p) { return {{{0.0, p}}}; }
};

struct RunConfig {
  ToneField trap_tone;   // power taken from trap_schedule
  ToneField comp_tone;
  PowerSchedule trap_schedule = PowerSchedule::constant(36.0);
  PowerSchedule comp_schedule = PowerSchedule::constant(5.2);
  CoolingConfig cooling;
  SourceConfig source;
  GravityConfig gravity;
  DispersiveParams dispersive;
  double duration = 0.55;        // s
  double dt = 5e-6;              // s
  double sample_interval = 5e-3; // s
  double scale = 1e4;            // physical atoms per macro-atom
  double loss_rate = 1.0 / 5.4;  // one-body, 1/s
  double sim_radius = 3e-3;      // transverse departure boundary, m
  double sim_half_length = 5e-3; // |z| boundary, m
  std::uint64_t seed = 1;
  int threads = 1;

  void validate() const;
};

struct ForceResult {
  Vec3 force = Vec3::Zero();     // N
  double diffusion = 0.0;        // momentum diffusion per axis, kg^2 m^2 / s^3
  double scatter_rate = 0.0;     // photons/s
  double delta_eff = 0.0;        // effective cooling detuning, rad/s
};

struct TimestepError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunResult {
  EnsembleTrace trace;
  std::vector<Atom> atoms;       // alive at the end, status per classify()
  std::vector<AtomStatus> status;
};

// Monte-Carlo engine; owns nothing but the configuration references.
class Engine {
 public:
  Engine(const AtomicData& data, RunConfig config);

  // Poisson-injects macro-atoms for one interval; Maxwell-Boltzmann
  // velocities at the source temperature, positions on the injection ring.
  std::vector<Atom> inject(double dt);

  // Deterministic force + momentum diffusion for one atom under the
  // current tone powers. Dark atoms feel dipole and gravity only.
  ForceResult force(const Atom& atom) const;

  // Stochastic hyperfine transitions over dt, using the atom's own stream.
  void pump(Atom& atom, double dt) const;

  // One Langevin step for the whole ensemble; removes departed atoms.
  void step(std::vector<Atom>& atoms, double dt);

  AtomStatus classify(const Atom& atom) const;

  // Full accumulation run per the configured schedules.
  RunResult run();

  // Continue from an existing ensemble (e.g. a molasses or TOF stage).
  RunResult run(std::vector<Atom> initial);

  void set_time(double t) { time_ = t; }
  double time() const { return time_; }
  double differential_shift_Hz_at(const Vec3& p) const;
  const RunConfig& config() const { return config_; }
  std::uint64_t injected_count() const { return next_id_ - 1; }
  std::uint64_t departed_count() const { return departed_count_; }
  double escape_energy() const { return escape_energy_; }
  const Vec3& trap_minimum() const { return trap_minimum_; }

 private:
  void refresh_tones();  // apply schedules at the current time

  const AtomicData& data_;
  RunConfig config_;
  double time_ = 0.0;
  std::vector<ToneField> tones_;       // current powers
  double escape_energy_ = 0.0;         // J, absolute threshold for "trapped"
  Vec3 trap_minimum_ = Vec3::Zero();
  double max_trap_freq_ = 0.0;
  std::mt19937_64 inject_rng_;
  std::uint64_t next_id_ = 1;
  std::uint64_t departed_count_ = 0;
};

// Convenience wrappers mirroring the protocols in use.
RunResult run_accumulation(const AtomicData& data, const RunConfig& config);
RunResult run_molasses(const AtomicData& data, RunConfig config,
                       std::vector<Atom> initial, double duration = 10e-3);
RunResult run_ramp_protocol(const AtomicData& data, RunConfig config,
                            double hold_power = 2.8, double final_power = 5.2,
                            double ramp_time = 50e-3);

std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t stream);

}  // namespace cavsim
