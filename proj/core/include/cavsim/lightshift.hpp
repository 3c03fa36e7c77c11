#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "cavsim/trap_optics.hpp"

namespace cavsim {

// Per-level light shift at a point; per-sublevel entries filled when the
// tensor part was requested.
struct LevelShiftResult {
  LevelId level;
  Vec3 position = Vec3::Zero();
  double scalar_shift = 0.0;          // J
  double scalar_shift_Hz = 0.0;
  std::vector<double> sublevel_shifts;     // J, length 2F+1, ordered
  std::vector<double> sublevel_shifts_Hz;

  double full_spread_Hz() const;
};

struct ShiftSpectrum {
  std::vector<double> detuning_Hz;  // strictly increasing grid
  std::vector<double> weight;       // fluorescence weight per bin, >= 0
  // metadata
  std::vector<double> tone_powers_W;
  double temperature_K = 0.0;
  double probe_linewidth_Hz = 0.0;

  double total_weight() const;
};

struct EmptySampleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Scalar light shift of a level from the tone set; Hz via Planck.
LevelShiftResult level_shift(const AtomicData& data, const LevelId& level,
                             const std::vector<ToneField>& tones, const Vec3& point);

// Cooling-transition shift (5P3/2 minus 5S1/2) in Hz. Positive = the
// transition moves up, so a fixed laser is effectively more red-detuned.
double differential_shift_Hz(const AtomicData& data,
                             const std::vector<ToneField>& tones, const Vec3& point);

// 1527-nm tone whose focal intensity zeroes the 5P3/2 scalar shift at the
// focus of the given 1560-nm trap tone.
ToneField solve_compensation(const AtomicData& data, const ToneField& trap_tone,
                             double comp_wavelength = 1527e-9,
                             double comp_waist = 155e-6,
                             double rel_tol = 1e-6);

// Eigenvalues of the (2F'+1)-dimensional Stark operator for a 5P3/2
// hyperfine level, scalar plus per-tone tensor parts quantized along each
// tone's polarization axis.
LevelShiftResult sublevel_shifts(const AtomicData& data, int F_prime,
                                 const std::vector<ToneField>& tones,
                                 const Vec3& point);

// Positions drawn from a truncated Boltzmann distribution in the ground
// potential. The full distribution in a finite-depth trap is not
// normalizable, so the walk is restricted to the bound region (potential
// below energy_cut x depth above the minimum) and to |z| <= axial_halfwidth,
// the capture region of the slow longitudinal axis.
std::vector<Vec3> sample_boltzmann(const AtomicData& data,
                                   const std::vector<ToneField>& tones,
                                   double temperature_K, std::size_t n,
                                   std::mt19937_64& rng,
                                   double axial_halfwidth = 500e-6,
                                   double energy_cut = 0.85);

struct SpectrumOptions {
  double probe_linewidth_Hz = 10e6;  // FWHM
  bool include_tensor = true;        // one line per F'=3 sublevel per atom
  int tensor_F_prime = 3;
  std::size_t bins = 600;
  double pad_Hz = 40e6;  // grid margin beyond the shift range
};

// Histogram of per-atom differential shifts convolved with a Lorentzian of
// the probe width. Integrated weight equals the sample size.
ShiftSpectrum synthesize_spectrum(const AtomicData& data,
                                  const std::vector<ToneField>& tones,
                                  const std::vector<Vec3>& sample,
                                  const SpectrumOptions& opt = {});

}  // namespace cavsim
