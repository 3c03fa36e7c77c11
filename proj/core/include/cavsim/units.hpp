#pragma once

// Physical constants (CODATA 2018) and unit helpers. All quantities SI
// unless a suffix says otherwise; angular frequencies carry _rad, plain
// frequencies are Hz.

namespace cavsim {

constexpr double kSpeedOfLight = 2.99792458e8;       // m/s
constexpr double kPlanck = 6.62607015e-34;           // J s
constexpr double kHbar = 1.054571817e-34;            // J s
constexpr double kBoltzmann = 1.380649e-23;          // J/K
constexpr double kEpsilon0 = 8.8541878128e-12;       // F/m
constexpr double kEpsilon0C = kEpsilon0 * kSpeedOfLight;
constexpr double kGravity = 9.80665;                 // m/s^2
constexpr double kBohrRadius = 5.29177210903e-11;    // m
constexpr double kElementaryCharge = 1.602176634e-19;  // C
constexpr double kHartree = 4.3597447222071e-18;     // J

// atomic unit of polarizability, C^2 m^2 / J
constexpr double kPolarizabilityAu =
    kElementaryCharge * kElementaryCharge * kBohrRadius * kBohrRadius / kHartree;

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

// Frequently used conversions.
inline double uK_to_J(double t_uK) { return kBoltzmann * t_uK * 1e-6; }
inline double J_to_uK(double e_J) { return e_J / kBoltzmann * 1e6; }
inline double J_to_Hz(double e_J) { return e_J / kPlanck; }
inline double Hz_to_J(double f_Hz) { return f_Hz * kPlanck; }

}  // namespace cavsim
