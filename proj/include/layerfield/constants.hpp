#pragma once

#include <complex>
#include <numbers>

namespace layerfield {

using cplx = std::complex<double>;

namespace phys {

// CODATA 2018
inline constexpr double c = 299792458.0;                 // m/s
inline constexpr double hbar = 1.054571817e-34;          // J s
inline constexpr double k_B = 1.380649e-23;              // J/K
inline constexpr double eps0 = 8.8541878128e-12;         // F/m
inline constexpr double mu0 = 1.0 / (eps0 * c * c);      // H/m
inline constexpr double e_charge = 1.602176634e-19;      // C

inline constexpr double pi = std::numbers::pi;

/// Quantization area in the y-z plane. Fixed to 1 m^2; quantities reported
/// in units of 2/(pi c S) are independent of it.
inline constexpr double area = 1.0;

/// One LDOS unit as used in plots: 2/(pi c S).
inline constexpr double ldos_unit = 2.0 / (pi * c * area);

}  // namespace phys

inline constexpr double um = 1e-6;

inline double omega_from_ev(double energy_ev) { return energy_ev * phys::e_charge / phys::hbar; }
inline double ev_from_omega(double omega) { return omega * phys::hbar / phys::e_charge; }

}  // namespace layerfield
