#pragma once

// Local densities of states, photon numbers and effective temperatures at a
// point (x, omega). LDOS values are in SI with S = 1 m^2 (s/m^3); divide by
// phys::ldos_unit for units of 2/(pi c S).

#include "layerfield/greens.hpp"
#include "layerfield/stack.hpp"

namespace layerfield {

/// Normal and flipped-reflection bases at one frequency.
struct BasisPair {
  WaveBasis normal;
  WaveBasis flipped;

  static BasisPair solve(const LayerStack& stack, double omega);
  [[nodiscard]] double omega() const { return normal.omega(); }
};

struct LdosTriplet {
  double electric = 0.0;
  double magnetic = 0.0;
  double total = 0.0;  // |n|^2 electric + magnetic
};

struct PhotonNumberTriplet {
  double electric = 0.0;
  double magnetic = 0.0;
  double total = 0.0;
};

struct TemperatureTriplet {
  double electric = 0.0;
  double magnetic = 0.0;
  double total = 0.0;
  /// Set when some photon number was zero and its temperature is the 0 K limit.
  bool zero_photon_limit = false;
};

/// Bose-Einstein occupation 1/(exp(hbar omega / k_B T) - 1).
double source_occupation(double kelvin, double omega);

/// Inverse of source_occupation for a photon number; 0 K for n <= 0.
double effective_temperature(double photon_number, double omega);

/// LDOS from the coincident-point Green's functions:
///   rho_e = (2 omega / pi c^2 S) Im G(x, x)
///   rho_m = (2 omega / pi c^2 S) Im[n(x)^2 G_flipped(x, x)]
LdosTriplet ldos(const LayerStack& stack, const BasisPair& bases, double x);

/// Same quantities from the source-integral forms, summed over every lossy
/// layer. Used as the closure check of ldos(); requires lossy outer layers.
LdosTriplet ldos_from_source_integrals(const LayerStack& stack, const BasisPair& bases, double x);

/// Photon numbers as LDOS-normalized, source-weighted averages of the
/// reservoir occupations. Throws ValidationError if a lossy layer has no
/// temperature in `profile`.
PhotonNumberTriplet photon_numbers(const LayerStack& stack, const BasisPair& bases,
                                   const TemperatureProfile& profile, double x);

TemperatureTriplet effective_temperatures(const PhotonNumberTriplet& numbers, double omega);

/// Everything the pointwise scans need at (x, omega), including the spatial
/// derivatives of rho_tot and n_tot within the layer containing x.
struct SpectralField {
  double x = 0.0;
  double omega = 0.0;
  cplx index;
  LdosTriplet ldos;
  PhotonNumberTriplet photons;
  TemperatureTriplet temperatures;
  double ldos_total_dx = 0.0;
  double photons_total_dx = 0.0;
};

SpectralField evaluate(const LayerStack& stack, const BasisPair& bases, const TemperatureProfile& profile,
                       double x);

}  // namespace layerfield
