#pragma once

// Field fluctuations, energy density, pressure and Casimir force densities.
// All values are spectral densities (per rad/s) for S = 1 m^2.

#include <cstddef>

#include "layerfield/grid.hpp"
#include "layerfield/spectral.hpp"
#include "layerfield/stack.hpp"

namespace layerfield {

struct EnergyPressureSample {
  double e_fluct = 0.0;         // <E^2>_omega, V^2 s/(m^2 rad)
  double b_fluct = 0.0;         // <B^2>_omega, T^2 s/rad
  double energy_density = 0.0;  // <u>_omega, J s/(m^3 rad)
  double pressure = 0.0;        // <p>_omega, Pa s/rad; equal to energy_density
};

/// Zero-point, thermal and nonequilibrium Casimir force densities,
/// N s/(m^3 rad). Positive values push towards +x.
struct ForceDensitySample {
  double zcf = 0.0;
  double tcf = 0.0;
  double ncf = 0.0;
  double total = 0.0;
};

EnergyPressureSample energy_pressure(const SpectralField& field);
EnergyPressureSample energy_pressure(const LayerStack& stack, const BasisPair& bases,
                                     const TemperatureProfile& profile, double x);

/// -d<u>/dx split into its three terms, from analytic derivatives.
/// The force density has delta contributions at interfaces, so x must not
/// lie on one (ValidationError); use net_force for objects.
ForceDensitySample force_density(const SpectralField& field);
ForceDensitySample force_density(const LayerStack& stack, const BasisPair& bases,
                                 const TemperatureProfile& profile, double x);

/// Distance from x to the nearest interface or temperature-slice boundary.
/// The source term is piecewise constant, so <n_tot> is only C0 at slice
/// boundaries and a difference stencil must not straddle one.
double smooth_half_width(const LayerStack& stack, const TemperatureProfile& profile, double x);

/// -d<u>/dx by Richardson-extrapolated central differences with a step of
/// the local wavelength / 1000, shrunk to stay within smooth_half_width.
/// Only for cross-checking force_density.
double force_density_finite_difference(const LayerStack& stack, const BasisPair& bases,
                                       const TemperatureProfile& profile, double x);

/// Spectral force per area on whatever lies between x1 < x2:
/// <p(x1)> - <p(x2)>, Pa s/rad, positive towards +x.
double net_force(const LayerStack& stack, const BasisPair& bases, const TemperatureProfile& profile, double x1,
                 double x2);

/// hbar omega rho_tot(x1) (<n_tot(x1)> - <n_tot(x2)>): the net force when
/// rho_tot(x1) == rho_tot(x2), e.g. a slab centred in a symmetric cavity.
double symmetric_net_force(const LayerStack& stack, const BasisPair& bases, const TemperatureProfile& profile,
                           double x1, double x2);

struct IntegratedForce {
  double thermal = 0.0;     // Pa
  double zero_point = 0.0;  // Pa, over the finite grid only (no cutoff regularization)
  double total = 0.0;
  /// |thermal integrand| at the top of the grid relative to its peak.
  double edge_ratio = 0.0;
  bool grid_too_narrow = false;  // edge_ratio > 1e-6
};

IntegratedForce frequency_integrated_force(const LayerStack& stack, const TemperatureProfile& profile, double x1,
                                           double x2, const FrequencyGrid& grid, std::size_t threads = 1);

/// A stack with the finite layer `slab_layer` resized to `width` (meters),
/// kept centred between its two neighbours whose combined span is fixed.
/// x_left and x_right are the midpoints of the neighbours. Width 0 removes
/// the slab and merges the neighbours; then x_left == x_right.
struct SlabGeometry {
  LayerStack stack;
  double x_left = 0.0;
  double x_right = 0.0;
};

SlabGeometry resize_slab(const LayerStack& base, std::size_t slab_layer, double width);

}  // namespace layerfield
