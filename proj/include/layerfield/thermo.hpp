#pragma once

// Net emission rate and the radiative steady-state temperature of
// self-consistent layers.

#include <cstddef>
#include <vector>

#include "layerfield/grid.hpp"
#include "layerfield/spectral.hpp"
#include "layerfield/stack.hpp"

namespace layerfield {

struct EmissionSample {
  double value = 0.0;  // W/(m^3 rad/s), S = 1 m^2
  double x = 0.0;
  double omega = 0.0;
};

/// hbar omega^2 Im[n^2] rho_e (eta(T(x)) - <n_e>). Zero in lossless layers
/// and in lossy layers without an assigned temperature.
EmissionSample net_emission(const LayerStack& stack, const BasisPair& bases, const TemperatureProfile& profile,
                            double x);

/// Frequency-integrated net emission at x (W/m^3) on `grid`.
double integrated_net_emission(const LayerStack& stack, const TemperatureProfile& profile,
                               const FrequencyGrid& grid, double x);

struct BalanceSettings {
  std::size_t slices = 32;
  FrequencyGrid grid = FrequencyGrid::balance_default();
  double relaxation = 0.5;
  double tolerance_kelvin = 1e-3;
  int max_iterations = 100;
  std::size_t threads = 1;
};

struct BalanceResult {
  TemperatureProfile profile;
  /// Frequency-integrated net emission at each slice midpoint (W/m^3), in
  /// free_segments() order, evaluated with the final profile.
  std::vector<double> residuals;
  /// residuals divided by the slice's gross emission.
  std::vector<double> relative_residuals;
  /// Largest applied temperature update of every outer iteration.
  std::vector<double> update_history;
  int iterations = 0;
  bool converged = false;
};

/// Splits every self-consistent layer into `slices` slices and iterates
/// until the frequency-integrated emission equals absorption at every
/// slice midpoint. Each slice temperature is found by bisection on the range
/// of the fixed reservoir temperatures with the incident photon numbers held
/// at the previous iterate, then under-relaxed. Non-convergence is reported
/// through `converged`, not thrown.
BalanceResult solve_self_consistent(const LayerStack& stack, const BalanceSettings& settings = {});

/// Profile for scanning: fixed layers as given, self-consistent layers
/// solved with `settings`. Throws ConvergenceError if the solver fails.
TemperatureProfile resolve_profile(const LayerStack& stack, const BalanceSettings& settings = {});

}  // namespace layerfield
