#include "layerfield/thermo.hpp"

#include <algorithm>
#include <cmath>

#include "layerfield/error.hpp"
#include "layerfield/parallel.hpp"

namespace layerfield {

namespace {

double emission_weight(double omega, double im_eps, double ldos_e) {
  return phys::hbar * omega * omega * im_eps * ldos_e;
}

// Per-frequency data that does not change between outer iterations.
struct SliceCoupling {
  double ldos_e = 0.0;
  double im_eps = 0.0;               // Im[n^2] of the slice itself
  std::vector<double> coefficients;  // rho_e * <n_e> = sum_s coefficient_s * eta_s
};

}  // namespace

EmissionSample net_emission(const LayerStack& stack, const BasisPair& bases, const TemperatureProfile& profile,
                            double x) {
  EmissionSample s{0.0, x, bases.omega()};
  const cplx n = bases.normal.index(bases.normal.layer_at(x));
  const double im_eps = loss(n);
  if (!(im_eps > 0.0)) return s;
  const auto temperature = profile.temperature_at(x, stack);
  if (!temperature) return s;
  const SpectralField f = evaluate(stack, bases, profile, x);
  s.value = emission_weight(s.omega, im_eps, f.ldos.electric) *
            (source_occupation(*temperature, s.omega) - f.photons.electric);
  return s;
}

double integrated_net_emission(const LayerStack& stack, const TemperatureProfile& profile,
                               const FrequencyGrid& grid, double x) {
  std::vector<double> samples;
  samples.reserve(grid.size());
  for (double w : grid.omegas()) samples.push_back(net_emission(stack, BasisPair::solve(stack, w), profile, x).value);
  return grid.integrate(samples);
}

BalanceResult solve_self_consistent(const LayerStack& stack, const BalanceSettings& settings) {
  if (!(settings.relaxation > 0.0 && settings.relaxation <= 1.0))
    throw ValidationError("balance: relaxation must be in (0, 1]");
  if (!(settings.tolerance_kelvin > 0.0)) throw ValidationError("balance: tolerance must be > 0");
  if (settings.max_iterations < 1) throw ValidationError("balance: max_iterations must be >= 1");

  const auto range = stack.fixed_temperature_range();
  if (stack.has_self_consistent() && !range)
    throw ValidationError("balance: self-consistent layers need at least one fixed-temperature layer");

  const auto omegas = settings.grid.omegas();
  stack.check_frequencies(omegas);

  BalanceResult result;
  TemperatureProfile profile = TemperatureProfile::from_stack(stack, settings.slices);
  const std::vector<std::size_t> free(profile.free_segments().begin(), profile.free_segments().end());
  const std::size_t slice_count = free.size();
  const std::size_t segment_count = profile.segments().size();
  if (slice_count == 0) {
    result.profile = profile;
    result.converged = true;
    return result;
  }
  const double t_min = range->first, t_max = range->second;

  // coupling[i][m]: frequency i, slice m.
  std::vector<std::vector<SliceCoupling>> coupling(omegas.size(), std::vector<SliceCoupling>(slice_count));
  parallel_for(omegas.size(), settings.threads, [&](std::size_t i) {
    const double w = omegas[i];
    const WaveBasis basis = WaveBasis::solve(stack, w, Variant::normal);
    const double p = 2.0 * w / (phys::pi * phys::c * phys::c * phys::area);
    const double q = 2.0 * w * w * w / (phys::pi * std::pow(phys::c, 4) * phys::area);
    for (std::size_t m = 0; m < slice_count; ++m) {
      const double x = profile.segments()[free[m]].midpoint();
      SliceCoupling& c = coupling[i][m];
      c.ldos_e = p * basis.diagonal(x).imag();
      c.im_eps = loss(basis.index(profile.segments()[free[m]].layer));
      c.coefficients.resize(segment_count);
      for (std::size_t s = 0; s < segment_count; ++s) {
        const auto& seg = profile.segments()[s];
        const double im_eps = loss(basis.index(seg.layer));
        c.coefficients[s] = im_eps > 0.0 ? q * im_eps * basis.source_weights(x, seg.layer, seg.begin, seg.end).g2 : 0.0;
      }
    }
  });

  // eta[i][s] for the current profile.
  std::vector<std::vector<double>> eta(omegas.size(), std::vector<double>(segment_count));
  const auto update_eta = [&](const TemperatureProfile& prof) {
    for (std::size_t i = 0; i < omegas.size(); ++i)
      for (std::size_t s = 0; s < segment_count; ++s)
        eta[i][s] = source_occupation(prof.segments()[s].kelvin, omegas[i]);
  };
  // Incident electric photon number at slice m, frequency i.
  const auto incident = [&](std::size_t i, std::size_t m) {
    const SliceCoupling& c = coupling[i][m];
    double sum = 0.0;
    for (std::size_t s = 0; s < segment_count; ++s) sum += c.coefficients[s] * eta[i][s];
    return sum / c.ldos_e;
  };
  const std::vector<double> weights(settings.grid.weights().begin(), settings.grid.weights().end());

  // balance(T) = sum_i w_i hbar omega^2 Im[n^2] rho_e (eta(T) - n_e), increasing in T.
  const auto balance = [&](std::size_t m, double kelvin, const std::vector<double>& incident_m) {
    double sum = 0.0;
    for (std::size_t i = 0; i < omegas.size(); ++i) {
      const double wt = weights[i] * emission_weight(omegas[i], coupling[i][m].im_eps, coupling[i][m].ldos_e);
      sum += wt * (source_occupation(kelvin, omegas[i]) - incident_m[i]);
    }
    return sum;
  };
  const auto gross = [&](std::size_t m, double kelvin) {
    double sum = 0.0;
    for (std::size_t i = 0; i < omegas.size(); ++i)
      sum += weights[i] * emission_weight(omegas[i], coupling[i][m].im_eps, coupling[i][m].ldos_e) *
             source_occupation(kelvin, omegas[i]);
    return sum;
  };

  std::vector<double> temps(slice_count);
  for (std::size_t m = 0; m < slice_count; ++m) temps[m] = profile.segments()[free[m]].kelvin;

  std::vector<double> incident_m(omegas.size());
  for (int iter = 1; iter <= settings.max_iterations; ++iter) {
    update_eta(profile);
    std::vector<double> next(slice_count);
    for (std::size_t m = 0; m < slice_count; ++m) {
      for (std::size_t i = 0; i < omegas.size(); ++i) incident_m[i] = incident(i, m);
      double lo = t_min, hi = t_max;
      if (hi - lo > 0.0) {
        if (balance(m, lo, incident_m) >= 0.0) {
          hi = lo;
        } else if (balance(m, hi, incident_m) <= 0.0) {
          lo = hi;
        } else {
          while (hi - lo > 1e-9 * hi) {
            const double mid = 0.5 * (lo + hi);
            (balance(m, mid, incident_m) < 0.0 ? lo : hi) = mid;
          }
        }
      }
      next[m] = 0.5 * (lo + hi);
    }
    double largest = 0.0;
    for (std::size_t m = 0; m < slice_count; ++m) {
      const double step = settings.relaxation * (next[m] - temps[m]);
      temps[m] += step;
      largest = std::max(largest, std::abs(step));
    }
    profile = profile.with_free_temperatures(temps);
    result.update_history.push_back(largest);
    result.iterations = iter;
    if (largest < settings.tolerance_kelvin) {
      result.converged = true;
      break;
    }
  }

  update_eta(profile);
  result.residuals.resize(slice_count);
  result.relative_residuals.resize(slice_count);
  for (std::size_t m = 0; m < slice_count; ++m) {
    for (std::size_t i = 0; i < omegas.size(); ++i) incident_m[i] = incident(i, m);
    result.residuals[m] = balance(m, temps[m], incident_m);
    const double g = gross(m, temps[m]);
    result.relative_residuals[m] = g > 0.0 ? result.residuals[m] / g : 0.0;
  }
  result.profile = std::move(profile);
  return result;
}

TemperatureProfile resolve_profile(const LayerStack& stack, const BalanceSettings& settings) {
  if (!stack.has_self_consistent()) return TemperatureProfile::from_stack(stack);
  BalanceResult r = solve_self_consistent(stack, settings);
  if (!r.converged)
    throw ConvergenceError("self-consistent temperature did not converge in " + std::to_string(r.iterations) +
                           " iterations (last update " + std::to_string(r.update_history.back()) + " K)");
  return r.profile;
}

}  // namespace layerfield
