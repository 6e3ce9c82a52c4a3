#include "layerfield/mechanics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "layerfield/error.hpp"
#include "layerfield/parallel.hpp"

namespace layerfield {

EnergyPressureSample energy_pressure(const SpectralField& field) {
  const double quantum = phys::hbar * field.omega;
  EnergyPressureSample s;
  s.e_fluct = quantum / phys::eps0 * field.ldos.electric * (field.photons.electric + 0.5);
  s.b_fluct = quantum / (phys::eps0 * phys::c * phys::c) * field.ldos.magnetic * (field.photons.magnetic + 0.5);
  s.energy_density = quantum * field.ldos.total * (field.photons.total + 0.5);
  s.pressure = s.energy_density;
  return s;
}

EnergyPressureSample energy_pressure(const LayerStack& stack, const BasisPair& bases,
                                     const TemperatureProfile& profile, double x) {
  return energy_pressure(evaluate(stack, bases, profile, x));
}

ForceDensitySample force_density(const SpectralField& field) {
  const double quantum = phys::hbar * field.omega;
  ForceDensitySample f;
  f.zcf = -0.5 * quantum * field.ldos_total_dx;
  f.tcf = -quantum * field.ldos_total_dx * field.photons.total;
  f.ncf = -quantum * field.ldos.total * field.photons_total_dx;
  f.total = f.zcf + f.tcf + f.ncf;
  return f;
}

ForceDensitySample force_density(const LayerStack& stack, const BasisPair& bases,
                                 const TemperatureProfile& profile, double x) {
  if (stack.on_interface(x))
    throw ValidationError("force density is singular on an interface; use net_force across it");
  return force_density(evaluate(stack, bases, profile, x));
}

double smooth_half_width(const LayerStack& stack, const TemperatureProfile& profile, double x) {
  const std::size_t j = stack.layer_at(x);
  double room = std::min(x - stack.layer_begin(j), stack.layer_end(j) - x);
  for (const auto& seg : profile.segments()) {
    if (seg.layer != j) continue;
    for (double edge : {seg.begin, seg.end})
      if (std::isfinite(edge)) room = std::min(room, std::abs(x - edge));
  }
  return room;
}

double force_density_finite_difference(const LayerStack& stack, const BasisPair& bases,
                                       const TemperatureProfile& profile, double x) {
  const std::size_t j = stack.layer_at(x);
  const double n_re = std::max(bases.normal.index(j).real(), 1e-3);
  double h = 2.0 * phys::pi * phys::c / (bases.omega() * n_re) / 1000.0;
  const double room = smooth_half_width(stack, profile, x);
  if (!(room > 0.0))
    throw ValidationError("finite-difference force needs a point off interfaces and temperature-slice boundaries");
  h = std::min(h, 0.5 * room);
  const auto u = [&](double at) { return energy_pressure(stack, bases, profile, at).energy_density; };
  const auto central = [&](double step) { return (u(x + step) - u(x - step)) / (2.0 * step); };
  const double coarse = central(h), fine = central(0.5 * h);
  return -(4.0 * fine - coarse) / 3.0;
}

double net_force(const LayerStack& stack, const BasisPair& bases, const TemperatureProfile& profile, double x1,
                 double x2) {
  if (x1 == x2) return 0.0;
  return energy_pressure(stack, bases, profile, x1).pressure - energy_pressure(stack, bases, profile, x2).pressure;
}

double symmetric_net_force(const LayerStack& stack, const BasisPair& bases, const TemperatureProfile& profile,
                           double x1, double x2) {
  if (x1 == x2) return 0.0;
  const SpectralField a = evaluate(stack, bases, profile, x1);
  const SpectralField b = evaluate(stack, bases, profile, x2);
  return phys::hbar * a.omega * a.ldos.total * (a.photons.total - b.photons.total);
}

IntegratedForce frequency_integrated_force(const LayerStack& stack, const TemperatureProfile& profile, double x1,
                                           double x2, const FrequencyGrid& grid, std::size_t threads) {
  if (!(x1 <= x2)) throw ValidationError("net force needs x1 <= x2");
  const auto omegas = grid.omegas();
  stack.check_frequencies(omegas);
  std::vector<double> thermal(omegas.size()), zero_point(omegas.size());
  parallel_for(omegas.size(), threads, [&](std::size_t i) {
    if (x1 == x2) return;
    const BasisPair bases = BasisPair::solve(stack, omegas[i]);
    const SpectralField a = evaluate(stack, bases, profile, x1);
    const SpectralField b = evaluate(stack, bases, profile, x2);
    const double quantum = phys::hbar * omegas[i];
    thermal[i] = quantum * (a.ldos.total * a.photons.total - b.ldos.total * b.photons.total);
    zero_point[i] = 0.5 * quantum * (a.ldos.total - b.ldos.total);
  });
  IntegratedForce out;
  out.thermal = grid.integrate(thermal);
  out.zero_point = grid.integrate(zero_point);
  out.total = out.thermal + out.zero_point;
  double peak = 0.0;
  for (double v : thermal) peak = std::max(peak, std::abs(v));
  out.edge_ratio = peak > 0.0 ? std::abs(thermal.back()) / peak : 0.0;
  out.grid_too_narrow = out.edge_ratio > 1e-6;
  return out;
}

SlabGeometry resize_slab(const LayerStack& base, std::size_t slab_layer, double width) {
  if (slab_layer == 0 || slab_layer + 1 >= base.size())
    throw ValidationError("slab layer must be an interior layer");
  if (base.layer(slab_layer - 1).semi_infinite() || base.layer(slab_layer + 1).semi_infinite())
    throw ValidationError("slab needs finite layers on both sides");
  if (!(width >= 0.0) || !std::isfinite(width)) throw ValidationError("slab width must be >= 0");

  const Layer& left = base.layer(slab_layer - 1);
  const Layer& right = base.layer(slab_layer + 1);
  const double span = left.thickness + base.layer(slab_layer).thickness + right.thickness;
  const double begin = base.layer_begin(slab_layer - 1);
  if (width >= span) throw ValidationError("slab width must be smaller than the cavity it sits in");
  if (!left.index.is_constant() || !right.index.is_constant() ||
      left.index.constant_value() != right.index.constant_value() ||
      left.temperature.kind != right.temperature.kind || left.temperature.kelvin != right.temperature.kelvin)
    throw ValidationError("slab neighbours must be the same constant-index medium");

  std::vector<Layer> layers(base.layers().begin(), base.layers().end());
  if (width == 0.0) {
    Layer merged = left;
    merged.thickness = span;
    layers.erase(layers.begin() + static_cast<std::ptrdiff_t>(slab_layer - 1),
                 layers.begin() + static_cast<std::ptrdiff_t>(slab_layer + 2));
    layers.insert(layers.begin() + static_cast<std::ptrdiff_t>(slab_layer - 1), merged);
    const double centre = begin + 0.5 * span;
    return {LayerStack(std::move(layers), base.name()), centre, centre};
  }
  const double gap = 0.5 * (span - width);
  layers[slab_layer - 1].thickness = gap;
  layers[slab_layer].thickness = width;
  layers[slab_layer + 1].thickness = gap;
  LayerStack stack(std::move(layers), base.name());
  const double x_left = begin + 0.5 * gap;
  const double x_right = begin + gap + width + 0.5 * gap;
  return {std::move(stack), x_left, x_right};
}

}  // namespace layerfield
