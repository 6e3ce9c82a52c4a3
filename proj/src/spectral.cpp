#include "layerfield/spectral.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "layerfield/error.hpp"

namespace layerfield {

namespace {

// 2 omega / (pi c^2 S): Im G(x, x) -> LDOS.
double im_form_prefactor(double omega) { return 2.0 * omega / (phys::pi * phys::c * phys::c * phys::area); }

// 2 omega^3 / (pi c^4 S): source integrals -> LDOS.
double integral_form_prefactor(double omega) {
  const double c2 = phys::c * phys::c;
  return 2.0 * omega * omega * omega / (phys::pi * c2 * c2 * phys::area);
}

struct SourceSums {
  double electric = 0.0;  // prefactor * sum Im[n^2] eta int|G|^2
  double magnetic = 0.0;  // prefactor * sum Im[n^2] eta int|dG/(k0 dx)|^2
  double total_dx = 0.0;  // d/dx (|n(x)|^2 electric + magnetic)
};

SourceSums weighted_sources(const LayerStack& stack, const BasisPair& bases, const TemperatureProfile& profile,
                            double x) {
  const double omega = bases.omega();
  const double k0 = omega / phys::c;
  const double q = integral_form_prefactor(omega);
  const double n2_here = std::norm(bases.normal.index(bases.normal.layer_at(x)));
  SourceSums sums;
  for (std::size_t j = 0; j < stack.size(); ++j) {
    const double im_eps = loss(bases.normal.index(j));
    if (!(im_eps > 0.0)) continue;
    bool covered = false;
    for (const auto& seg : profile.segments()) {
      if (seg.layer != j) continue;
      covered = true;
      const double eta = source_occupation(seg.kelvin, omega);
      if (eta == 0.0) continue;
      const SourceWeights w = bases.normal.source_weights(x, j, seg.begin, seg.end);
      const double f = q * im_eps * eta;
      sums.electric += f * w.g2;
      sums.magnetic += f * w.dg2 / (k0 * k0);
      sums.total_dx += f * (n2_here * w.g2_dx + w.dg2_dx / (k0 * k0));
    }
    if (!covered) {
      std::string what = "layer " + std::to_string(j);
      if (!stack.layer(j).label.empty()) what += " (" + stack.layer(j).label + ")";
      throw ValidationError(what + ": lossy layer has no temperature");
    }
  }
  return sums;
}

}  // namespace

BasisPair BasisPair::solve(const LayerStack& stack, double omega) {
  return {WaveBasis::solve(stack, omega, Variant::normal), WaveBasis::solve(stack, omega, Variant::flipped)};
}

double source_occupation(double kelvin, double omega) {
  const double ratio = phys::hbar * omega / (phys::k_B * kelvin);
  return 1.0 / std::expm1(ratio);
}

double effective_temperature(double photon_number, double omega) {
  if (!(photon_number > 0.0)) return 0.0;
  return phys::hbar * omega / (phys::k_B * std::log1p(1.0 / photon_number));
}

LdosTriplet ldos(const LayerStack& stack, const BasisPair& bases, double x) {
  (void)stack;
  const double p = im_form_prefactor(bases.omega());
  const cplx n = bases.normal.index(bases.normal.layer_at(x));
  LdosTriplet out;
  out.electric = p * bases.normal.diagonal(x).imag();
  out.magnetic = p * (n * n * bases.flipped.diagonal(x)).imag();
  out.total = std::norm(n) * out.electric + out.magnetic;
  return out;
}

LdosTriplet ldos_from_source_integrals(const LayerStack& stack, const BasisPair& bases, double x) {
  const double omega = bases.omega();
  const double k0 = omega / phys::c;
  const double q = integral_form_prefactor(omega);
  LdosTriplet out;
  for (std::size_t j = 0; j < stack.size(); ++j) {
    const double im_eps = loss(bases.normal.index(j));
    if (!(im_eps > 0.0)) continue;
    const SourceWeights w = bases.normal.source_weights(x, j);
    out.electric += q * im_eps * w.g2;
    out.magnetic += q * im_eps * w.dg2 / (k0 * k0);
  }
  const cplx n = bases.normal.index(bases.normal.layer_at(x));
  out.total = std::norm(n) * out.electric + out.magnetic;
  return out;
}

PhotonNumberTriplet photon_numbers(const LayerStack& stack, const BasisPair& bases,
                                   const TemperatureProfile& profile, double x) {
  return evaluate(stack, bases, profile, x).photons;
}

TemperatureTriplet effective_temperatures(const PhotonNumberTriplet& numbers, double omega) {
  TemperatureTriplet t;
  t.electric = effective_temperature(numbers.electric, omega);
  t.magnetic = effective_temperature(numbers.magnetic, omega);
  t.total = effective_temperature(numbers.total, omega);
  t.zero_photon_limit = !(numbers.electric > 0.0) || !(numbers.magnetic > 0.0) || !(numbers.total > 0.0);
  return t;
}

SpectralField evaluate(const LayerStack& stack, const BasisPair& bases, const TemperatureProfile& profile,
                       double x) {
  SpectralField f;
  f.x = x;
  f.omega = bases.omega();
  f.index = bases.normal.index(bases.normal.layer_at(x));
  const double n2 = std::norm(f.index);
  const double p = im_form_prefactor(f.omega);
  const cplx eps = f.index * f.index;

  f.ldos = ldos(stack, bases, x);
  const double ldos_e_dx = p * bases.normal.diagonal_derivative(x).imag();
  const double ldos_m_dx = p * (eps * bases.flipped.diagonal_derivative(x)).imag();
  f.ldos_total_dx = n2 * ldos_e_dx + ldos_m_dx;

  const SourceSums sums = weighted_sources(stack, bases, profile, x);
  f.photons.electric = sums.electric / f.ldos.electric;
  f.photons.magnetic = sums.magnetic / f.ldos.magnetic;
  const double weighted = n2 * sums.electric + sums.magnetic;
  f.photons.total = weighted / f.ldos.total;
  f.photons_total_dx =
      (sums.total_dx * f.ldos.total - weighted * f.ldos_total_dx) / (f.ldos.total * f.ldos.total);

  f.temperatures = effective_temperatures(f.photons, f.omega);
  return f;
}

}  // namespace layerfield
