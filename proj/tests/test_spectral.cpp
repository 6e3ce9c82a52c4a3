#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "layerfield/error.hpp"
#include "layerfield/spectral.hpp"

using namespace layerfield;
using fixtures::half_space;
using fixtures::relative;
using fixtures::slab;

namespace {

LayerStack mixed_stack() {
  return LayerStack({half_space({1.5, 0.3}, TemperatureSpec::fixed(400)), slab(3.0, 1.0),
                     slab(1.7, {3.2, 0.05}, TemperatureSpec::fixed(350)), slab(5.3, {1.2, 0.0}),
                     half_space({2.5, 0.5}, TemperatureSpec::fixed(300))});
}

std::vector<double> layer_occupations(const LayerStack& s, double omega) {
  std::vector<double> eta(s.size(), 0.0);
  for (std::size_t j = 0; j < s.size(); ++j)
    if (s.layer(j).temperature.kind == TemperatureKind::fixed)
      eta[j] = oracle::planck_occupation(s.layer(j).temperature.kelvin, omega);
  return eta;
}

}  // namespace

TEST_CASE("vacuum LDOS is one unit, split evenly") {
  const LayerStack vac = LayerStack::unchecked_outer({half_space(1.0, {}), slab(5.0, 1.0), half_space(1.0, {})});
  for (double e : {0.01, 0.1, 1.0}) {
    const BasisPair b = BasisPair::solve(vac, omega_from_ev(e));
    for (double x : {-3e-6, 2e-6, 9e-6}) {
      const LdosTriplet r = ldos(vac, b, x);
      CHECK(r.electric / phys::ldos_unit == doctest::Approx(0.5).epsilon(1e-12));
      CHECK(r.magnetic / phys::ldos_unit == doctest::Approx(0.5).epsilon(1e-12));
      CHECK(r.total / phys::ldos_unit == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("homogeneous absorbing medium") {
  for (cplx n : {cplx(1.5, 0.3), cplx(2.5, 0.5), cplx(1.1, 0.1)}) {
    const LayerStack s({half_space(n, TemperatureSpec::fixed(300)), slab(2.0, n, TemperatureSpec::fixed(300)),
                        half_space(n, TemperatureSpec::fixed(300))});
    const BasisPair b = BasisPair::solve(s, omega_from_ev(0.1));
    for (double x : {-1e-6, 1e-6, 4e-6}) {
      const LdosTriplet r = ldos(s, b, x);
      CHECK(relative(r.electric / phys::ldos_unit, n.real() / (2.0 * std::norm(n))) < 1e-12);
      CHECK(relative(r.magnetic / phys::ldos_unit, n.real() / 2.0) < 1e-12);
      CHECK(relative(r.total / phys::ldos_unit, n.real()) < 1e-12);
    }
  }
}

TEST_CASE("Im-form LDOS agrees with the reference boundary problems") {
  std::mt19937_64 rng(17);
  for (const LayerStack& s : {fixtures::vacuum_cavity(), mixed_stack()}) {
    std::uniform_real_distribution<double> pos(-5e-6, s.interfaces().back() + 5e-6);
    for (int i = 0; i < 20; ++i) {
      const double w = omega_from_ev(0.02 + 0.012 * i);
      const double x = pos(rng);
      const LdosTriplet r = ldos(s, BasisPair::solve(s, w), x);
      const oracle::Ldos ref = oracle::coincident_ldos(fixtures::profile_of(s, w), w, x);
      CHECK(relative(r.electric, ref.electric) < 1e-9);
      CHECK(relative(r.magnetic, ref.magnetic) < 1e-9);
    }
  }
}

TEST_CASE("closure: Im form equals the source integrals") {
  std::mt19937_64 rng(19);
  for (const LayerStack& s : {fixtures::vacuum_cavity(), mixed_stack(), fixtures::lossy_cavity()}) {
    std::uniform_real_distribution<double> pos(-5e-6, s.interfaces().back() + 5e-6);
    for (int i = 0; i < 20; ++i) {
      const double w = omega_from_ev(0.02 + 0.012 * i);
      const double x = pos(rng);
      const BasisPair b = BasisPair::solve(s, w);
      const LdosTriplet im = ldos(s, b, x);
      const LdosTriplet sum = ldos_from_source_integrals(s, b, x);
      CHECK(relative(im.electric, sum.electric) < 1e-9);
      CHECK(relative(im.magnetic, sum.magnetic) < 1e-9);
      CHECK(relative(im.total, sum.total) < 1e-9);
      // And the library's closed-form integrals against quadrature.
      const oracle::Ldos quad = oracle::integral_ldos(fixtures::profile_of(s, w), w, x);
      CHECK(relative(sum.electric, quad.electric) < 1e-8);
      CHECK(relative(sum.magnetic, quad.magnetic) < 1e-8);
    }
  }
}

TEST_CASE("occupation and effective temperature are inverse") {
  for (double t : {1.0, 77.0, 300.0, 400.0, 5000.0})
    for (double e : {0.001, 0.05, 0.2}) {
      const double w = omega_from_ev(e);
      const double eta = source_occupation(t, w);
      CHECK(relative(eta, oracle::planck_occupation(t, w)) < 1e-12);
      if (eta > 0.0) CHECK(relative(effective_temperature(eta, w), t) < 1e-12);
    }
  CHECK(effective_temperature(0.0, omega_from_ev(0.1)) == 0.0);
  const auto t = effective_temperatures({0.0, 1.0, 0.5}, omega_from_ev(0.1));
  CHECK(t.zero_photon_limit);
  CHECK(t.electric == 0.0);
  CHECK_FALSE(effective_temperatures({0.1, 0.2, 0.3}, omega_from_ev(0.1)).zero_photon_limit);
}

TEST_CASE("global equilibrium: every temperature equals the reservoir one") {
  const LayerStack s = fixtures::vacuum_cavity(350.0, 350.0);
  const TemperatureProfile p = TemperatureProfile::from_stack(s);
  for (double e : {0.02, 0.1, 0.24})
    for (double x : {-2e-6, 0.5e-6, 5e-6, 9.9e-6, 13e-6}) {
      const double w = omega_from_ev(e);
      const SpectralField f = evaluate(s, BasisPair::solve(s, w), p, x);
      const double eta = oracle::planck_occupation(350.0, w);
      CHECK(relative(f.photons.electric, eta) < 1e-9);
      CHECK(relative(f.photons.magnetic, eta) < 1e-9);
      CHECK(relative(f.photons.total, eta) < 1e-9);
      CHECK(std::abs(f.temperatures.total - 350.0) < 1e-6);
      CHECK(std::abs(f.photons_total_dx) <= 1e-6 * eta / 1e-6);
    }
}

TEST_CASE("photon numbers are LDOS-weighted reservoir averages") {
  std::mt19937_64 rng(23);
  const LayerStack s = mixed_stack();
  const TemperatureProfile p = TemperatureProfile::from_stack(s);
  std::uniform_real_distribution<double> pos(-4e-6, 14e-6);
  for (int i = 0; i < 15; ++i) {
    const double w = omega_from_ev(0.02 + 0.015 * i);
    const double x = pos(rng);
    const oracle::Profile prof = fixtures::profile_of(s, w);
    const oracle::Ldos weighted = oracle::integral_ldos(prof, w, x, layer_occupations(s, w));
    const oracle::Ldos bare = oracle::integral_ldos(prof, w, x);
    const double n2 = std::norm(s.refractive_index(x, w));

    const PhotonNumberTriplet got = photon_numbers(s, BasisPair::solve(s, w), p, x);
    CHECK(relative(got.electric, weighted.electric / bare.electric) < 1e-8);
    CHECK(relative(got.magnetic, weighted.magnetic / bare.magnetic) < 1e-8);
    CHECK(relative(got.total, (n2 * weighted.electric + weighted.magnetic) / (n2 * bare.electric + bare.magnetic)) <
          1e-8);
    const double lo = oracle::planck_occupation(300.0, w), hi = oracle::planck_occupation(400.0, w);
    CHECK(got.total >= lo * (1 - 1e-12));
    CHECK(got.total <= hi * (1 + 1e-12));
  }
}

TEST_CASE("spatial derivatives in evaluate()") {
  const LayerStack s = mixed_stack();
  const TemperatureProfile p = TemperatureProfile::from_stack(s);
  const BasisPair b = BasisPair::solve(s, omega_from_ev(0.11));
  for (double x : {-1e-6, 1.2e-6, 3.9e-6, 8e-6, 11e-6}) {
    const double h = 1e-10;
    const SpectralField f = evaluate(s, b, p, x), up = evaluate(s, b, p, x + h), down = evaluate(s, b, p, x - h);
    const double d_rho = (up.ldos.total - down.ldos.total) / (2 * h);
    const double d_n = (up.photons.total - down.photons.total) / (2 * h);
    CHECK(std::abs(f.ldos_total_dx - d_rho) <= 1e-5 * std::abs(d_rho) + 1e-9 * f.ldos.total / 1e-6);
    CHECK(std::abs(f.photons_total_dx - d_n) <= 1e-5 * std::abs(d_n) + 1e-9 * f.photons.total / 1e-6);
  }
}

TEST_CASE("lossy layer without a temperature is an error") {
  const LayerStack s({half_space({1.5, 0.3}, TemperatureSpec::fixed(400)), slab(1.0, {2.0, 0.2}, {}, "film"),
                      half_space({2.5, 0.5}, TemperatureSpec::fixed(300))});
  const BasisPair b = BasisPair::solve(s, omega_from_ev(0.1));
  CHECK_THROWS_WITH_AS((void)photon_numbers(s, b, TemperatureProfile::from_stack(s), 2e-6),
                       doctest::Contains("layer 1 (film)"), ValidationError);
  // The LDOS itself needs no temperatures.
  CHECK(ldos(s, b, 0.5e-6).total > 0.0);
}
