#pragma once

#include <algorithm>
#include <vector>

#include "layerfield/stack.hpp"
#include "oracle.hpp"

namespace fixtures {

using namespace layerfield;

inline Layer half_space(cplx n, TemperatureSpec t, std::string label = {}) {
  return {kInfinity, IndexModel::constant(n), t, std::move(label)};
}

inline Layer slab(double thickness_um, cplx n, TemperatureSpec t = {}, std::string label = {}) {
  return {thickness_um * um, IndexModel::constant(n), t, std::move(label)};
}

/// 400 K / 300 K media around a 10 um vacuum gap.
inline LayerStack vacuum_cavity(double t_left = 400.0, double t_right = 300.0) {
  return LayerStack({half_space({1.5, 0.3}, TemperatureSpec::fixed(t_left), "left"),
                     slab(10.0, 1.0, {}, "gap"),
                     half_space({2.5, 0.5}, TemperatureSpec::fixed(t_right), "right")});
}

/// Same walls around a 10 um lossy cavity whose temperature is solved for.
inline LayerStack lossy_cavity() {
  return LayerStack({half_space({1.5, 0.3}, TemperatureSpec::fixed(400.0), "left"),
                     slab(10.0, {1.1, 0.1}, TemperatureSpec::self_consistent(), "cavity"),
                     half_space({2.5, 0.5}, TemperatureSpec::fixed(300.0), "right")});
}

/// Slab of width w centred in a 10 um vacuum cavity between equal walls.
inline LayerStack slab_cavity(double width_um, cplx n_slab, TemperatureSpec slab_t, double t_left = 400.0,
                              double t_right = 300.0) {
  const double gap = 0.5 * (10.0 - width_um);
  return LayerStack({half_space({2.5, 0.5}, TemperatureSpec::fixed(t_left)), slab(gap, 1.0),
                     slab(width_um, n_slab, slab_t), slab(gap, 1.0),
                     half_space({2.5, 0.5}, TemperatureSpec::fixed(t_right))});
}

inline oracle::Profile profile_of(const LayerStack& stack, double omega) {
  oracle::Profile p;
  for (std::size_t j = 0; j < stack.size(); ++j) p.n.push_back(stack.index(j, omega));
  p.edges.assign(stack.interfaces().begin(), stack.interfaces().end());
  return p;
}

inline double relative(double a, double b) {
  if (a == b) return 0.0;
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

/// Free-slice temperatures as (midpoint, kelvin) pairs.
struct SliceProfile {
  std::vector<double> x;
  std::vector<double> kelvin;
};

inline SliceProfile slice_profile(const TemperatureProfile& p) {
  SliceProfile out;
  for (std::size_t i : p.free_segments()) {
    out.x.push_back(p.segments()[i].midpoint());
    out.kelvin.push_back(p.segments()[i].kelvin);
  }
  return out;
}

/// Cubic Lagrange interpolation through the four nearest midpoints, so that
/// profiles on different slicings can be compared at the same x.
inline double interpolate(const SliceProfile& p, double x) {
  const std::size_t n = p.x.size();
  const auto k = static_cast<std::size_t>(std::upper_bound(p.x.begin(), p.x.end(), x) - p.x.begin());
  const std::size_t lo = k < 2 ? 0 : std::min(k - 2, n - 4);
  double sum = 0.0;
  for (std::size_t i = lo; i < lo + 4; ++i) {
    double l = 1.0;
    for (std::size_t j = lo; j < lo + 4; ++j)
      if (j != i) l *= (x - p.x[j]) / (p.x[i] - p.x[j]);
    sum += l * p.kelvin[i];
  }
  return sum;
}

/// Largest change of the coarse slice temperatures when the fine solution
/// is read off at the coarse midpoints.
inline double refinement_change(const TemperatureProfile& coarse, const TemperatureProfile& fine) {
  const SliceProfile c = slice_profile(coarse), f = slice_profile(fine);
  double worst = 0.0;
  for (std::size_t i = 0; i < c.x.size(); ++i) worst = std::max(worst, std::abs(c.kelvin[i] - interpolate(f, c.x[i])));
  return worst;
}

}  // namespace fixtures
