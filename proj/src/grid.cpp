#include "layerfield/grid.hpp"

#include <cmath>

#include "layerfield/constants.hpp"
#include "layerfield/error.hpp"

namespace layerfield {

FrequencyGrid::FrequencyGrid(std::vector<double> omegas) : omegas_(std::move(omegas)) {
  if (omegas_.empty()) throw ValidationError("frequency grid is empty");
  for (std::size_t i = 0; i < omegas_.size(); ++i) {
    if (!(omegas_[i] > 0.0) || !std::isfinite(omegas_[i]))
      throw ValidationError("frequency grid: values must be finite and > 0");
    if (i > 0 && !(omegas_[i] > omegas_[i - 1]))
      throw ValidationError("frequency grid must be strictly increasing");
  }
  weights_.assign(omegas_.size(), 0.0);
  for (std::size_t i = 0; i + 1 < omegas_.size(); ++i) {
    const double h = 0.5 * (omegas_[i + 1] - omegas_[i]);
    weights_[i] += h;
    weights_[i + 1] += h;
  }
}

FrequencyGrid FrequencyGrid::linear_ev(double e_min, double e_max, std::size_t count) {
  std::vector<double> w;
  for (double e : linspace(e_min, e_max, count)) w.push_back(omega_from_ev(e));
  return FrequencyGrid(std::move(w));
}

FrequencyGrid FrequencyGrid::log_ev(double e_min, double e_max, std::size_t count) {
  std::vector<double> w;
  for (double e : logspace(e_min, e_max, count)) w.push_back(omega_from_ev(e));
  return FrequencyGrid(std::move(w));
}

double FrequencyGrid::integrate(std::span<const double> samples) const {
  if (samples.size() != omegas_.size()) throw ValidationError("sample count does not match the frequency grid");
  double sum = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) sum += weights_[i] * samples[i];
  return sum;
}

std::vector<double> linspace(double start, double stop, std::size_t n) {
  if (n == 0) throw ValidationError("grid count must be >= 1");
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = start;
    return v;
  }
  for (std::size_t i = 0; i < n; ++i)
    v[i] = start + (stop - start) * static_cast<double>(i) / static_cast<double>(n - 1);
  v[n - 1] = stop;
  return v;
}

std::vector<double> logspace(double start, double stop, std::size_t n) {
  if (!(start > 0.0) || !(stop > 0.0)) throw ValidationError("log grid bounds must be > 0");
  std::vector<double> v = linspace(std::log(start), std::log(stop), n);
  for (auto& x : v) x = std::exp(x);
  v.front() = start;
  if (n > 1) v.back() = stop;
  return v;
}

}  // namespace layerfield
