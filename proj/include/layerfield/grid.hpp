#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace layerfield {

/// Angular-frequency grid with trapezoidal integration weights.
class FrequencyGrid {
 public:
  FrequencyGrid() = default;
  /// Strictly increasing, positive angular frequencies.
  explicit FrequencyGrid(std::vector<double> omegas);

  static FrequencyGrid linear_ev(double e_min, double e_max, std::size_t count);
  static FrequencyGrid log_ev(double e_min, double e_max, std::size_t count);
  /// Default grid of the thermal balance: 256 log-spaced points on [1e-3, 1] eV.
  static FrequencyGrid balance_default() { return log_ev(1e-3, 1.0, 256); }

  [[nodiscard]] std::span<const double> omegas() const { return omegas_; }
  [[nodiscard]] std::span<const double> weights() const { return weights_; }
  [[nodiscard]] std::size_t size() const { return omegas_.size(); }

  /// Trapezoidal integral of samples taken at omegas().
  [[nodiscard]] double integrate(std::span<const double> samples) const;

 private:
  std::vector<double> omegas_;
  std::vector<double> weights_;
};

/// n evenly spaced values from start to stop inclusive (n == 1 gives start).
std::vector<double> linspace(double start, double stop, std::size_t n);
std::vector<double> logspace(double start, double stop, std::size_t n);

}  // namespace layerfield
