#pragma once

// Green's function of the 1D Helmholtz equation in a layered stack,
//
//   d^2G/dx^2 + (omega n(x)/c)^2 G = -delta(x - x'),
//
// built from two homogeneous solutions: psi_L (outgoing to the left in the
// first layer) and psi_R (outgoing to the right in the last layer):
//
//   G(x, x') = -psi_L(min(x, x')) psi_R(max(x, x')) / W,
//   W = psi_L psi_R' - psi_L' psi_R   (the same in every layer).
//
// Inside layer j each solution is exp(sigma_j) (A e^{i k_j s} + B e^{-i k_j s})
// with s the layer-local coordinate and sigma_j a real log-scale that keeps
// the amplitudes of thick absorbing layers in range.

#include <cstddef>
#include <vector>

#include "layerfield/constants.hpp"
#include "layerfield/stack.hpp"

namespace layerfield {

/// Normal basis, or the auxiliary basis in which every interface reflection
/// coefficient is negated (transmission and propagation phases unchanged).
enum class Variant { normal, flipped };

struct InterfaceCoefficients {
  cplx r;
  cplx t;
};

/// Normal-incidence Fresnel amplitudes for a wave going from n_left into
/// n_right: r = (n_l - n_r)/(n_l + n_r), t = 2 n_l/(n_l + n_r). The flipped
/// variant returns (-r, t).
InterfaceCoefficients interface_coefficients(cplx n_left, cplx n_right, Variant variant = Variant::normal);

/// A complex number stored as mantissa * exp(log_scale).
struct Scaled {
  cplx mantissa{0.0, 0.0};
  double log_scale = 0.0;

  [[nodiscard]] cplx value() const;
};

/// psi and dpsi/dx at a point, both multiplied by exp(log_scale).
struct ModeValue {
  cplx value;
  cplx derivative;
  double log_scale = 0.0;
};

struct GreensSample {
  cplx value;         // G(x, omega, x'), meters
  cplx x_derivative;  // dG/dx at the field point; at x == x' the x > x' side
  double field_point = 0.0;
  double source = 0.0;
  Variant variant = Variant::normal;
};

/// Closed-form integrals over a source segment [a, b] of layer j, for a
/// fixed field point x:
struct SourceWeights {
  double g2 = 0.0;      // int |G(x,x')|^2 dx'
  double dg2 = 0.0;     // int |dG(x,x')/dx|^2 dx'   (derivative w.r.t. the field point)
  double g2_dx = 0.0;   // d(g2)/dx
  double dg2_dx = 0.0;  // d(dg2)/dx
};

class WaveBasis {
 public:
  /// Propagates psi_L and psi_R through the stack at angular frequency omega.
  /// Throws NumericalError if the Wronskian vanishes or is not constant
  /// across layers.
  static WaveBasis solve(const LayerStack& stack, double omega, Variant variant = Variant::normal);

  [[nodiscard]] double omega() const { return omega_; }
  [[nodiscard]] Variant variant() const { return variant_; }
  [[nodiscard]] std::size_t layer_count() const { return k_.size(); }
  [[nodiscard]] cplx wavenumber(std::size_t j) const { return k_.at(j); }
  [[nodiscard]] cplx index(std::size_t j) const { return n_.at(j); }
  [[nodiscard]] std::size_t layer_at(double x) const;

  [[nodiscard]] ModeValue left_mode(double x) const { return mode(left_, layer_at(x), x); }
  [[nodiscard]] ModeValue right_mode(double x) const { return mode(right_, layer_at(x), x); }
  /// Mode evaluated with the expansion of an explicit layer (for one-sided
  /// limits at interfaces).
  [[nodiscard]] ModeValue left_mode(std::size_t layer, double x) const { return mode(left_, layer, x); }
  [[nodiscard]] ModeValue right_mode(std::size_t layer, double x) const { return mode(right_, layer, x); }

  /// Wronskian evaluated from the expansion of layer j.
  [[nodiscard]] Scaled wronskian(std::size_t layer) const;
  [[nodiscard]] Scaled wronskian() const { return wronskian_; }

  [[nodiscard]] GreensSample greens(double x, double source) const;
  /// G(x, x) and its total derivative d/dx G(x, x).
  [[nodiscard]] cplx diagonal(double x) const;
  [[nodiscard]] cplx diagonal_derivative(double x) const;

  /// Integrals over the whole of layer j.
  [[nodiscard]] SourceWeights source_weights(double x, std::size_t layer) const;
  /// Integrals over [a, b], a sub-interval of layer j (a may be -inf for the
  /// first layer, b +inf for the last).
  [[nodiscard]] SourceWeights source_weights(double x, std::size_t layer, double a, double b) const;

 private:
  struct Amplitudes {
    cplx forward{0.0, 0.0};   // coefficient of e^{+iks}
    cplx backward{0.0, 0.0};  // coefficient of e^{-iks}
    double log_scale = 0.0;
  };

  [[nodiscard]] ModeValue mode(const std::vector<Amplitudes>& amps, std::size_t j, double x) const;
  [[nodiscard]] Scaled wronskian_from(std::size_t j) const;

  double omega_ = 0.0;
  Variant variant_ = Variant::normal;
  std::vector<double> interfaces_;
  std::vector<double> origins_;
  std::vector<double> begins_;
  std::vector<double> ends_;
  std::vector<cplx> n_;
  std::vector<cplx> k_;
  std::vector<Amplitudes> left_;
  std::vector<Amplitudes> right_;
  Scaled wronskian_;
};

}  // namespace layerfield
