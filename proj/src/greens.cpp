#include "layerfield/greens.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "layerfield/error.hpp"

namespace layerfield {

namespace {

constexpr cplx I{0.0, 1.0};

// Below this |beta| * (b - a) the exponential integral uses its linear limit.
constexpr double kLinearLimit = 1e-6;

// Relative spread of the per-layer Wronskians that counts as a broken basis.
constexpr double kWronskianTolerance = 1e-8;

// Real number as mantissa * exp(log_scale).
struct LogReal {
  double mantissa = 0.0;
  double log_scale = 0.0;
};

LogReal add(LogReal a, LogReal b) {
  if (a.mantissa == 0.0) return b;
  if (b.mantissa == 0.0) return a;
  const double top = std::max(a.log_scale, b.log_scale);
  return {a.mantissa * std::exp(a.log_scale - top) + b.mantissa * std::exp(b.log_scale - top), top};
}

struct ScaledIntegral {
  cplx mantissa;
  double log_scale = 0.0;
};

// int_a^b exp(beta s) ds. a may be -inf (needs Re beta > 0), b may be +inf
// (needs Re beta < 0).
ScaledIntegral exp_integral(cplx beta, double a, double b) {
  const double br = beta.real(), bi = beta.imag();
  if (std::isinf(a) || std::isinf(b)) {
    if (std::isinf(a) && std::isinf(b)) throw NumericalError("source integral over the whole line");
    if (std::isinf(a) && !(br > 0.0)) throw NumericalError("source integral diverges (Im k = 0 in the first layer)");
    if (std::isinf(b) && !(br < 0.0)) throw NumericalError("source integral diverges (Im k = 0 in the last layer)");
    const double end = std::isinf(a) ? b : a;
    const cplx phase = std::exp(I * (bi * end));
    return {std::isinf(a) ? phase / beta : -phase / beta, br * end};
  }
  const double len = b - a;
  if (std::abs(beta) * len < kLinearLimit) {
    return {std::exp(I * (bi * a)) * len * (1.0 + 0.5 * beta * len), br * a};
  }
  const double top = std::max(br * a, br * b);
  return {(std::exp(beta * b - top) - std::exp(beta * a - top)) / beta, top};
}

// int_{s_a}^{s_b} |A e^{iks} + B e^{-iks}|^2 ds, amplitudes excluding their
// log-scale.
LogReal mode_norm(cplx forward, cplx backward, cplx k, double s_a, double s_b) {
  if (!(s_b > s_a)) return {};
  LogReal sum;
  const double kr = k.real(), ki = k.imag();
  if (forward != 0.0) {
    const auto t = exp_integral(-2.0 * ki, s_a, s_b);
    sum = add(sum, {std::norm(forward) * t.mantissa.real(), t.log_scale});
  }
  if (backward != 0.0) {
    const auto t = exp_integral(2.0 * ki, s_a, s_b);
    sum = add(sum, {std::norm(backward) * t.mantissa.real(), t.log_scale});
  }
  if (forward != 0.0 && backward != 0.0) {
    const auto t = exp_integral(cplx(0.0, 2.0 * kr), s_a, s_b);
    sum = add(sum, {2.0 * (forward * std::conj(backward) * t.mantissa).real(), t.log_scale});
  }
  sum.mantissa = std::max(sum.mantissa, 0.0);
  return sum;
}

double scaled_product(double mantissa, double log_scale) {
  return mantissa == 0.0 ? 0.0 : mantissa * std::exp(log_scale);
}

// Multiplies (A, B) by (e^{ik d}, e^{-ik d}) keeping the result in range.
void shift_phase(cplx& forward, cplx& backward, double& log_scale, cplx k, double d) {
  const cplx zf = I * k * d, zb = -I * k * d;
  double top = -std::numeric_limits<double>::infinity();
  if (forward != 0.0) top = std::max(top, zf.real());
  if (backward != 0.0) top = std::max(top, zb.real());
  if (std::isinf(top)) return;
  forward = forward == 0.0 ? forward : forward * std::exp(zf - top);
  backward = backward == 0.0 ? backward : backward * std::exp(zb - top);
  log_scale += top;
}

void normalize(cplx& forward, cplx& backward, double& log_scale) {
  const double m = std::max(std::abs(forward), std::abs(backward));
  if (!(m > 0.0) || !std::isfinite(m)) throw NumericalError("wave basis amplitudes degenerate");
  forward /= m;
  backward /= m;
  log_scale += std::log(m);
}

}  // namespace

cplx Scaled::value() const { return mantissa * std::exp(log_scale); }

InterfaceCoefficients interface_coefficients(cplx n_left, cplx n_right, Variant variant) {
  const cplx sum = n_left + n_right;
  cplx r = (n_left - n_right) / sum;
  const cplx t = 2.0 * n_left / sum;
  if (variant == Variant::flipped) r = -r;
  return {r, t};
}

WaveBasis WaveBasis::solve(const LayerStack& stack, double omega, Variant variant) {
  if (!(omega > 0.0)) throw ValidationError("angular frequency must be > 0");
  WaveBasis b;
  b.omega_ = omega;
  b.variant_ = variant;
  const std::size_t count = stack.size();
  b.interfaces_.assign(stack.interfaces().begin(), stack.interfaces().end());
  for (std::size_t j = 0; j < count; ++j) {
    b.origins_.push_back(stack.origin(j));
    b.begins_.push_back(stack.layer_begin(j));
    b.ends_.push_back(stack.layer_end(j));
    const cplx n = stack.index(j, omega);
    b.n_.push_back(n);
    b.k_.push_back(omega * n / phys::c);
  }

  // psi_L: e^{-iks} in the first layer, carried rightwards.
  b.left_.resize(count);
  b.left_[0] = {0.0, 1.0, 0.0};
  for (std::size_t j = 1; j < count; ++j) {
    Amplitudes a = b.left_[j - 1];
    if (j - 1 > 0) shift_phase(a.forward, a.backward, a.log_scale, b.k_[j - 1], stack.layer(j - 1).thickness);
    // Inverse of (1/t)[[1, r], [r, 1]].
    const auto [r, t] = interface_coefficients(b.n_[j - 1], b.n_[j], variant);
    const cplx f = t / (1.0 - r * r);
    Amplitudes next{f * (a.forward - r * a.backward), f * (a.backward - r * a.forward), a.log_scale};
    normalize(next.forward, next.backward, next.log_scale);
    b.left_[j] = next;
  }

  // psi_R: e^{iks} in the last layer, carried leftwards.
  b.right_.resize(count);
  b.right_[count - 1] = {1.0, 0.0, 0.0};
  for (std::size_t j = count - 1; j-- > 0;) {
    const Amplitudes& a = b.right_[j + 1];
    const auto [r, t] = interface_coefficients(b.n_[j], b.n_[j + 1], variant);
    Amplitudes next{(a.forward + r * a.backward) / t, (r * a.forward + a.backward) / t, a.log_scale};
    // Amplitudes are now referenced to the right end of layer j.
    if (j > 0) shift_phase(next.forward, next.backward, next.log_scale, b.k_[j], -stack.layer(j).thickness);
    normalize(next.forward, next.backward, next.log_scale);
    b.right_[j] = next;
  }

  b.wronskian_ = b.wronskian_from(0);
  if (!(std::abs(b.wronskian_.mantissa) > 1e-13 * 2.0 * std::abs(b.k_[0])))
    throw NumericalError("vanishing Wronskian (bound state at this frequency)");
  const cplx w0 = b.wronskian_.mantissa;
  for (std::size_t j = 1; j < count; ++j) {
    const Scaled wj = b.wronskian_from(j);
    const cplx ratio = wj.mantissa / w0 * std::exp(wj.log_scale - b.wronskian_.log_scale);
    if (std::abs(ratio - 1.0) > kWronskianTolerance)
      throw NumericalError("Wronskian not constant across layers (layer " + std::to_string(j) + ")");
  }
  return b;
}

std::size_t WaveBasis::layer_at(double x) const {
  auto it = std::upper_bound(interfaces_.begin(), interfaces_.end(), x);
  return static_cast<std::size_t>(it - interfaces_.begin());
}

ModeValue WaveBasis::mode(const std::vector<Amplitudes>& amps, std::size_t j, double x) const {
  const Amplitudes& a = amps.at(j);
  const cplx k = k_[j];
  const double s = x - origins_[j];
  const cplx zf = I * k * s, zb = -I * k * s;
  double top = -std::numeric_limits<double>::infinity();
  if (a.forward != 0.0) top = std::max(top, zf.real());
  if (a.backward != 0.0) top = std::max(top, zb.real());
  const cplx ef = a.forward == 0.0 ? cplx{} : a.forward * std::exp(zf - top);
  const cplx eb = a.backward == 0.0 ? cplx{} : a.backward * std::exp(zb - top);
  return {ef + eb, I * k * (ef - eb), a.log_scale + top};
}

Scaled WaveBasis::wronskian_from(std::size_t j) const {
  // At s = 0: psi = A + B, psi' = ik (A - B)  =>  W = 2ik (B_L A_R - A_L B_R).
  const Amplitudes& l = left_[j];
  const Amplitudes& r = right_[j];
  return {2.0 * I * k_[j] * (l.backward * r.forward - l.forward * r.backward), l.log_scale + r.log_scale};
}

Scaled WaveBasis::wronskian(std::size_t layer) const { return wronskian_from(layer); }

GreensSample WaveBasis::greens(double x, double source) const {
  const double lo = std::min(x, source), hi = std::max(x, source);
  const ModeValue l = left_mode(lo);
  const ModeValue r = right_mode(hi);
  const double scale = l.log_scale + r.log_scale - wronskian_.log_scale;
  const cplx f = -std::exp(scale) / wronskian_.mantissa;
  GreensSample g;
  g.value = f * l.value * r.value;
  g.x_derivative = x >= source ? f * l.value * r.derivative : f * l.derivative * r.value;
  g.field_point = x;
  g.source = source;
  g.variant = variant_;
  return g;
}

cplx WaveBasis::diagonal(double x) const {
  const ModeValue l = left_mode(x), r = right_mode(x);
  return -std::exp(l.log_scale + r.log_scale - wronskian_.log_scale) * l.value * r.value / wronskian_.mantissa;
}

cplx WaveBasis::diagonal_derivative(double x) const {
  const ModeValue l = left_mode(x), r = right_mode(x);
  return -std::exp(l.log_scale + r.log_scale - wronskian_.log_scale) *
         (l.derivative * r.value + l.value * r.derivative) / wronskian_.mantissa;
}

SourceWeights WaveBasis::source_weights(double x, std::size_t layer) const {
  return source_weights(x, layer, begins_.at(layer), ends_.at(layer));
}

SourceWeights WaveBasis::source_weights(double x, std::size_t layer, double a, double b) const {
  SourceWeights w;
  if (!(b > a)) return w;
  const double origin = origins_.at(layer);
  const cplx k = k_[layer];

  // For x' < x, G(x, x') = -psi_L(x') psi_R(x) / W; for x' > x,
  // G(x, x') = -psi_L(x) psi_R(x') / W. Within one layer each side is a
  // two-term exponential in x', integrated in closed form.
  const double below_end = std::min(b, x);
  const double above_begin = std::max(a, x);
  LogReal in_left, in_right;
  if (below_end > a) {
    const Amplitudes& amp = left_[layer];
    in_left = mode_norm(amp.forward, amp.backward, k, a - origin, below_end - origin);
    in_left.log_scale += 2.0 * amp.log_scale;
  }
  if (b > above_begin) {
    const Amplitudes& amp = right_[layer];
    in_right = mode_norm(amp.forward, amp.backward, k, above_begin - origin, b - origin);
    in_right.log_scale += 2.0 * amp.log_scale;
  }

  const ModeValue l = left_mode(x), r = right_mode(x);
  const cplx kx = k_[layer_at(x)];
  const cplx l2 = -kx * kx * l.value, r2 = -kx * kx * r.value;  // psi'' = -k^2 psi
  const double inv_w = -2.0 * wronskian_.log_scale - 2.0 * std::log(std::abs(wronskian_.mantissa));

  const double left_log = in_left.log_scale + 2.0 * r.log_scale + inv_w;
  const double right_log = in_right.log_scale + 2.0 * l.log_scale + inv_w;
  const auto combine = [&](double left_factor, double right_factor) {
    return scaled_product(left_factor * in_left.mantissa, left_log) +
           scaled_product(right_factor * in_right.mantissa, right_log);
  };

  w.g2 = combine(std::norm(r.value), std::norm(l.value));
  w.dg2 = combine(std::norm(r.derivative), std::norm(l.derivative));
  w.g2_dx = combine(2.0 * (r.derivative * std::conj(r.value)).real(),
                    2.0 * (l.derivative * std::conj(l.value)).real());
  w.dg2_dx = combine(2.0 * (r2 * std::conj(r.derivative)).real(), 2.0 * (l2 * std::conj(l.derivative)).real());

  // Moving x through the segment transfers x' from the psi_R side to the
  // psi_L side. For |G|^2 the two boundary terms cancel; for |dG/dx|^2 they
  // do not.
  if (x >= a && x < b) {
    const double boundary =
        scaled_product(std::norm(r.derivative) * std::norm(l.value) - std::norm(l.derivative) * std::norm(r.value),
                       2.0 * (l.log_scale + r.log_scale) + inv_w);
    w.dg2_dx += boundary;
  }
  return w;
}

}  // namespace layerfield
