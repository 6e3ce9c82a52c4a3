#pragma once

// Layered 1D geometry: complex-index layers, temperatures, and the
// configuration format that describes them.
//
// Coordinates are global x in meters with x = 0 at the first interface.
// The first layer occupies x < 0, the last layer extends to +inf.

#include <cstddef>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "layerfield/constants.hpp"

namespace layerfield {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Complex refractive index n(omega): a constant, or a table over angular
/// frequency with linear interpolation. Evaluation outside the table throws.
class IndexModel {
 public:
  struct Node {
    double omega;
    cplx n;
  };

  static IndexModel constant(cplx n);
  /// Nodes must be strictly increasing in omega; at least two are required.
  static IndexModel tabulated(std::vector<Node> nodes, std::string source = {});

  [[nodiscard]] cplx at(double omega) const;
  [[nodiscard]] bool is_constant() const { return nodes_.empty(); }
  [[nodiscard]] cplx constant_value() const { return constant_; }
  [[nodiscard]] std::span<const Node> nodes() const { return nodes_; }
  /// Path the table was read from, if any (kept for diagnostics only).
  [[nodiscard]] const std::string& source() const { return source_; }

  /// Frequencies at which invariants are checked when no scan grid is known:
  /// for tables, every node plus every midpoint.
  [[nodiscard]] std::vector<double> probe_frequencies() const;

 private:
  cplx constant_{1.0, 0.0};
  std::vector<Node> nodes_;
  std::string source_;
};

enum class TemperatureKind { none, fixed, self_consistent };

struct TemperatureSpec {
  TemperatureKind kind = TemperatureKind::none;
  double kelvin = 0.0;  // meaningful for kind == fixed

  static TemperatureSpec none() { return {}; }
  static TemperatureSpec fixed(double kelvin) { return {TemperatureKind::fixed, kelvin}; }
  static TemperatureSpec self_consistent() { return {TemperatureKind::self_consistent, 0.0}; }
};

struct Layer {
  double thickness = kInfinity;  // meters, or kInfinity for the outer layers
  IndexModel index = IndexModel::constant(1.0);
  TemperatureSpec temperature;
  std::string label;

  [[nodiscard]] bool semi_infinite() const { return thickness == kInfinity; }
};

/// Im[n^2] of a complex index; positive for absorbing media.
inline double loss(cplx n) { return (n * n).imag(); }

/// Validated, immutable stack of layers.
class LayerStack {
 public:
  /// Validates the frequency-independent invariants and, for constant or
  /// tabulated indices, the loss requirements at the index probe
  /// frequencies. Throws ValidationError naming the layer and rule.
  explicit LayerStack(std::vector<Layer> layers, std::string name = {});

  /// Same, but skips the "outer layers must be lossy" rule. Only the
  /// homogeneous-medium test harnesses use this; source integrals diverge
  /// on such stacks.
  static LayerStack unchecked_outer(std::vector<Layer> layers, std::string name = {});

  [[nodiscard]] std::size_t size() const { return layers_.size(); }
  [[nodiscard]] const Layer& layer(std::size_t j) const { return layers_.at(j); }
  [[nodiscard]] std::span<const Layer> layers() const { return layers_; }
  [[nodiscard]] const std::string& name() const { return name_; }

  /// Interface positions x_0 = 0 < x_1 < ... (size() - 1 entries).
  [[nodiscard]] std::span<const double> interfaces() const { return interfaces_; }
  [[nodiscard]] double layer_begin(std::size_t j) const;
  [[nodiscard]] double layer_end(std::size_t j) const;

  /// Layer containing x. A point on an interface belongs to the layer on
  /// its right.
  [[nodiscard]] std::size_t layer_at(double x) const;
  [[nodiscard]] bool on_interface(double x) const;

  /// Origin of the layer-local coordinate s = x - origin(j): the right
  /// interface for the first layer, the left interface otherwise.
  [[nodiscard]] double origin(std::size_t j) const;
  [[nodiscard]] double to_local(std::size_t j, double x) const { return x - origin(j); }
  [[nodiscard]] double to_global(std::size_t j, double s) const { return s + origin(j); }

  [[nodiscard]] cplx index(std::size_t j, double omega) const { return layers_[j].index.at(omega); }
  /// n(x, omega), with the interface convention of layer_at().
  [[nodiscard]] cplx refractive_index(double x, double omega) const;

  /// Checks the loss invariants at explicit frequencies (scan grids).
  void check_frequencies(std::span<const double> omegas) const;

  [[nodiscard]] bool has_self_consistent() const;
  /// [min, max] of fixed temperatures, if any layer has one.
  [[nodiscard]] std::optional<std::pair<double, double>> fixed_temperature_range() const;

 private:
  struct Unchecked {};
  LayerStack(std::vector<Layer> layers, std::string name, Unchecked);
  void validate_structure();
  void check_probes() const;
  void check_layer(std::size_t j, double omega) const;

  std::vector<Layer> layers_;
  std::vector<double> interfaces_;
  std::string name_;
  bool outer_rule_ = true;
};

/// Parses "re+im i" style complex numbers: "1.5+0.3i", "2.5", "0.1i",
/// "1.5 - 0.2 i". Throws ValidationError on malformed input.
cplx parse_complex(const std::string& text);
std::string format_complex(cplx n);

/// Builds a stack from its JSON description. Relative table paths are
/// resolved against base_dir. Keys are strict; unknown keys are errors.
LayerStack build_stack(const nlohmann::json& config, const std::filesystem::path& base_dir = {});
LayerStack load_stack(const std::filesystem::path& path);

/// Inverse of build_stack (tables are written inline).
nlohmann::json to_config(const LayerStack& stack);

/// Reads a three-column table (photon energy in eV, Re n, Im n); '#' lines
/// and blank lines are skipped, separators may be commas or whitespace.
IndexModel read_index_table(const std::filesystem::path& path);

/// Temperature of one piece of a lossy layer. Fixed layers have one segment
/// spanning the layer; self-consistent layers are split into slices.
struct TemperatureSegment {
  std::size_t layer = 0;
  double begin = 0.0;
  double end = 0.0;
  double kelvin = 0.0;

  [[nodiscard]] double midpoint() const { return 0.5 * (begin + end); }
};

class TemperatureProfile {
 public:
  TemperatureProfile() = default;
  /// Fixed layers get their temperature; each self-consistent layer is cut
  /// into `slices` equal slices at `initial_kelvin` (default: the middle of
  /// the fixed temperature range).
  static TemperatureProfile from_stack(const LayerStack& stack, std::size_t slices = 1,
                                       std::optional<double> initial_kelvin = std::nullopt);
  /// Every layer that has a temperature spec (fixed or self-consistent) at `kelvin`.
  static TemperatureProfile uniform(const LayerStack& stack, double kelvin);

  [[nodiscard]] std::span<const TemperatureSegment> segments() const { return segments_; }
  /// Indices into segments() that belong to self-consistent layers.
  [[nodiscard]] std::span<const std::size_t> free_segments() const { return free_; }
  [[nodiscard]] std::optional<double> temperature_at(double x, const LayerStack& stack) const;
  [[nodiscard]] bool covers_layer(std::size_t layer) const;

  /// Copy with the free segments set to `kelvin` (same order as free_segments()).
  [[nodiscard]] TemperatureProfile with_free_temperatures(std::span<const double> kelvin) const;

 private:
  void validate() const;

  std::vector<TemperatureSegment> segments_;
  std::vector<std::size_t> free_;
};

}  // namespace layerfield
