#pragma once

// Position x photon-energy scans and their CSV form.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "layerfield/stack.hpp"
#include "layerfield/thermo.hpp"

namespace layerfield {

enum class Quantity { ldos_e, ldos_m, ldos_tot, n_e, n_m, n_tot, T_e, T_m, T_tot, u, p, zcf, tcf, ncf, slab_force };

std::string_view quantity_name(Quantity q);
std::optional<Quantity> parse_quantity(std::string_view name);

/// paper: LDOS in units of 2/(pi c S); si: LDOS in s/m^3. Everything else
/// is SI in both (temperatures in K, spectral densities per rad/s).
enum class Units { paper, si };

std::string_view units_name(Units u);
std::string_view quantity_unit(Quantity q, Units u);

struct Axis {
  double start = 0.0;
  double stop = 0.0;
  std::size_t count = 200;
  bool log = false;

  [[nodiscard]] std::vector<double> values() const;
};

struct SlabAxis {
  std::size_t layer = 0;
  Axis widths_um;
};

struct ScanSpec {
  nlohmann::json stack_config;  // with tables inlined
  std::vector<Quantity> quantities;
  Axis x_um;  // unused in slab mode
  Axis energy_ev;
  std::optional<SlabAxis> slab;
  std::filesystem::path output;
};

/// Scan spec file:
///   {"config": "stack.json", "quantities": [...],
///    "x_um": {"start", "stop", "count"},
///    "energy_eV": {"start", "stop", "count", "spacing": "linear" | "log"},
///    "slab": {"layer": 2, "width_um": {"start", "stop", "count"}},
///    "output": "out.csv"}
/// "x_um" and "slab" are mutually exclusive; "slab" requires the single
/// quantity "slab_force". Relative paths are resolved against base_dir.
ScanSpec parse_scan_spec(const nlohmann::json& spec, const std::filesystem::path& base_dir = {});

/// The spec as stored in CSV metadata, config inlined and output omitted.
nlohmann::json spec_to_json(const ScanSpec& spec);

/// Solver settings from the optional "balance" block of a stack config:
///   {"slices", "energy_eV": {"start", "stop", "count"}, "relaxation",
///    "tolerance_K", "max_iterations"}
BalanceSettings balance_settings(const nlohmann::json& stack_config);
nlohmann::json balance_to_json(const BalanceSettings& settings);

struct ScanOptions {
  std::size_t threads = 1;
  Units units = Units::paper;
  bool fd_check = false;
};

struct ScanResult {
  std::vector<std::string> columns;  // x_um | width_um, E_eV, quantities...
  std::vector<std::vector<double>> rows;
  nlohmann::json metadata;
  /// Largest |analytic - finite difference| / scale over force cells off
  /// slice boundaries, when fd_check was requested and there are force
  /// columns (NaN otherwise).
  double fd_deviation = 0.0;
};

ScanResult run_scan(const ScanSpec& spec, const ScanOptions& options = {});

/// 64-bit FNV-1a of the compact JSON dump, as 16 hex digits.
std::string stack_hash(const nlohmann::json& stack_config);

/// Writes via a temporary file in the same directory; nothing is left
/// behind on failure.
void write_csv(const ScanResult& result, const std::filesystem::path& path);
std::string format_csv(const ScanResult& result);

/// Reads back the spec and options a CSV was produced with.
struct RecordedScan {
  ScanSpec spec;
  Units units = Units::paper;
};
RecordedScan read_recorded_scan(const std::filesystem::path& csv);

}  // namespace layerfield
