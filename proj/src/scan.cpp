#include "layerfield/scan.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "layerfield/error.hpp"
#include "layerfield/mechanics.hpp"
#include "layerfield/parallel.hpp"

#ifndef LAYERFIELD_VERSION
#define LAYERFIELD_VERSION "dev"
#endif

namespace layerfield {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 15> kQuantityNames = {
    "ldos_e", "ldos_m", "ldos_tot", "n_e", "n_m", "n_tot", "T_e", "T_m",
    "T_tot",  "u",      "p",        "zcf", "tcf", "ncf",   "slab_force"};

bool is_force(Quantity q) { return q == Quantity::zcf || q == Quantity::tcf || q == Quantity::ncf; }

double number(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ValidationError(where + "." + key + ": missing");
  if (!obj[key].is_number()) throw ValidationError(where + "." + key + ": expected a number");
  const double v = obj[key].get<double>();
  if (!std::isfinite(v)) throw ValidationError(where + "." + key + ": must be finite");
  return v;
}

std::size_t count_of(const json& obj, const char* key, const std::string& where, std::size_t fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer() || obj[key].get<long long>() < 1)
    throw ValidationError(where + "." + key + ": expected a positive integer");
  return obj[key].get<std::size_t>();
}

void allow_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ValidationError(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ValidationError(where + ": unknown key '" + key + "'");
  }
}

Axis parse_axis(const json& obj, const std::string& where, bool allow_spacing) {
  if (allow_spacing)
    allow_keys(obj, {"start", "stop", "count", "spacing"}, where);
  else
    allow_keys(obj, {"start", "stop", "count"}, where);
  Axis a;
  a.start = number(obj, "start", where);
  a.stop = number(obj, "stop", where);
  a.count = count_of(obj, "count", where, 200);
  if (obj.contains("spacing")) {
    const std::string s = obj["spacing"].is_string() ? obj["spacing"].get<std::string>() : "";
    if (s != "linear" && s != "log") throw ValidationError(where + ".spacing: expected \"linear\" or \"log\"");
    a.log = s == "log";
  }
  if (a.count > 1 && !(a.stop > a.start)) throw ValidationError(where + ": stop must be greater than start");
  if (a.log && !(a.start > 0.0)) throw ValidationError(where + ": log spacing needs start > 0");
  return a;
}

json axis_json(const Axis& a, bool with_spacing) {
  json j = {{"start", a.start}, {"stop", a.stop}, {"count", a.count}};
  if (with_spacing) j["spacing"] = a.log ? "log" : "linear";
  return j;
}

std::string format_value(double v) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.9g", v);
  return buf.data();
}

std::vector<double> omegas_of(const std::vector<double>& energies) {
  std::vector<double> out;
  out.reserve(energies.size());
  for (double e : energies) out.push_back(omega_from_ev(e));
  return out;
}

void require_positive_energies(const Axis& a) {
  if (!(a.start > 0.0)) throw ValidationError("energy_eV.start: must be > 0");
}

}  // namespace

std::string_view quantity_name(Quantity q) { return kQuantityNames.at(static_cast<std::size_t>(q)); }

std::optional<Quantity> parse_quantity(std::string_view name) {
  for (std::size_t i = 0; i < kQuantityNames.size(); ++i)
    if (kQuantityNames[i] == name) return static_cast<Quantity>(i);
  return std::nullopt;
}

std::string_view units_name(Units u) { return u == Units::paper ? "paper" : "si"; }

std::string_view quantity_unit(Quantity q, Units u) {
  switch (q) {
    case Quantity::ldos_e:
    case Quantity::ldos_m:
    case Quantity::ldos_tot:
      return u == Units::paper ? "2/(pi c S)" : "s/m^3";
    case Quantity::n_e:
    case Quantity::n_m:
    case Quantity::n_tot:
      return "1";
    case Quantity::T_e:
    case Quantity::T_m:
    case Quantity::T_tot:
      return "K";
    case Quantity::u:
      return "J s/(m^3 rad)";
    case Quantity::p:
    case Quantity::slab_force:
      return "Pa s/rad";
    case Quantity::zcf:
    case Quantity::tcf:
    case Quantity::ncf:
      return "N s/(m^3 rad)";
  }
  return "";
}

std::vector<double> Axis::values() const { return log ? logspace(start, stop, count) : linspace(start, stop, count); }

ScanSpec parse_scan_spec(const json& spec, const std::filesystem::path& base_dir) {
  allow_keys(spec, {"config", "quantities", "x_um", "energy_eV", "slab", "output"}, "scan");
  ScanSpec out;

  if (!spec.contains("config")) throw ValidationError("scan.config: missing");
  if (spec["config"].is_string()) {
    const auto path = base_dir / spec["config"].get<std::string>();
    const LayerStack stack = load_stack(path);
    std::ifstream in(path);
    const json raw = json::parse(in, nullptr, false);
    out.stack_config = to_config(stack);
    if (raw.is_object() && raw.contains("balance")) out.stack_config["balance"] = raw["balance"];
  } else if (spec["config"].is_object()) {
    out.stack_config = spec["config"];
  } else {
    throw ValidationError("scan.config: expected a path or an inline stack");
  }

  if (!spec.contains("quantities") || !spec["quantities"].is_array() || spec["quantities"].empty())
    throw ValidationError("scan.quantities: expected a nonempty list");
  for (std::size_t i = 0; i < spec["quantities"].size(); ++i) {
    const json& q = spec["quantities"][i];
    const auto parsed = q.is_string() ? parse_quantity(q.get<std::string>()) : std::nullopt;
    if (!parsed) throw ValidationError("scan.quantities[" + std::to_string(i) + "]: unknown quantity " + q.dump());
    out.quantities.push_back(*parsed);
  }

  if (!spec.contains("energy_eV")) throw ValidationError("scan.energy_eV: missing");
  out.energy_ev = parse_axis(spec["energy_eV"], "scan.energy_eV", true);
  require_positive_energies(out.energy_ev);

  const bool slab_mode = spec.contains("slab");
  const bool wants_slab = std::find(out.quantities.begin(), out.quantities.end(), Quantity::slab_force) !=
                          out.quantities.end();
  if (slab_mode) {
    if (spec.contains("x_um")) throw ValidationError("scan: x_um and slab are mutually exclusive");
    if (out.quantities.size() != 1 || !wants_slab)
      throw ValidationError("scan.quantities: slab scans take exactly [\"slab_force\"]");
    const json& s = spec["slab"];
    allow_keys(s, {"layer", "width_um"}, "scan.slab");
    if (!s.contains("layer") || !s["layer"].is_number_integer() || s["layer"].get<long long>() < 0)
      throw ValidationError("scan.slab.layer: expected a layer index");
    if (!s.contains("width_um")) throw ValidationError("scan.slab.width_um: missing");
    SlabAxis slab;
    slab.layer = s["layer"].get<std::size_t>();
    slab.widths_um = parse_axis(s["width_um"], "scan.slab.width_um", false);
    if (slab.widths_um.start < 0.0) throw ValidationError("scan.slab.width_um.start: must be >= 0");
    out.slab = slab;
  } else {
    if (wants_slab) throw ValidationError("scan.quantities: slab_force needs a \"slab\" block");
    if (!spec.contains("x_um")) throw ValidationError("scan.x_um: missing");
    out.x_um = parse_axis(spec["x_um"], "scan.x_um", false);
  }

  if (spec.contains("output")) {
    if (!spec["output"].is_string()) throw ValidationError("scan.output: expected a path");
    out.output = base_dir / spec["output"].get<std::string>();
  }
  return out;
}

json spec_to_json(const ScanSpec& spec) {
  json j;
  j["config"] = spec.stack_config;
  j["quantities"] = json::array();
  for (Quantity q : spec.quantities) j["quantities"].push_back(std::string(quantity_name(q)));
  j["energy_eV"] = axis_json(spec.energy_ev, true);
  if (spec.slab)
    j["slab"] = {{"layer", spec.slab->layer}, {"width_um", axis_json(spec.slab->widths_um, false)}};
  else
    j["x_um"] = axis_json(spec.x_um, false);
  return j;
}

BalanceSettings balance_settings(const json& stack_config) {
  BalanceSettings s;
  if (!stack_config.contains("balance")) return s;
  const json& b = stack_config["balance"];
  allow_keys(b, {"slices", "energy_eV", "relaxation", "tolerance_K", "max_iterations"}, "balance");
  s.slices = count_of(b, "slices", "balance", s.slices);
  if (b.contains("energy_eV")) {
    const Axis a = parse_axis(b["energy_eV"], "balance.energy_eV", false);
    if (!(a.start > 0.0)) throw ValidationError("balance.energy_eV.start: must be > 0");
    if (a.count < 2) throw ValidationError("balance.energy_eV.count: must be >= 2");
    s.grid = FrequencyGrid::log_ev(a.start, a.stop, a.count);
  }
  if (b.contains("relaxation")) s.relaxation = number(b, "relaxation", "balance");
  if (b.contains("tolerance_K")) s.tolerance_kelvin = number(b, "tolerance_K", "balance");
  if (b.contains("max_iterations"))
    s.max_iterations = static_cast<int>(count_of(b, "max_iterations", "balance", 100));
  return s;
}

json balance_to_json(const BalanceSettings& s) {
  const auto w = s.grid.omegas();
  return {{"slices", s.slices},
          {"energy_eV", {{"start", ev_from_omega(w.front())}, {"stop", ev_from_omega(w.back())}, {"count", w.size()}}},
          {"relaxation", s.relaxation},
          {"tolerance_K", s.tolerance_kelvin},
          {"max_iterations", s.max_iterations}};
}

std::string stack_hash(const json& stack_config) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : stack_config.dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::array<char, 17> buf{};
  std::snprintf(buf.data(), buf.size(), "%016llx", static_cast<unsigned long long>(h));
  return buf.data();
}

ScanResult run_scan(const ScanSpec& spec, const ScanOptions& options) {
  const LayerStack base = build_stack(spec.stack_config);
  BalanceSettings settings = balance_settings(spec.stack_config);
  settings.threads = options.threads;

  const std::vector<double> energies = spec.energy_ev.values();
  const std::vector<double> omegas = omegas_of(energies);

  ScanResult result;
  result.metadata = {{"tool", "layerfield"},
                     {"version", LAYERFIELD_VERSION},
                     {"stack_hash", stack_hash(spec.stack_config)},
                     {"units", std::string(units_name(options.units))},
                     {"balance", balance_to_json(settings)},
                     {"spec", spec_to_json(spec)}};
  result.columns.push_back(spec.slab ? "width_um" : "x_um");
  result.columns.push_back("E_eV");
  for (Quantity q : spec.quantities) result.columns.push_back(std::string(quantity_name(q)));
  result.fd_deviation = options.fd_check ? 0.0 : std::nan("");

  if (spec.slab) {
    const std::vector<double> widths = spec.slab->widths_um.values();
    result.rows.assign(widths.size() * energies.size(), {});
    parallel_for(widths.size(), options.threads, [&](std::size_t iw) {
      const SlabGeometry geom = resize_slab(base, spec.slab->layer, widths[iw] * um);
      geom.stack.check_frequencies(omegas);
      BalanceSettings local = settings;
      local.threads = 1;
      const TemperatureProfile profile = resolve_profile(geom.stack, local);
      for (std::size_t ie = 0; ie < energies.size(); ++ie) {
        const BasisPair bases = BasisPair::solve(geom.stack, omegas[ie]);
        const double f = net_force(geom.stack, bases, profile, geom.x_left, geom.x_right);
        result.rows[iw * energies.size() + ie] = {widths[iw], energies[ie], f};
      }
    });
    return result;
  }

  base.check_frequencies(omegas);
  const TemperatureProfile profile = resolve_profile(base, settings);
  const std::vector<double> xs = spec.x_um.values();
  bool needs_force = false;
  for (Quantity q : spec.quantities) needs_force = needs_force || is_force(q);
  if (needs_force)
    for (double x : xs)
      if (base.on_interface(x * um))
        throw ValidationError("scan.x_um: x = " + format_value(x) +
                              " um lies on an interface where force densities are singular");

  const double ldos_scale = options.units == Units::paper ? phys::ldos_unit : 1.0;
  result.rows.assign(xs.size() * energies.size(), {});
  std::vector<double> fd_worst(energies.size(), 0.0);
  parallel_for(energies.size(), options.threads, [&](std::size_t ie) {
    const BasisPair bases = BasisPair::solve(base, omegas[ie]);
    for (std::size_t ix = 0; ix < xs.size(); ++ix) {
      const double x = xs[ix] * um;
      const SpectralField f = evaluate(base, bases, profile, x);
      const EnergyPressureSample ep = energy_pressure(f);
      const ForceDensitySample fd = needs_force ? force_density(f) : ForceDensitySample{};
      std::vector<double> row{xs[ix], energies[ie]};
      for (Quantity q : spec.quantities) {
        double v = 0.0;
        switch (q) {
          case Quantity::ldos_e: v = f.ldos.electric / ldos_scale; break;
          case Quantity::ldos_m: v = f.ldos.magnetic / ldos_scale; break;
          case Quantity::ldos_tot: v = f.ldos.total / ldos_scale; break;
          case Quantity::n_e: v = f.photons.electric; break;
          case Quantity::n_m: v = f.photons.magnetic; break;
          case Quantity::n_tot: v = f.photons.total; break;
          case Quantity::T_e: v = f.temperatures.electric; break;
          case Quantity::T_m: v = f.temperatures.magnetic; break;
          case Quantity::T_tot: v = f.temperatures.total; break;
          case Quantity::u: v = ep.energy_density; break;
          case Quantity::p: v = ep.pressure; break;
          case Quantity::zcf: v = fd.zcf; break;
          case Quantity::tcf: v = fd.tcf; break;
          case Quantity::ncf: v = fd.ncf; break;
          case Quantity::slab_force: break;
        }
        if (!std::isfinite(v))
          throw NumericalError("non-finite " + std::string(quantity_name(q)) + " at x = " + format_value(xs[ix]) +
                               " um, E = " + format_value(energies[ie]) + " eV");
        row.push_back(v);
      }
      if (options.fd_check && needs_force && smooth_half_width(base, profile, x) > 0.0) {
        const double check = force_density_finite_difference(base, bases, profile, x);
        // Force densities scale like u k; below 1e-8 of that both routes are roundoff.
        const double k = omegas[ie] / phys::c * std::abs(f.index);
        const double scale = std::max({std::abs(fd.total), std::abs(check), 1e-8 * ep.energy_density * k});
        fd_worst[ie] = std::max(fd_worst[ie], std::abs(fd.total - check) / scale);
      }
      result.rows[ix * energies.size() + ie] = std::move(row);
    }
  });
  if (options.fd_check && needs_force)
    for (double d : fd_worst) result.fd_deviation = std::max(result.fd_deviation, d);
  else
    result.fd_deviation = std::nan("");
  return result;
}

std::string format_csv(const ScanResult& result) {
  std::ostringstream out;
  out << "# layerfield scan\n";
  for (const char* key : {"tool", "version", "stack_hash", "units", "balance", "spec"})
    out << "# " << key << ": " << result.metadata.at(key).dump() << '\n';
  {
    const auto& spec = result.metadata.at("spec");
    Units units = result.metadata.at("units") == "si" ? Units::si : Units::paper;
    out << "# column_units:";
    for (const auto& q : spec.at("quantities"))
      out << ' ' << q.get<std::string>() << '=' << quantity_unit(*parse_quantity(q.get<std::string>()), units) << ';';
    out << '\n';
  }
  for (std::size_t i = 0; i < result.columns.size(); ++i) out << (i ? "," : "") << result.columns[i];
  out << '\n';
  for (const auto& row : result.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_value(row[i]);
    out << '\n';
  }
  return out.str();
}

void write_csv(const ScanResult& result, const std::filesystem::path& path) {
  const std::string text = format_csv(result);
  std::filesystem::path tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << text;
    out.close();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("failed writing " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into place at " + path.string());
  }
}

RecordedScan read_recorded_scan(const std::filesystem::path& csv) {
  std::ifstream in(csv);
  if (!in) throw IoError("cannot open " + csv.string());
  std::string line;
  std::optional<json> spec;
  Units units = Units::paper;
  while (std::getline(in, line) && line.rfind("#", 0) == 0) {
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    const std::string key = line.substr(2, colon - 2);
    const std::string value = line.substr(colon + 1);
    try {
      if (key == "spec") spec = json::parse(value);
      if (key == "units") units = json::parse(value) == "si" ? Units::si : Units::paper;
    } catch (const json::exception& e) {
      throw ValidationError(csv.string() + ": malformed metadata line '" + key + "': " + e.what());
    }
  }
  if (!spec) throw ValidationError(csv.string() + ": no spec in the metadata block");
  RecordedScan r{parse_scan_spec(*spec), units};
  return r;
}

}  // namespace layerfield
