#include "layerfield/stack.hpp"

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "layerfield/error.hpp"

namespace layerfield {

namespace {

std::string layer_name(std::size_t j, const Layer& layer) {
  std::string s = "layer " + std::to_string(j);
  if (!layer.label.empty()) s += " (" + layer.label + ")";
  return s;
}

[[noreturn]] void fail(std::size_t j, const Layer& layer, const std::string& rule) {
  throw ValidationError(layer_name(j, layer) + ": " + rule);
}

}  // namespace

// ---------------------------------------------------------------------------
// IndexModel

IndexModel IndexModel::constant(cplx n) {
  IndexModel m;
  m.constant_ = n;
  return m;
}

IndexModel IndexModel::tabulated(std::vector<Node> nodes, std::string source) {
  if (nodes.size() < 2) throw ValidationError("index table needs at least two rows");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!(nodes[i].omega > 0.0) || !std::isfinite(nodes[i].omega))
      throw ValidationError("index table: frequencies must be finite and > 0");
    if (i > 0 && !(nodes[i].omega > nodes[i - 1].omega))
      throw ValidationError("index table: frequencies must be strictly increasing");
  }
  IndexModel m;
  m.nodes_ = std::move(nodes);
  m.source_ = std::move(source);
  return m;
}

cplx IndexModel::at(double omega) const {
  if (nodes_.empty()) return constant_;
  if (omega < nodes_.front().omega || omega > nodes_.back().omega) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "photon energy %.6g eV outside index table range [%.6g, %.6g] eV",
                  ev_from_omega(omega), ev_from_omega(nodes_.front().omega),
                  ev_from_omega(nodes_.back().omega));
    throw ValidationError(buf);
  }
  auto hi = std::upper_bound(nodes_.begin(), nodes_.end(), omega,
                             [](double w, const Node& n) { return w < n.omega; });
  if (hi == nodes_.end()) return nodes_.back().n;
  auto lo = hi - 1;
  const double t = (omega - lo->omega) / (hi->omega - lo->omega);
  return lo->n + t * (hi->n - lo->n);
}

std::vector<double> IndexModel::probe_frequencies() const {
  std::vector<double> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    out.push_back(nodes_[i].omega);
    if (i + 1 < nodes_.size()) out.push_back(0.5 * (nodes_[i].omega + nodes_[i + 1].omega));
  }
  return out;
}

// ---------------------------------------------------------------------------
// LayerStack

LayerStack::LayerStack(std::vector<Layer> layers, std::string name)
    : layers_(std::move(layers)), name_(std::move(name)) {
  validate_structure();
  check_probes();
}

LayerStack::LayerStack(std::vector<Layer> layers, std::string name, Unchecked)
    : layers_(std::move(layers)), name_(std::move(name)), outer_rule_(false) {
  validate_structure();
}

LayerStack LayerStack::unchecked_outer(std::vector<Layer> layers, std::string name) {
  LayerStack s(std::move(layers), std::move(name), Unchecked{});
  s.check_probes();
  return s;
}

void LayerStack::validate_structure() {
  if (layers_.size() < 2) throw ValidationError("stack: at least two layers are required");
  const std::size_t last = layers_.size() - 1;
  for (std::size_t j = 0; j <= last; ++j) {
    const auto& l = layers_[j];
    const bool outer = j == 0 || j == last;
    if (outer && !l.semi_infinite()) fail(j, l, "first and last layers must be semi-infinite");
    if (!outer && l.semi_infinite()) fail(j, l, "only the first and last layers may be semi-infinite");
    if (!outer && !(std::isfinite(l.thickness) && l.thickness > 0.0))
      fail(j, l, "thickness must be finite and > 0");
    if (l.temperature.kind == TemperatureKind::fixed &&
        !(std::isfinite(l.temperature.kelvin) && l.temperature.kelvin > 0.0))
      fail(j, l, "temperature must be > 0 K");
  }
  interfaces_.clear();
  double x = 0.0;
  interfaces_.push_back(x);
  for (std::size_t j = 1; j < last; ++j) {
    x += layers_[j].thickness;
    interfaces_.push_back(x);
  }
}

void LayerStack::check_probes() const {
  for (std::size_t j = 0; j < layers_.size(); ++j) {
    const auto& idx = layers_[j].index;
    if (idx.is_constant()) check_layer(j, 1.0);
    else
      for (double w : idx.probe_frequencies()) check_layer(j, w);
  }
}

void LayerStack::check_layer(std::size_t j, double omega) const {
  const auto& l = layers_[j];
  const cplx n = l.index.at(omega);
  if (n.imag() < 0.0) fail(j, l, "Im[n] must be >= 0 (passive media only)");
  const bool outer = j == 0 || j + 1 == layers_.size();
  if (outer && outer_rule_ && !(loss(n) > 0.0)) fail(j, l, "outer layers must be lossy (Im[n^2] > 0)");
  if (l.temperature.kind != TemperatureKind::none && !(loss(n) > 0.0))
    fail(j, l, "layer with a temperature must be lossy (Im[n^2] > 0)");
}

void LayerStack::check_frequencies(std::span<const double> omegas) const {
  for (double w : omegas) {
    if (!(w > 0.0)) throw ValidationError("frequencies must be > 0");
    for (std::size_t j = 0; j < layers_.size(); ++j) check_layer(j, w);
  }
}

double LayerStack::layer_begin(std::size_t j) const {
  return j == 0 ? -kInfinity : interfaces_.at(j - 1);
}

double LayerStack::layer_end(std::size_t j) const {
  return j + 1 == layers_.size() ? kInfinity : interfaces_.at(j);
}

std::size_t LayerStack::layer_at(double x) const {
  // First interface strictly greater than x; equal positions go right.
  auto it = std::upper_bound(interfaces_.begin(), interfaces_.end(), x);
  return static_cast<std::size_t>(it - interfaces_.begin());
}

bool LayerStack::on_interface(double x) const {
  return std::binary_search(interfaces_.begin(), interfaces_.end(), x);
}

double LayerStack::origin(std::size_t j) const { return j == 0 ? 0.0 : interfaces_.at(j - 1); }

cplx LayerStack::refractive_index(double x, double omega) const { return index(layer_at(x), omega); }

bool LayerStack::has_self_consistent() const {
  return std::any_of(layers_.begin(), layers_.end(), [](const Layer& l) {
    return l.temperature.kind == TemperatureKind::self_consistent;
  });
}

std::optional<std::pair<double, double>> LayerStack::fixed_temperature_range() const {
  std::optional<std::pair<double, double>> r;
  for (const auto& l : layers_) {
    if (l.temperature.kind != TemperatureKind::fixed) continue;
    const double t = l.temperature.kelvin;
    if (!r) r = std::pair{t, t};
    else r = std::pair{std::min(r->first, t), std::max(r->second, t)};
  }
  return r;
}

// ---------------------------------------------------------------------------
// Complex parsing

cplx parse_complex(const std::string& text) {
  std::string s;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
  const auto bad = [&]() -> ValidationError {
    return ValidationError("malformed complex number '" + text + "' (expected e.g. 1.5+0.3i)");
  };
  if (s.empty()) throw bad();

  const char* p = s.c_str();
  char* end = nullptr;
  const double first = std::strtod(p, &end);
  if (end == p) {
    // "i", "+i", "-i"
    if (s == "i" || s == "+i") return {0.0, 1.0};
    if (s == "-i") return {0.0, -1.0};
    throw bad();
  }
  if (!std::isfinite(first)) throw bad();
  if (*end == '\0') return {first, 0.0};
  if (*end == 'i' && end[1] == '\0') return {0.0, first};
  if (*end != '+' && *end != '-') throw bad();
  const char* q = end;
  char* end2 = nullptr;
  double second = std::strtod(q, &end2);
  if (end2 == q) {
    // "1+i"
    if ((q[0] == '+' || q[0] == '-') && q[1] == 'i' && q[2] == '\0')
      return {first, q[0] == '+' ? 1.0 : -1.0};
    throw bad();
  }
  if (*end2 != 'i' || end2[1] != '\0') throw bad();
  if (!std::isfinite(first) || !std::isfinite(second)) throw bad();
  return {first, second};
}

// Shortest representation that parses back to the same doubles.
std::string format_complex(cplx n) {
  const auto shortest = [](double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
  };
  std::string out = shortest(n.real());
  if (n.imag() == 0.0) return out;
  const std::string im = shortest(n.imag());
  return out + (im.front() == '-' ? "" : "+") + im + "i";
}

// ---------------------------------------------------------------------------
// Config

namespace {

using nlohmann::json;

void require_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ValidationError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ValidationError(where + ": unknown key '" + key + "'");
  }
}

IndexModel parse_index(const json& v, const std::string& where, const std::filesystem::path& base_dir) {
  if (v.is_number()) return IndexModel::constant(v.get<double>());
  if (v.is_string()) {
    try {
      return IndexModel::constant(parse_complex(v.get<std::string>()));
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
  require_keys(v, {"table", "table_eV"}, where);
  if (v.contains("table") == v.contains("table_eV"))
    throw ValidationError(where + ": give exactly one of 'table' or 'table_eV'");
  if (v.contains("table")) {
    if (!v["table"].is_string()) throw ValidationError(where + ".table: expected a file path");
    std::filesystem::path p = v["table"].get<std::string>();
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    try {
      return read_index_table(p);
    } catch (const ValidationError& e) {
      throw ValidationError(where + ".table: " + e.what());
    }
  }
  const auto& rows = v["table_eV"];
  if (!rows.is_array()) throw ValidationError(where + ".table_eV: expected [[E_eV, re, im], ...]");
  std::vector<IndexModel::Node> nodes;
  for (const auto& row : rows) {
    if (!row.is_array() || row.size() != 3 || !row[0].is_number() || !row[1].is_number() ||
        !row[2].is_number())
      throw ValidationError(where + ".table_eV: each row must be [E_eV, re, im]");
    nodes.push_back({omega_from_ev(row[0].get<double>()), {row[1].get<double>(), row[2].get<double>()}});
  }
  try {
    return IndexModel::tabulated(std::move(nodes));
  } catch (const ValidationError& e) {
    throw ValidationError(where + ".table_eV: " + e.what());
  }
}

Layer parse_layer(const json& v, std::size_t j, const std::filesystem::path& base_dir) {
  const std::string where = "layers[" + std::to_string(j) + "]";
  require_keys(v, {"thickness_um", "n", "temperature", "label"}, where);
  for (const char* key : {"thickness_um", "n", "temperature"})
    if (!v.contains(key)) throw ValidationError(where + ": missing key '" + key + "'");

  Layer layer;
  if (v.contains("label")) {
    if (!v["label"].is_string()) throw ValidationError(where + ".label: expected a string");
    layer.label = v["label"].get<std::string>();
  }

  const auto& th = v["thickness_um"];
  if (th.is_string()) {
    if (th.get<std::string>() != "inf")
      throw ValidationError(where + ".thickness_um: expected a number or \"inf\"");
    layer.thickness = kInfinity;
  } else if (th.is_number()) {
    const double t = th.get<double>();
    if (!std::isfinite(t) || t <= 0.0) throw ValidationError(where + ".thickness_um: must be > 0");
    layer.thickness = t * um;
  } else {
    throw ValidationError(where + ".thickness_um: expected a number or \"inf\"");
  }

  layer.index = parse_index(v["n"], where + ".n", base_dir);

  const auto& temp = v["temperature"];
  if (temp.is_number()) {
    const double t = temp.get<double>();
    if (!std::isfinite(t) || t <= 0.0) throw ValidationError(where + ".temperature: must be > 0 K");
    layer.temperature = TemperatureSpec::fixed(t);
  } else if (temp.is_string() && temp.get<std::string>() == "self-consistent") {
    layer.temperature = TemperatureSpec::self_consistent();
  } else if (temp.is_string() && temp.get<std::string>() == "none") {
    layer.temperature = TemperatureSpec::none();
  } else {
    throw ValidationError(where + ".temperature: expected kelvin, \"self-consistent\" or \"none\"");
  }
  return layer;
}

}  // namespace

LayerStack build_stack(const nlohmann::json& config, const std::filesystem::path& base_dir) {
  require_keys(config, {"name", "layers", "balance"}, "stack");
  if (!config.contains("layers") || !config["layers"].is_array())
    throw ValidationError("stack: 'layers' must be a list");
  std::string name;
  if (config.contains("name")) {
    if (!config["name"].is_string()) throw ValidationError("stack.name: expected a string");
    name = config["name"].get<std::string>();
  }
  std::vector<Layer> layers;
  std::size_t j = 0;
  for (const auto& v : config["layers"]) layers.push_back(parse_layer(v, j++, base_dir));
  return LayerStack(std::move(layers), std::move(name));
}

LayerStack load_stack(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json config;
  try {
    config = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return build_stack(config, path.parent_path());
}

nlohmann::json to_config(const LayerStack& stack) {
  nlohmann::json out;
  if (!stack.name().empty()) out["name"] = stack.name();
  out["layers"] = nlohmann::json::array();
  for (const auto& l : stack.layers()) {
    nlohmann::json v;
    if (!l.label.empty()) v["label"] = l.label;
    if (l.semi_infinite()) v["thickness_um"] = "inf";
    else v["thickness_um"] = l.thickness / um;
    if (l.index.is_constant()) {
      v["n"] = format_complex(l.index.constant_value());
    } else {
      auto rows = nlohmann::json::array();
      for (const auto& node : l.index.nodes())
        rows.push_back({ev_from_omega(node.omega), node.n.real(), node.n.imag()});
      v["n"] = {{"table_eV", rows}};
    }
    switch (l.temperature.kind) {
      case TemperatureKind::none: v["temperature"] = "none"; break;
      case TemperatureKind::fixed: v["temperature"] = l.temperature.kelvin; break;
      case TemperatureKind::self_consistent: v["temperature"] = "self-consistent"; break;
    }
    out["layers"].push_back(std::move(v));
  }
  return out;
}

IndexModel read_index_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open index table " + path.string());
  std::vector<IndexModel::Node> nodes;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::replace(line.begin(), line.end(), ',', ' ');
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream row(line);
    double e = 0, re = 0, im = 0;
    if (!(row >> e >> re >> im))
      throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": expected E_eV re im");
    nodes.push_back({omega_from_ev(e), {re, im}});
  }
  return IndexModel::tabulated(std::move(nodes), path.string());
}

// ---------------------------------------------------------------------------
// TemperatureProfile

TemperatureProfile TemperatureProfile::from_stack(const LayerStack& stack, std::size_t slices,
                                                  std::optional<double> initial_kelvin) {
  if (slices == 0) throw ValidationError("slice count must be >= 1");
  TemperatureProfile p;
  double guess = 0.0;
  if (stack.has_self_consistent()) {
    if (initial_kelvin) {
      guess = *initial_kelvin;
    } else {
      const auto range = stack.fixed_temperature_range();
      if (!range) throw ValidationError("self-consistent layers need at least one fixed-temperature layer");
      guess = 0.5 * (range->first + range->second);
    }
  }
  for (std::size_t j = 0; j < stack.size(); ++j) {
    const auto& l = stack.layer(j);
    const double a = stack.layer_begin(j), b = stack.layer_end(j);
    switch (l.temperature.kind) {
      case TemperatureKind::none: break;
      case TemperatureKind::fixed: p.segments_.push_back({j, a, b, l.temperature.kelvin}); break;
      case TemperatureKind::self_consistent:
        for (std::size_t m = 0; m < slices; ++m) {
          const double lo = m == 0 ? a : a + (b - a) * static_cast<double>(m) / static_cast<double>(slices);
          const double hi =
              m + 1 == slices ? b : a + (b - a) * static_cast<double>(m + 1) / static_cast<double>(slices);
          p.free_.push_back(p.segments_.size());
          p.segments_.push_back({j, lo, hi, guess});
        }
        break;
    }
  }
  p.validate();
  return p;
}

TemperatureProfile TemperatureProfile::uniform(const LayerStack& stack, double kelvin) {
  TemperatureProfile p;
  for (std::size_t j = 0; j < stack.size(); ++j)
    if (stack.layer(j).temperature.kind != TemperatureKind::none)
      p.segments_.push_back({j, stack.layer_begin(j), stack.layer_end(j), kelvin});
  p.validate();
  return p;
}

void TemperatureProfile::validate() const {
  for (const auto& s : segments_)
    if (!(s.kelvin > 0.0) || !std::isfinite(s.kelvin))
      throw ValidationError("layer " + std::to_string(s.layer) + ": temperature must be > 0 K");
}

std::optional<double> TemperatureProfile::temperature_at(double x, const LayerStack& stack) const {
  const std::size_t j = stack.layer_at(x);
  for (const auto& s : segments_) {
    if (s.layer != j) continue;
    // Right-wins within a layer as well.
    if (x >= s.begin && x < s.end) return s.kelvin;
    if (x == s.begin) return s.kelvin;
  }
  return std::nullopt;
}

bool TemperatureProfile::covers_layer(std::size_t layer) const {
  return std::any_of(segments_.begin(), segments_.end(),
                     [&](const TemperatureSegment& s) { return s.layer == layer; });
}

TemperatureProfile TemperatureProfile::with_free_temperatures(std::span<const double> kelvin) const {
  if (kelvin.size() != free_.size()) throw ValidationError("temperature count does not match the free slices");
  TemperatureProfile p = *this;
  for (std::size_t i = 0; i < free_.size(); ++i) p.segments_[free_[i]].kelvin = kelvin[i];
  p.validate();
  return p;
}

}  // namespace layerfield
