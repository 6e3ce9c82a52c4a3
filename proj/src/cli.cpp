#include "layerfield/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "layerfield/error.hpp"
#include "layerfield/scan.hpp"
#include "layerfield/spectral.hpp"
#include "layerfield/thermo.hpp"

#ifndef LAYERFIELD_VERSION
#define LAYERFIELD_VERSION "dev"
#endif

namespace layerfield::cli {

namespace {

using nlohmann::json;

struct Options {
  std::size_t threads = 1;
  std::string units;  // empty: paper, or whatever a recorded scan used
  bool fd_check = false;
  std::string target;
  std::string output;
  std::size_t slices = 0;  // 0: from the config
};

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

bool looks_like_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in.peek() == '#';
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

// Probe frequency for the closure check: inside every table's range.
double closure_omega(const LayerStack& stack) {
  double lo = 0.0, hi = std::numeric_limits<double>::infinity();
  for (const auto& l : stack.layers()) {
    if (l.index.is_constant()) continue;
    lo = std::max(lo, l.index.nodes().front().omega);
    hi = std::min(hi, l.index.nodes().back().omega);
  }
  if (std::isinf(hi)) return omega_from_ev(0.1);
  if (!(hi >= lo)) throw ValidationError("index tables have no common frequency range");
  return 0.5 * (lo + hi);
}

int validate(const Options& o) {
  const std::filesystem::path path = o.target;
  const json config = read_json(path);
  const LayerStack stack = build_stack(config, path.parent_path());
  (void)balance_settings(config);

  const double omega = closure_omega(stack);
  const BasisPair bases = BasisPair::solve(stack, omega);
  std::vector<double> probes;
  for (std::size_t j = 0; j < stack.size(); ++j) {
    if (j == 0)
      probes.push_back(-1.0 * um);
    else if (j + 1 == stack.size())
      probes.push_back(stack.layer_begin(j) + 1.0 * um);
    else
      probes.push_back(0.5 * (stack.layer_begin(j) + stack.layer_end(j)));
  }
  double worst = 0.0;
  for (double x : probes) {
    const LdosTriplet a = ldos(stack, bases, x);
    const LdosTriplet b = ldos_from_source_integrals(stack, bases, x);
    worst = std::max({worst, std::abs(a.electric - b.electric) / std::abs(a.electric),
                      std::abs(a.magnetic - b.magnetic) / std::abs(a.magnetic)});
  }
  std::cout << path.string() << ": " << stack.size() << " layers, interfaces at";
  for (double x : stack.interfaces()) std::cout << ' ' << fmt("%.9g", x / um);
  std::cout << " um\n";
  std::cout << "closure check at " << fmt("%.6g", ev_from_omega(omega))
            << " eV: max relative deviation " << fmt("%.3g", worst) << '\n';
  if (!(worst < 1e-6)) {
    std::cerr << "error: Green's-identity closure failed (" << fmt("%.3g", worst) << " > 1e-6)\n";
    return validation_failure;
  }
  std::cout << "clean\n";
  return ok;
}

int scan(const Options& o) {
  const std::filesystem::path path = o.target;
  ScanSpec spec;
  ScanOptions options;
  options.threads = o.threads;
  options.fd_check = o.fd_check;
  if (looks_like_csv(path)) {
    RecordedScan recorded = read_recorded_scan(path);
    spec = std::move(recorded.spec);
    options.units = recorded.units;
  } else {
    spec = parse_scan_spec(read_json(path), path.parent_path());
  }
  if (!o.units.empty()) options.units = o.units == "si" ? Units::si : Units::paper;
  if (!o.output.empty()) spec.output = o.output;
  if (spec.output.empty()) throw ValidationError("scan: no output path (set \"output\" or pass -o)");

  const ScanResult result = run_scan(spec, options);
  write_csv(result, spec.output);
  std::cout << "wrote " << result.rows.size() << " rows to " << spec.output.string() << '\n';
  if (o.fd_check && std::isnan(result.fd_deviation)) {
    std::cout << "fd-check: no force columns to check\n";
  } else if (o.fd_check) {
    std::cout << "fd-check: max relative deviation " << fmt("%.3g", result.fd_deviation) << '\n';
    if (!(result.fd_deviation <= 1e-4)) {
      std::cerr << "error: finite-difference cross-check exceeded 1e-4\n";
      return validation_failure;
    }
  }
  return ok;
}

int balance(const Options& o) {
  const std::filesystem::path path = o.target;
  const json raw = read_json(path);
  const LayerStack stack = build_stack(raw, path.parent_path());
  BalanceSettings settings = balance_settings(raw);
  settings.threads = o.threads;
  if (o.slices > 0) settings.slices = o.slices;
  if (!stack.has_self_consistent()) throw ValidationError("balance: the stack has no self-consistent layer");

  const BalanceResult r = solve_self_consistent(stack, settings);
  json config = to_config(stack);
  if (raw.contains("balance")) config["balance"] = raw["balance"];

  std::ostringstream out;
  out << "# layerfield balance\n";
  out << "# version: " << json(LAYERFIELD_VERSION).dump() << '\n';
  out << "# stack_hash: " << json(stack_hash(config)).dump() << '\n';
  out << "# balance: " << balance_to_json(settings).dump() << '\n';
  out << "# converged: " << (r.converged ? "true" : "false") << '\n';
  out << "# iterations: " << r.iterations << '\n';
  out << "# last_update_K: " << fmt("%.9g", r.update_history.empty() ? 0.0 : r.update_history.back()) << '\n';
  out << "layer,slice,x_begin_um,x_end_um,T_K,residual_W_m3,relative_residual\n";
  const auto free = r.profile.free_segments();
  std::size_t previous_layer = static_cast<std::size_t>(-1), slice = 0;
  for (std::size_t m = 0; m < free.size(); ++m) {
    const TemperatureSegment& s = r.profile.segments()[free[m]];
    slice = s.layer == previous_layer ? slice + 1 : 0;
    previous_layer = s.layer;
    out << s.layer << ',' << slice << ',' << fmt("%.9g", s.begin / um) << ',' << fmt("%.9g", s.end / um) << ','
        << fmt("%.9g", s.kelvin) << ',' << fmt("%.9g", r.residuals[m]) << ','
        << fmt("%.9g", r.relative_residuals[m]) << '\n';
  }

  if (o.output.empty()) {
    std::cout << out.str();
  } else {
    std::ofstream file(o.output, std::ios::binary | std::ios::trunc);
    if (!file || !(file << out.str())) throw IoError("cannot write " + o.output);
  }
  if (!r.converged) {
    std::cerr << "error: self-consistent temperature did not converge in " << r.iterations << " iterations\n";
    return not_converged;
  }
  return ok;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Photon numbers, LDOS, temperatures and Casimir forces in 1D layered media"};
  app.set_version_flag("--version", LAYERFIELD_VERSION);
  app.require_subcommand(1);

  Options o;
  app.add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--units", o.units, "LDOS units in CSV output")->check(CLI::IsMember({"paper", "si"}));
  app.add_flag("--fd-check", o.fd_check, "Cross-check force densities against finite differences");

  auto* validate_cmd = app.add_subcommand("validate", "Check a stack config");
  validate_cmd->add_option("config", o.target, "Stack config (JSON)")->required();

  auto* scan_cmd = app.add_subcommand("scan", "Run a position x energy scan and write CSV");
  scan_cmd->add_option("spec", o.target, "Scan spec (JSON) or a CSV written by a previous scan")->required();
  scan_cmd->add_option("-o,--output", o.output, "Output CSV (overrides the spec)");

  auto* balance_cmd = app.add_subcommand("balance", "Solve the self-consistent temperatures");
  balance_cmd->add_option("config", o.target, "Stack config (JSON)")->required();
  balance_cmd->add_option("-o,--output", o.output, "Output CSV (default: stdout)");
  balance_cmd->add_option("--slices", o.slices, "Slices per self-consistent layer")->check(CLI::PositiveNumber);

  for (auto* sub : {validate_cmd, scan_cmd, balance_cmd}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : validation_failure;
  }

  const char* command = app.get_subcommands().front()->get_name().c_str();
  try {
    if (*validate_cmd) return validate(o);
    if (*scan_cmd) return scan(o);
    return balance(o);
  } catch (const ValidationError& e) {
    std::cerr << command << ": " << e.what() << '\n';
    return validation_failure;
  } catch (const NumericalError& e) {
    std::cerr << command << ": numerical failure: " << e.what() << '\n';
    return validation_failure;
  } catch (const ConvergenceError& e) {
    std::cerr << command << ": " << e.what() << '\n';
    return not_converged;
  } catch (const IoError& e) {
    std::cerr << command << ": " << e.what() << '\n';
    return io_failure;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << command << ": " << e.what() << '\n';
    return io_failure;
  }
}

}  // namespace layerfield::cli
