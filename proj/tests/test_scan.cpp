#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fixtures.hpp"
#include "layerfield/cli.hpp"
#include "layerfield/error.hpp"
#include "layerfield/scan.hpp"

using namespace layerfield;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json cavity_config() {
  return json::parse(R"({"layers": [
      {"thickness_um": "inf", "n": "1.5+0.3i", "temperature": 400},
      {"thickness_um": 10, "n": "1.1+0.1i", "temperature": "self-consistent"},
      {"thickness_um": "inf", "n": "2.5+0.5i", "temperature": 300}],
    "balance": {"slices": 4, "energy_eV": {"start": 0.001, "stop": 1, "count": 64}}})");
}

json small_spec() {
  return {{"config", cavity_config()},
          {"quantities", {"ldos_tot", "n_tot", "T_tot", "u", "zcf", "tcf", "ncf"}},
          {"x_um", {{"start", -2.0}, {"stop", 12.0}, {"count", 7}}},
          {"energy_eV", {{"start", 0.02}, {"stop", 0.24}, {"count", 5}}}};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "layerfield_scan_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "layerfield");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  auto* old_out = std::cout.rdbuf(out.rdbuf());
  auto* old_err = std::cerr.rdbuf(err.rdbuf());
  CliRun r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data());
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

}  // namespace

TEST_CASE("quantity names round trip") {
  for (int i = 0; i <= static_cast<int>(Quantity::slab_force); ++i) {
    const auto q = static_cast<Quantity>(i);
    CHECK(parse_quantity(quantity_name(q)) == q);
  }
  CHECK_FALSE(parse_quantity("ldos").has_value());
  CHECK(quantity_unit(Quantity::ldos_e, Units::paper) != quantity_unit(Quantity::ldos_e, Units::si));
  CHECK(quantity_unit(Quantity::T_tot, Units::paper) == "K");
}

TEST_CASE("axes") {
  const auto lin = Axis{0.0, 1.0, 5, false}.values();
  CHECK(lin == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  const auto lg = Axis{0.01, 1.0, 3, true}.values();
  CHECK(lg[1] == doctest::Approx(0.1));
  CHECK(lg.back() == 1.0);
  CHECK(Axis{2.0, 3.0, 1, false}.values() == std::vector<double>{2.0});
}

TEST_CASE("scan spec validation") {
  const auto rejects = [](json spec, const std::string& fragment) {
    CHECK_THROWS_WITH_AS((void)parse_scan_spec(spec), doctest::Contains(fragment.c_str()), ValidationError);
  };
  json s = small_spec();
  CHECK_NOTHROW((void)parse_scan_spec(s));

  s = small_spec();
  s["quantities"] = {"ldos_tot", "colour"};
  rejects(s, "colour");
  s = small_spec();
  s["extra"] = 1;
  rejects(s, "extra");
  s = small_spec();
  s["x_um"]["count"] = 0;
  rejects(s, "count");
  s = small_spec();
  s["energy_eV"]["start"] = -0.1;
  rejects(s, "energy_eV");
  s = small_spec();
  s["energy_eV"]["spacing"] = "cubic";
  rejects(s, "spacing");
  s = small_spec();
  s["quantities"] = json::array();
  rejects(s, "quantities");
  s = small_spec();
  s["slab"] = {{"layer", 1}, {"width_um", {{"start", 0}, {"stop", 1}, {"count", 3}}}};
  rejects(s, "x_um");
  s = small_spec();
  s.erase("x_um");
  s["slab"] = {{"layer", 1}, {"width_um", {{"start", 0}, {"stop", 1}, {"count", 3}}}};
  rejects(s, "slab_force");

  CHECK_THROWS_AS((void)parse_scan_spec(json{{"config", "/nonexistent/stack.json"},
                                             {"quantities", {"ldos_tot"}},
                                             {"x_um", {{"start", 0}, {"stop", 1}}},
                                             {"energy_eV", {{"start", 0.1}, {"stop", 0.2}}}}),
                  IoError);
}

TEST_CASE("scan rows, values and metadata") {
  const ScanSpec spec = parse_scan_spec(small_spec());
  const ScanResult r = run_scan(spec, {.threads = 2, .fd_check = true});
  REQUIRE(r.rows.size() == 35);
  CHECK(r.columns.front() == "x_um");
  CHECK(r.columns[1] == "E_eV");
  CHECK(r.columns.size() == 9);
  CHECK(r.fd_deviation < 1e-4);
  CHECK(r.metadata.at("stack_hash") == stack_hash(spec.stack_config));
  // x-major order.
  CHECK(r.rows[0][0] == r.rows[4][0]);
  CHECK(r.rows[0][1] < r.rows[1][1]);

  // Point values agree with the pointwise API.
  const LayerStack stack = build_stack(spec.stack_config);
  const TemperatureProfile profile = resolve_profile(stack, balance_settings(spec.stack_config));
  const auto& row = r.rows[13];
  const SpectralField f = evaluate(stack, BasisPair::solve(stack, omega_from_ev(row[1])), profile, row[0] * um);
  CHECK(row[2] == doctest::Approx(f.ldos.total / phys::ldos_unit).epsilon(1e-8));
  CHECK(row[3] == doctest::Approx(f.photons.total).epsilon(1e-8));
  CHECK(row[4] == doctest::Approx(f.temperatures.total).epsilon(1e-8));

  const ScanResult si = run_scan(spec, {.units = Units::si});
  CHECK(si.rows[13][2] == doctest::Approx(f.ldos.total).epsilon(1e-8));
  CHECK(si.rows[13][3] == r.rows[13][3]);
}

TEST_CASE("scans are deterministic and reproducible from their CSV") {
  const ScanSpec spec = parse_scan_spec(small_spec());
  const std::string one = format_csv(run_scan(spec, {.threads = 1}));
  const std::string two = format_csv(run_scan(spec, {.threads = 3}));
  CHECK(one == two);

  const fs::path csv = scratch("repro.csv");
  write_csv(run_scan(spec), csv);
  CHECK(slurp(csv) == one);
  CHECK_FALSE(fs::exists(csv.string() + ".partial"));

  const RecordedScan back = read_recorded_scan(csv);
  CHECK(spec_to_json(back.spec) == spec_to_json(spec));
  CHECK(back.units == Units::paper);
  CHECK(format_csv(run_scan(back.spec)) == one);
}

TEST_CASE("failed writes leave nothing behind") {
  const ScanResult r = run_scan(parse_scan_spec(small_spec()));
  const fs::path bad = scratch("missing_dir") / "sub" / "out.csv";
  CHECK_THROWS_AS(write_csv(r, bad), IoError);
  CHECK_FALSE(fs::exists(bad));

  const fs::path garbage = scratch("garbage.csv");
  std::ofstream(garbage) << "# layerfield scan\n# spec: {broken\n";
  CHECK_THROWS_AS((void)read_recorded_scan(garbage), ValidationError);
}

TEST_CASE("force columns on an interface are rejected") {
  json s = small_spec();
  s["x_um"] = {{"start", 0.0}, {"stop", 10.0}, {"count", 2}};
  s["quantities"] = {"ncf"};
  CHECK_THROWS_AS((void)run_scan(parse_scan_spec(s)), ValidationError);
  s["quantities"] = {"u", "ldos_e"};
  CHECK_NOTHROW((void)run_scan(parse_scan_spec(s)));
}

TEST_CASE("slab scans") {
  json s = json::parse(R"({"quantities": ["slab_force"],
      "slab": {"layer": 2, "width_um": {"start": 0, "stop": 2, "count": 3}},
      "energy_eV": {"start": 0.05, "stop": 0.15, "count": 2}})");
  s["config"] = json::parse(R"({"layers": [
      {"thickness_um": "inf", "n": "2.5+0.5i", "temperature": 400},
      {"thickness_um": 4.5, "n": 1, "temperature": "none"},
      {"thickness_um": 1, "n": 1.5, "temperature": "none"},
      {"thickness_um": 4.5, "n": 1, "temperature": "none"},
      {"thickness_um": "inf", "n": "2.5+0.5i", "temperature": 300}]})");
  const ScanResult r = run_scan(parse_scan_spec(s));
  REQUIRE(r.rows.size() == 6);
  CHECK(r.columns.front() == "width_um");
  CHECK(r.rows[0][2] == 0.0);
  CHECK(r.rows[1][2] == 0.0);
  CHECK(r.rows[2][2] != 0.0);
}

TEST_CASE("command line: exit codes") {
  const fs::path cfg = scratch("cavity.json");
  std::ofstream(cfg) << cavity_config().dump(2);

  SUBCASE("validate") {
    const CliRun r = run_cli({"validate", cfg.string()});
    CHECK(r.code == cli::ok);
    CHECK(r.out.find("clean") != std::string::npos);

    const fs::path bad = scratch("bad.json");
    json c = cavity_config();
    c["layers"][1]["thickness_um"] = -2;
    std::ofstream(bad) << c.dump();
    const CliRun v = run_cli({"validate", bad.string()});
    CHECK(v.code == cli::validation_failure);
    CHECK(v.err.find("layers[1].thickness_um") != std::string::npos);

    std::ofstream(scratch("broken.json")) << "{ not json";
    CHECK(run_cli({"validate", scratch("broken.json").string()}).code == cli::validation_failure);
    CHECK(run_cli({"validate", "/nonexistent/stack.json"}).code == cli::io_failure);
  }
  SUBCASE("balance") {
    const fs::path out = scratch("balance.csv");
    const CliRun r = run_cli({"balance", cfg.string(), "-o", out.string()});
    CHECK(r.code == cli::ok);
    const std::string text = slurp(out);
    CHECK(text.find("# converged: true") != std::string::npos);
    CHECK(text.find("layer,slice,x_begin_um,x_end_um,T_K,residual_W_m3,relative_residual\n1,0,0,2.5,") !=
          std::string::npos);

    json c = cavity_config();
    c["balance"]["max_iterations"] = 1;
    const fs::path stubborn = scratch("stubborn.json");
    std::ofstream(stubborn) << c.dump();
    CHECK(run_cli({"balance", stubborn.string(), "-o", out.string()}).code == cli::not_converged);
    CHECK(run_cli({"balance", cfg.string(), "-o", "/nonexistent/dir/out.csv"}).code == cli::io_failure);
  }
  SUBCASE("scan") {
    const fs::path spec = scratch("spec.json");
    std::ofstream(spec) << small_spec().dump();
    CHECK(run_cli({"scan", spec.string()}).code == cli::validation_failure);  // no output

    const fs::path out = scratch("cli_scan.csv");
    const CliRun r = run_cli({"--fd-check", "--threads", "2", "scan", spec.string(), "-o", out.string()});
    CHECK(r.code == cli::ok);
    CHECK(r.out.find("fd-check: max relative deviation") != std::string::npos);

    const fs::path again = scratch("cli_scan_again.csv");
    CHECK(run_cli({"scan", out.string(), "-o", again.string()}).code == cli::ok);
    CHECK(slurp(again) == slurp(out));
  }
  SUBCASE("usage errors") {
    CHECK(run_cli({"--units", "cgs", "validate", cfg.string()}).code == cli::validation_failure);
    CHECK(run_cli({"frobnicate"}).code == cli::validation_failure);
    CHECK(run_cli({"--help"}).code == cli::ok);
  }
}
