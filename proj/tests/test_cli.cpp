// Trace CSV round-trips, whole-run simulation behavior, and the command-line
// front end driven as a subprocess.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "droopsim/metrics.hpp"
#include "droopsim/scenario.hpp"
#include "droopsim/simulation.hpp"
#include "droopsim/trace.hpp"

using namespace droopsim;
namespace fs = std::filesystem;

namespace {

const std::string kCli = DROOPSIM_CLI_PATH;
const std::string kScenarioDir = DROOPSIM_SCENARIO_DIR;

struct CmdResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr interleaved
};

// Runs the CLI binary with the given arguments, capturing all output.
CmdResult run_cli(const std::string& args) {
  static int counter = 0;
  const fs::path log =
      fs::temp_directory_path() / ("droopsim_cli_" + std::to_string(counter++) +
                                   "_" + std::to_string(::getpid()) + ".log");
  const std::string cmd = kCli + " " + args + " > " + log.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  CmdResult res;
  res.exit_code = (raw >= 0 && WIFEXITED(raw)) ? WEXITSTATUS(raw) : raw;
  std::ifstream in(log);
  std::stringstream buf;
  buf << in.rdbuf();
  res.output = buf.str();
  fs::remove(log);
  return res;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("droopsim_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("trace CSV round-trips at full precision") {
  Trace tr = make_trace(2, 3);
  for (int k = 0; k < 3; ++k) {
    tr.data(k, 0) = k * 1e-3;
    for (int c = 1; c < tr.data.cols(); ++c)
      tr.data(k, c) = std::sin(0.1 * k + 0.37 * c) * 400.0;
    ++tr.rows_used;
  }
  tr.data(1, tr.col("v_bus")) = 393.0902111324376;  // full double payload

  const fs::path dir = fresh_dir("trace_roundtrip");
  const std::string path = (dir / "t.csv").string();
  write_csv(tr, path);
  const Trace back = read_csv(path);
  REQUIRE(back.columns == tr.columns);
  REQUIRE(back.rows_used == tr.rows_used);
  for (int k = 0; k < tr.rows_used; ++k)
    for (int c = 0; c < tr.data.cols(); ++c)
      CHECK(back.data(k, c) == tr.data(k, c));  // bit-exact through the file

  CHECK(tr.n_converters() == 2);
  CHECK(tr.has_col("i_ref_pu_2"));
  CHECK_FALSE(tr.has_col("i_ref_pu_3"));
  CHECK_THROWS(tr.col("missing_column"));
  CHECK(tr.row_at(1.5e-3) == 1);
  CHECK(tr.row_at(10.0) == 2);
}

TEST_CASE("a symmetric eventless run holds the droop equilibrium") {
  scenario::Scenario sc;
  sc.name = "flatline";
  sc.duration = 0.5;
  sc.dt = 5e-5;
  sc.controller = scenario::ControllerKind::kNone;
  sc.metrics_window = 0.5;
  sc.plant_params.converters = {ConverterParams{400.0, 5e-3, 10.0, 1.0},
                                ConverterParams{400.0, 5e-3, 10.0, 1.0}};
  sc.plant_params.lines = {LineParams{0.5, 3e-3}, LineParams{0.5, 3e-3}};
  sc.plant_params.load = LoadModel::resistive(40.0);
  sc.validate();

  const auto rr = sim::run(sc);
  const auto& tr = rr.trace;
  REQUIRE(tr.rows_used > 2);
  const double v0 = tr.at(0, "v_bus");
  for (int k = 0; k < tr.rows_used; ++k) {
    CHECK(tr.at(k, "v_bus") == doctest::Approx(v0).epsilon(1e-12));
    CHECK(tr.at(k, "i_line_1") ==
          doctest::Approx(tr.at(k, "i_line_2")).epsilon(1e-12));
    CHECK(tr.at(k, "droop_1") == 1.0);
  }
  CHECK(rr.summary.sharing_ratio == doctest::Approx(1.0));
  CHECK(rr.summary.ise_i == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("trace rows land on the recording grid with a final-time row") {
  scenario::Scenario sc;
  sc.duration = 0.1;
  sc.dt = 5e-5;
  sc.record_dt = 1e-3;
  sc.controller = scenario::ControllerKind::kNone;
  sc.metrics_window = 0.1;
  sc.plant_params.converters = {ConverterParams{400.0, 5e-3, 10.0, 1.0}};
  sc.plant_params.lines = {LineParams{0.5, 3e-3}};
  sc.plant_params.load = LoadModel::resistive(80.0);
  sc.validate();
  const auto rr = sim::run(sc);
  CHECK(rr.trace.rows_used == 101);  // 0, 1 ms, ..., 100 ms
  CHECK(rr.trace.t(0) == 0.0);
  CHECK(rr.trace.t(rr.trace.rows_used - 1) == doctest::Approx(0.1));
  CHECK(rr.trace.t(1) == doctest::Approx(1e-3));
}

TEST_CASE("cli: validate accepts every bundled scenario") {
  for (const char* name :
       {"conventional.toml", "activation.toml", "loadstep.toml",
        "cycles.toml"}) {
    const auto res = run_cli("validate " + kScenarioDir + "/" + name);
    CAPTURE(res.output);
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("OK") != std::string::npos);
  }
}

TEST_CASE("cli: validate rejects a broken file with line info") {
  const fs::path dir = fresh_dir("cli_invalid");
  {
    std::ofstream out(dir / "broken.toml");
    out << "duration = 1.0\ndt = 1e-4\nmystery_key = 3\n\n"
        << "[[converters]]\ni_rated = 10.0\n";
  }
  const auto res = run_cli("validate " + (dir / "broken.toml").string());
  CHECK(res.exit_code != 0);
  CHECK(res.output.find("invalid:") != std::string::npos);
  CHECK(res.output.find("mystery_key") != std::string::npos);
  CHECK(res.output.find("line 3") != std::string::npos);

  const auto gone = run_cli("validate " + (dir / "gone.toml").string());
  CHECK(gone.exit_code != 0);
}

TEST_CASE("cli: run produces the trace, the summary, and exit code 0") {
  const fs::path dir = fresh_dir("cli_run");
  const auto res = run_cli("run " + kScenarioDir + "/conventional.toml --out " +
                           dir.string());
  CAPTURE(res.output);
  REQUIRE(res.exit_code == 0);
  const fs::path csv = dir / "conventional_none.csv";
  REQUIRE(fs::exists(csv));
  CHECK(res.output.find("final: v_bus") != std::string::npos);
  CHECK(res.output.find("sharing i1/i2") != std::string::npos);
  CHECK(res.output.find("trace written to") != std::string::npos);

  // The recorded trace opens and spans the whole run.
  const auto sc =
      scenario::load_scenario(kScenarioDir + "/conventional.toml");
  const Trace tr = read_csv(csv.string());
  CHECK(tr.n_converters() == 2);
  CHECK(tr.t(tr.rows_used - 1) == doctest::Approx(sc.duration));

  // --quiet suppresses the report but still writes the trace.
  const fs::path dir2 = fresh_dir("cli_run_quiet");
  const auto quiet = run_cli("run " + kScenarioDir +
                             "/conventional.toml --quiet --out " +
                             dir2.string());
  CHECK(quiet.exit_code == 0);
  CHECK(quiet.output.empty());
  CHECK(fs::exists(dir2 / "conventional_none.csv"));
}

TEST_CASE("cli: repeated runs write byte-identical traces") {
  const fs::path a = fresh_dir("cli_det_a");
  const fs::path b = fresh_dir("cli_det_b");
  const std::string scen = kScenarioDir + "/conventional.toml";
  REQUIRE(run_cli("run " + scen + " --quiet --out " + a.string()).exit_code ==
          0);
  REQUIRE(run_cli("run " + scen + " --quiet --out " + b.string()).exit_code ==
          0);
  const std::string fa = slurp(a / "conventional_none.csv");
  const std::string fb = slurp(b / "conventional_none.csv");
  REQUIRE_FALSE(fa.empty());
  CHECK(fa == fb);
}

TEST_CASE("cli: controller override changes the output name and the run") {
  const fs::path dir = fresh_dir("cli_override");
  const auto res = run_cli("run " + kScenarioDir +
                           "/conventional.toml --controller pi --quiet --out " +
                           dir.string());
  CHECK(res.exit_code == 0);
  CHECK(fs::exists(dir / "conventional_pi.csv"));

  const auto bad = run_cli("run " + kScenarioDir +
                           "/conventional.toml --controller magic --out " +
                           dir.string());
  CHECK(bad.exit_code != 0);
  CHECK(bad.output.find("unknown controller") != std::string::npos);
}

TEST_CASE("cli: plot emits a script naming the trace columns") {
  const fs::path dir = fresh_dir("cli_plot");
  REQUIRE(run_cli("run " + kScenarioDir + "/conventional.toml --quiet --out " +
                  dir.string())
              .exit_code == 0);
  const fs::path csv = dir / "conventional_none.csv";
  const fs::path script = dir / "conventional.py";
  const auto res =
      run_cli("plot " + csv.string() + " --out " + script.string());
  CAPTURE(res.output);
  CHECK(res.exit_code == 0);
  REQUIRE(fs::exists(script));
  const std::string body = slurp(script);
  CHECK(body.find("i_line_1") != std::string::npos);
  CHECK(body.find("droop_2") != std::string::npos);
  CHECK(body.find("v_bus") != std::string::npos);
  CHECK(body.find("matplotlib") != std::string::npos);

  // Comparison overlay adds the cumulative-error panel.
  const fs::path dir_pi = fresh_dir("cli_plot_pi");
  REQUIRE(run_cli("run " + kScenarioDir +
                  "/conventional.toml --controller pi --quiet --out " +
                  dir_pi.string())
              .exit_code == 0);
  const fs::path script2 = dir / "compare.py";
  const auto cmp = run_cli("plot " + csv.string() + " --compare " +
                           (dir_pi / "conventional_pi.csv").string() +
                           " --out " + script2.string());
  CHECK(cmp.exit_code == 0);
  CHECK(slurp(script2).find("cumulative_ise") != std::string::npos);

  // Degenerate input: an empty trace has nothing to plot.
  const fs::path empty_csv = dir / "empty.csv";
  {
    Trace tr = make_trace(2, 1);
    write_csv(tr, empty_csv.string());
  }
  const auto empty = run_cli("plot " + empty_csv.string());
  CHECK(empty.exit_code != 0);
  CHECK(empty.output.find("no samples") != std::string::npos);
}

TEST_CASE("cli: events print into the run log with their targets") {
  const fs::path dir = fresh_dir("cli_events");
  const auto res = run_cli("run " + kScenarioDir + "/activation.toml --out " +
                           dir.string());
  REQUIRE(res.exit_code == 0);
  CHECK(res.output.find("current loop enabled (all nodes)") !=
        std::string::npos);
  CHECK(res.output.find("voltage loop enabled (all nodes)") !=
        std::string::npos);
}
