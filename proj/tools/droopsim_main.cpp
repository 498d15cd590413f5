// Command-line front end: run scenarios to CSV traces, validate scenario
// files, and emit plotting scripts for recorded traces.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "droopsim/scenario.hpp"
#include "droopsim/simulation.hpp"
#include "droopsim/trace.hpp"
#include "droopsim/types.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitFault = 2;

std::string stem_of(const std::string& path) {
  std::string s = path;
  const auto slash = s.find_last_of("/\\");
  if (slash != std::string::npos) s = s.substr(slash + 1);
  const auto dot = s.find_last_of('.');
  if (dot != std::string::npos && dot > 0) s = s.substr(0, dot);
  return s;
}

int cmd_run(const std::string& scenario_path, const std::string& out_dir,
            const std::string& controller_override, bool quiet) {
  droopsim::scenario::Scenario sc;
  try {
    sc = droopsim::scenario::load_scenario(scenario_path);
    if (!controller_override.empty()) {
      sc.controller =
          droopsim::scenario::controller_from_string(controller_override);
      sc.validate();
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitConfig;
  }

  const std::string out_path = out_dir + "/" + stem_of(scenario_path) + "_" +
                               droopsim::scenario::to_string(sc.controller) +
                               ".csv";
  try {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
      std::cerr << "error: cannot create output directory '" << out_dir
                << "': " << ec.message() << "\n";
      return kExitConfig;
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitConfig;
  }
  try {
    const auto t0 = std::chrono::steady_clock::now();
    const auto rr = droopsim::sim::run(sc);
    const auto t1 = std::chrono::steady_clock::now();
    droopsim::write_csv(rr.trace, out_path);
    if (!quiet) {
      std::cout << droopsim::sim::summary_text(sc, rr);
      const double secs =
          std::chrono::duration<double>(t1 - t0).count();
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.2f", secs);
      std::cout << "wall time " << buf << " s\n";
      std::cout << "trace written to " << out_path << "\n";
    }
  } catch (const droopsim::SimulationFault& ex) {
    std::cerr << "simulation fault: " << ex.what() << "\n";
    return kExitFault;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}

int cmd_validate(const std::string& scenario_path) {
  try {
    const auto sc = droopsim::scenario::load_scenario(scenario_path);
    std::cout << "OK '" << sc.name << "': " << sc.n() << " converter(s), "
              << sc.duration << " s, controller "
              << droopsim::scenario::to_string(sc.controller) << ", "
              << sc.events.size() << " event(s)\n";
  } catch (const std::exception& ex) {
    std::cerr << "invalid: " << ex.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}

// Emits a standalone matplotlib script so traces can be inspected without
// any plotting dependency in this binary.
int cmd_plot(const std::string& trace_path, const std::string& compare_path,
             const std::string& out_override) {
  droopsim::Trace tr;
  try {
    tr = droopsim::read_csv(trace_path);
    if (tr.rows_used == 0)
      throw std::runtime_error("'" + trace_path + "' has no samples");
    if (!compare_path.empty()) {
      const auto other = droopsim::read_csv(compare_path);
      if (other.rows_used == 0)
        throw std::runtime_error("'" + compare_path + "' has no samples");
      if (other.columns != tr.columns)
        throw std::runtime_error(
            "trace columns differ; cannot compare these files");
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitConfig;
  }

  const int n = tr.n_converters();
  const std::string out_path =
      out_override.empty() ? stem_of(trace_path) + "_plot.py" : out_override;
  std::ofstream py(out_path, std::ios::trunc);
  if (!py) {
    std::cerr << "error: cannot write '" << out_path << "'\n";
    return kExitConfig;
  }

  const bool compare = !compare_path.empty();
  const int panels = compare ? 4 : 3;
  py << "#!/usr/bin/env python3\n"
     << "# Generated plot script; needs matplotlib.\n"
     << "import csv\n\n"
     << "import matplotlib.pyplot as plt\n\n"
     << "N_CONV = " << n << "\n\n\n"
     << "def load(path):\n"
     << "    with open(path, newline=\"\") as f:\n"
     << "        rows = list(csv.DictReader(f))\n"
     << "    cols = {k: [float(r[k]) for r in rows] for k in rows[0]}\n"
     << "    return cols\n\n\n"
     << "def cumulative_ise(tr):\n"
     << "    \"\"\"Running per-unit ISE: current-sharing and voltage-"
        "consensus errors.\"\"\"\n"
     << "    t = tr[\"t\"]\n"
     << "    ise_i, ise_v = [0.0], [0.0]\n"
     << "    for k in range(1, len(t)):\n"
     << "        dt = t[k] - t[k - 1]\n"
     << "        ei = sum((tr[f\"i_pu_{j}\"][k] - tr[f\"i_ref_pu_{j}\"][k])"
        " ** 2\n"
     << "                 for j in range(1, N_CONV + 1))\n"
     << "        ev = sum((tr[f\"v_bar_pu_{j}\"][k] - 1.0) ** 2\n"
     << "                 for j in range(1, N_CONV + 1)) / N_CONV\n"
     << "        ise_i.append(ise_i[-1] + ei * dt)\n"
     << "        ise_v.append(ise_v[-1] + ev * dt)\n"
     << "    return ise_i, ise_v\n\n\n"
     << "traces = [(\"" << stem_of(trace_path) << "\", load(\"" << trace_path
     << "\"))]\n";
  if (compare) {
    py << "traces.append((\"" << stem_of(compare_path) << "\", load(\""
       << compare_path << "\")))\n";
  }
  py << "styles = [\"-\", \"--\"]\n\n"
     << "fig, axes = plt.subplots(" << panels
     << ", 1, sharex=True, figsize=(9, " << 3 * panels << "))\n"
     << "for (name, tr), style in zip(traces, styles):\n";
  for (int k = 1; k <= n; ++k) {
    py << "    axes[0].plot(tr[\"t\"], tr[\"i_line_" << k
       << "\"], style, label=f\"{name} i_" << k << "\")\n";
  }
  for (int k = 1; k <= n; ++k) {
    py << "    axes[1].plot(tr[\"t\"], tr[\"droop_" << k
       << "\"], style, label=f\"{name} droop_" << k << "\")\n";
  }
  py << "    axes[2].plot(tr[\"t\"], tr[\"v_bus\"], style, "
        "label=f\"{name} v_bus\")\n";
  if (compare) {
    py << "    cum_i, cum_v = cumulative_ise(tr)\n"
       << "    axes[3].plot(tr[\"t\"], cum_i, style, "
          "label=f\"{name} ISE i (pu)\")\n"
       << "    axes[3].plot(tr[\"t\"], cum_v, style, "
          "label=f\"{name} ISE v (pu)\", alpha=0.6)\n";
  }
  py << "axes[0].set_ylabel(\"line current [A]\")\n"
     << "axes[1].set_ylabel(\"droop [ohm]\")\n"
     << "axes[2].set_ylabel(\"bus voltage [V]\")\n";
  if (compare) py << "axes[3].set_ylabel(\"cumulative ISE (pu)\")\n";
  py << "axes[" << panels - 1 << "].set_xlabel(\"time [s]\")\n"
     << "for ax in axes:\n"
     << "    ax.grid(True, alpha=0.3)\n"
     << "    ax.legend(loc=\"best\", fontsize=8)\n"
     << "fig.tight_layout()\n"
     << "plt.show()\n";
  if (!py) {
    std::cerr << "error: write failed for '" << out_path << "'\n";
    return kExitConfig;
  }
  std::cout << "plot script written to " << out_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"droopsim: DC-microgrid droop control simulator"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir = ".";
  std::string controller;
  bool quiet = false;
  auto* run_cmd = app.add_subcommand("run", "simulate a scenario file");
  run_cmd->add_option("scenario", scenario_path, "scenario file")->required();
  run_cmd->add_option("--out", out_dir, "output directory for the trace CSV");
  run_cmd->add_option("--controller", controller,
                      "override the scenario's controller (adaptive|pi|none)");
  run_cmd->add_flag("--quiet", quiet, "suppress the summary printout");

  std::string validate_path;
  auto* val_cmd =
      app.add_subcommand("validate", "check a scenario file and exit");
  val_cmd->add_option("scenario", validate_path, "scenario file")->required();

  std::string trace_path;
  std::string compare_path;
  std::string plot_out;
  auto* plot_cmd =
      app.add_subcommand("plot", "emit a matplotlib script for a trace");
  plot_cmd->add_option("trace", trace_path, "trace CSV")->required();
  plot_cmd->add_option("--compare", compare_path,
                       "second trace overlaid dashed");
  plot_cmd->add_option("--out", plot_out, "script path (default <stem>_plot.py)");

  CLI11_PARSE(app, argc, argv);

  if (run_cmd->parsed()) return cmd_run(scenario_path, out_dir, controller, quiet);
  if (val_cmd->parsed()) return cmd_validate(validate_path);
  if (plot_cmd->parsed()) return cmd_plot(trace_path, compare_path, plot_out);
  return kExitConfig;
}
