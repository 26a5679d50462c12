#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "everrod/commands.hpp"
#include "everrod/errors.hpp"

namespace {

int run(int argc, char** argv) {
  using everrod::ExitCode;
  CLI::App app{"everrod: Cosserat-rod statics of banded eversion robots"};
  app.require_subcommand(1);

  everrod::CommandOptions opts;
  std::string out = "out";
  app.add_option("--jobs", opts.jobs, "Worker threads for batteries and searches")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--settings", opts.settings_overrides,
                 "Solver overrides, e.g. grid_nodes=800,moment_tol=1e-10");
  app.add_flag("--timing", opts.include_timing, "Record wall-clock time in the report");

  std::string scenario;
  auto* simulate = app.add_subcommand("simulate", "Solve one load case or force sweep");
  simulate->add_option("scenario", scenario, "Scenario JSON")->required();
  simulate->add_option("--out", out, "Output directory");

  auto* battery = app.add_subcommand("battery", "Run a battery of band layouts");
  battery->add_option("scenario", scenario, "Scenario JSON with a battery section")->required();
  battery->add_option("--out", out, "Output directory");
  battery->add_flag("--check-trends", opts.check_trends,
                    "Fail unless k decreases with band count, distance, and ratio");

  std::string data_dir, kind;
  auto* fit = app.add_subcommand("fit", "Identify model parameters from measured data");
  fit->add_option("data", data_dir, "Directory of CSV data (and scenario.json)")->required();
  fit->add_option("--kind", kind, "modulus, alpha, or eversion")
      ->required()
      ->check(CLI::IsMember({"modulus", "alpha", "eversion"}));
  fit->add_option("--out", out, "Output directory");

  std::string problem;
  auto* design = app.add_subcommand("design", "Search band layouts under a pressure budget");
  design->add_option("problem", problem, "Design problem JSON")->required();
  design->add_option("--out", out, "Output directory");

  std::vector<std::string> curves;
  std::string title;
  std::string svg = "plot.svg";
  auto* plot = app.add_subcommand("plot", "Plot force-displacement CSV files as SVG");
  plot->add_option("curves", curves, "Curve CSV files")->required();
  plot->add_option("--out", svg, "Output SVG file");
  plot->add_option("--title", title, "Plot title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ExitCode::validation);
  }

  try {
    if (*simulate) {
      everrod::cmd_simulate(scenario, out, opts);
    } else if (*battery) {
      everrod::cmd_battery(scenario, out, opts);
    } else if (*fit) {
      everrod::cmd_fit(data_dir, kind, out, opts);
    } else if (*design) {
      everrod::cmd_design(problem, out, opts);
    } else if (*plot) {
      std::vector<std::filesystem::path> paths(curves.begin(), curves.end());
      everrod::cmd_plot(paths, svg, title);
    }
  } catch (const everrod::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.exit_code());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::validation);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::failure);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
