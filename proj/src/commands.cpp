#include "everrod/commands.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

#include "everrod/calibration.hpp"
#include "everrod/csv.hpp"
#include "everrod/parallel.hpp"
#include "everrod/scenario.hpp"
#include "everrod/svg_plot.hpp"

namespace everrod {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << contents;
}

ojson RunReport::to_json(bool include_timing) const {
  ojson j;
  j["tool"] = "everrod";
  j["tool_version"] = tool_version;
  j["command"] = command;
  j["inputs_digest"] = inputs_digest;
  j["results"] = results;
  if (include_timing) j["wall_clock_s"] = wall_clock_s;
  return j;
}

namespace {

using Clock = std::chrono::steady_clock;

class ReportScope {
 public:
  ReportScope(std::string command, std::string digest, const CommandOptions& options)
      : options_(options), start_(Clock::now()) {
    report_.command = std::move(command);
    report_.inputs_digest = std::move(digest);
    report_.tool_version = kToolVersion;
    set_worker_count(options.jobs);
  }

  RunReport& report() { return report_; }

  RunReport finish(const fs::path& path) {
    report_.wall_clock_s = std::chrono::duration<double>(Clock::now() - start_).count();
    write_file(path, report_.to_json(options_.include_timing).dump(2) + "\n");
    return report_;
  }

 private:
  RunReport report_;
  const CommandOptions& options_;
  Clock::time_point start_;
};

std::string curve_csv(const std::vector<CurveSample>& samples) {
  std::ostringstream out;
  write_curve_csv(out, samples);
  return out.str();
}

std::string state_csv(const RodState& state) {
  std::ostringstream out;
  write_state_csv(out, state);
  return out.str();
}

ojson vec_json(const Eigen::Vector3d& v) { return ojson::array({v.x(), v.y(), v.z()}); }

std::vector<fs::path> csv_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ValidationError("'" + dir.string() + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError("no CSV files in '" + dir.string() + "'");
  return files;
}

}  // namespace

RunReport cmd_simulate(const fs::path& scenario_path, const fs::path& out_dir,
                       const CommandOptions& options) {
  const std::string text = read_file(scenario_path);
  ReportScope scope("simulate", sha256_hex(text), options);
  Scenario sc = parse_scenario(text, scenario_path.filename().string());
  apply_settings_overrides(sc.settings, options.settings_overrides);
  ojson& res = scope.report().results;
  res["spec_id"] = sc.rod.id();

  if (sc.protocol.kind == Protocol::Kind::single) {
    RodState state;
    double force = 0.0;
    if (sc.load.mode == LoadCase::Mode::force) {
      state = solve_point_load(sc.rod, sc.material, sc.load, sc.settings);
      force = sc.load.magnitude;
    } else {
      auto sol = solve_imposed_displacement(sc.rod, sc.material, sc.load, sc.settings);
      state = std::move(sol.state);
      force = sol.force;
    }
    write_file(out_dir / "state.csv", state_csv(state));
    res["mode"] = sc.load.mode == LoadCase::Mode::force ? "force" : "displacement";
    res["force_n"] = force;
    res["displacement_m"] = projected_displacement(state, sc.load);
    res["tip_position_m"] = vec_json(state.tip_position());
    res["base_moment_nm"] = vec_json(state.base_moment());
    res["max_orthonormality_error"] = state.max_orthonormality_error();
    return scope.finish(out_dir / "report.json");
  }

  const Eigen::Vector3d dir = sc.load.direction;
  ForceDisplacementCurve curve;
  curve.spec_id = sc.rod.id().empty() ? "simulated" : sc.rod.id();
  curve.direction = dir;
  curve.pressure = sc.rod.internal_pressure();
  res["stroke_m"] = sc.protocol.stroke;
  if (sc.protocol.stroke == 0.0) {
    curve.samples = {{0.0, 0.0}};
    const LoadCase straight = LoadCase::force(sc.rod.length(), dir, 0.0);
    write_file(out_dir / "state.csv",
               state_csv(solve_point_load(sc.rod, sc.material, straight, sc.settings)));
    res["empty_stroke"] = true;
    res["stiffness_index_n_per_m"] = nullptr;
    res["terminal_force_n"] = 0.0;
  } else {
    curve = sweep_force_displacement(sc.rod, sc.material, dir, sc.protocol.stroke,
                                     sc.protocol.samples, sc.settings);
    if (curve.spec_id.empty()) curve.spec_id = "simulated";
    const double k = stiffness_index(curve, sc.protocol.stroke);
    const auto terminal = solve_imposed_displacement(
        sc.rod, sc.material, LoadCase::displacement(sc.rod.length(), dir, sc.protocol.stroke),
        sc.settings);
    write_file(out_dir / "state.csv", state_csv(terminal.state));
    res["empty_stroke"] = false;
    res["samples"] = curve.samples.size();
    res["stiffness_index_n_per_m"] = k;
    res["terminal_force_n"] = curve.samples.back().force;
    if (sc.protocol.target_stiffness) {
      const double target = *sc.protocol.target_stiffness;
      res["target"] = {{"stiffness_index_n_per_m", target},
                       {"rel_tol", sc.protocol.target_rel_tol},
                       {"met", std::abs(k - target) <= sc.protocol.target_rel_tol * target}};
    }
  }
  write_file(out_dir / "curve.csv", curve_csv(curve.samples));
  const std::vector<ForceDisplacementCurve> curves{curve};
  write_file(out_dir / "curve.svg", plot_curves(curves));
  return scope.finish(out_dir / "report.json");
}

RunReport cmd_battery(const fs::path& scenario_path, const fs::path& out_dir,
                      const CommandOptions& options) {
  const std::string text = read_file(scenario_path);
  ReportScope scope("battery", sha256_hex(text), options);
  Scenario sc = parse_scenario(text, scenario_path.filename().string());
  apply_settings_overrides(sc.settings, options.settings_overrides);
  if (!sc.battery) {
    throw ValidationError(scenario_path.filename().string() + ": field 'battery': missing");
  }
  const SweepProtocol protocol{sc.load.direction, sc.protocol.stroke, sc.protocol.samples};
  std::vector<BatteryVariant> variants =
      sc.battery->table2 ? table2_variants(sc.rod.with_bands({})) : sc.battery->variants;
  const ExperimentBattery battery =
      run_battery(sc.battery->table2 ? "table2" : "custom", std::move(variants), sc.material,
                  protocol, sc.settings, Execution::parallel);

  std::ostringstream table;
  write_battery_csv(table, battery);
  write_file(out_dir / "battery.csv", table.str());
  std::vector<ForceDisplacementCurve> curves;
  for (const auto& r : battery.results) {
    write_file(out_dir / "curves" / (r.id + ".csv"), curve_csv(r.curve.samples));
    curves.push_back(r.curve);
  }
  PlotStyle style;
  style.title = "Battery force vs displacement";
  style.height = std::max(420, 80 + 16 * static_cast<int>(curves.size()));
  write_file(out_dir / "battery.svg", plot_curves(curves, style));

  ojson& res = scope.report().results;
  res = to_json(battery);
  bool all_hold = true;
  if ((sc.battery->table2 || options.check_trends) && battery.protocol.stroke > 0.0) {
    res["trends"] = ojson::array();
    for (const auto& t : check_table2_trends(battery)) {
      res["trends"].push_back({{"name", t.name}, {"sequence", t.sequence}, {"holds", t.holds}});
      all_hold = all_hold && t.holds;
    }
  }
  RunReport report = scope.finish(out_dir / "report.json");
  if (options.check_trends && !all_hold) {
    throw TrendViolationError("battery: stiffness trends of the characterization table violated");
  }
  return report;
}

RunReport cmd_fit(const fs::path& data_dir, const std::string& kind, const fs::path& out_dir,
                  const CommandOptions& options) {
  if (kind != "modulus" && kind != "alpha" && kind != "eversion") {
    throw ValidationError("fit: kind must be modulus, alpha, or eversion");
  }
  const std::vector<fs::path> files = csv_files(data_dir);
  std::string digest_input;
  for (const auto& f : files) digest_input += f.filename().string() + '\n' + read_file(f);
  const fs::path scenario_path = data_dir / "scenario.json";
  std::string scenario_text;
  if (kind != "eversion") {
    scenario_text = read_file(scenario_path);
    digest_input += scenario_text;
  }
  ReportScope scope("fit", sha256_hex(digest_input), options);
  ojson& res = scope.report().results;
  res["kind"] = kind;

  if (kind == "eversion") {
    std::vector<EversionPoint> points;
    for (const auto& f : files) {
      std::istringstream in(read_file(f));
      auto more = read_eversion_csv(in, f.filename().string());
      points.insert(points.end(), more.begin(), more.end());
    }
    res["model"] = to_json(fit_eversion_pressure(points));
    return scope.finish(out_dir / "fit_result.json");
  }

  Scenario sc = parse_scenario(scenario_text, "scenario.json");
  apply_settings_overrides(sc.settings, options.settings_overrides);
  std::vector<MeasuredCurve> curves;
  for (const auto& f : files) {
    std::istringstream in(read_file(f));
    curves.push_back({read_curve_csv(in, f.filename().string()), f.stem().string(),
                      sc.rod.internal_pressure()});
  }
  FitOptions fit_options;
  fit_options.direction = sc.load.direction;
  fit_options.fit_modulus = sc.fit.fit_modulus;
  fit_options.fit_free_length = sc.fit.fit_free_length;
  const FitResult fit = kind == "modulus"
                            ? fit_effective_modulus(curves, sc.rod, sc.material, sc.settings,
                                                    fit_options)
                            : fit_alpha(curves, sc.rod, sc.material, sc.settings, fit_options);
  res["curves"] = curves.size();
  res["fit"] = to_json(fit);
  return scope.finish(out_dir / "fit_result.json");
}

RunReport cmd_design(const fs::path& problem_path, const fs::path& out_dir,
                     const CommandOptions& options) {
  const std::string text = read_file(problem_path);
  ReportScope scope("design", sha256_hex(text), options);
  DesignScenario ds = parse_design(text, problem_path.filename().string());
  apply_settings_overrides(ds.settings, options.settings_overrides);
  const DesignResult design = design_bands(ds.problem, ds.material, ds.settings);
  write_file(out_dir / "fabrication.txt", design.sheet.to_text());
  scope.report().results = to_json(design);
  return scope.finish(out_dir / "design.json");
}

void cmd_plot(const std::vector<fs::path>& paths, const fs::path& out_svg,
              const std::string& title) {
  std::vector<ForceDisplacementCurve> curves;
  for (const auto& p : paths) {
    std::istringstream in(read_file(p));
    ForceDisplacementCurve c;
    c.samples = read_curve_csv(in, p.filename().string());
    c.spec_id = p.stem().string();
    curves.push_back(std::move(c));
  }
  PlotStyle style;
  if (!title.empty()) style.title = title;
  write_file(out_svg, plot_curves(curves, style));
}

}  // namespace everrod
