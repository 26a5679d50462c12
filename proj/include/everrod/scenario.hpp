#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "everrod/band_designer.hpp"
#include "everrod/calibration.hpp"
#include "everrod/cosserat_solver.hpp"
#include "everrod/rod_domain.hpp"
#include "everrod/virtual_lab.hpp"

namespace everrod {

inline constexpr const char* kScenarioSchema = "everrod.scenario/1";
inline constexpr const char* kDesignSchema = "everrod.design/1";
inline constexpr const char* kToolVersion = "1.0.0";

struct Protocol {
  enum class Kind { single, sweep };
  Kind kind = Kind::single;
  double stroke = 0.02;  // m
  int samples = 11;
  std::optional<double> target_stiffness;  // N/m
  double target_rel_tol = 0.05;
};

struct BatteryConfig {
  bool table2 = false;
  std::vector<BatteryVariant> variants;  // explicit variants when not table2
};

struct FitConfig {
  bool fit_modulus = true;
  bool fit_free_length = false;
};

// One JSON scenario document. Lengths in m, forces in N, moduli in Pa;
// pressures in kPa (fields ending in _kpa).
struct Scenario {
  RodSpec rod = RodSpec::reference();
  MaterialModel material = MaterialModel::reference();
  LoadCase load = LoadCase::displacement(0.6, Eigen::Vector3d::UnitY(), 0.02);
  Protocol protocol;
  SolverSettings settings;
  std::optional<BatteryConfig> battery;
  FitConfig fit;
};

Scenario parse_scenario(const std::string& text, const std::string& source);

struct DesignScenario {
  DesignProblem problem;
  MaterialModel material = MaterialModel::reference();
  SolverSettings settings;
};

DesignScenario parse_design(const std::string& text, const std::string& source);

// "grid_nodes=800,moment_tol=1e-10,displacement_tol=1e-7,max_iterations=80"
void apply_settings_overrides(SolverSettings& settings, const std::string& overrides);

std::string sha256_hex(const std::string& bytes);

nlohmann::ordered_json to_json(const FitResult& fit);
nlohmann::ordered_json to_json(const EversionPressureModel& model);
nlohmann::ordered_json to_json(const DesignResult& design);
nlohmann::ordered_json to_json(const ExperimentBattery& battery);
nlohmann::ordered_json to_json(const BandSpec& band);

}  // namespace everrod
