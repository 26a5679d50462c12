#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "everrod/cosserat_solver.hpp"
#include "everrod/parallel.hpp"
#include "everrod/rod_domain.hpp"

namespace everrod {

struct CurveSample {
  double displacement;  // m
  double force;         // N
  bool operator==(const CurveSample&) const = default;
};

struct ForceDisplacementCurve {
  std::vector<CurveSample> samples;
  std::string spec_id;
  Eigen::Vector3d direction = Eigen::Vector3d::UnitY();
  double pressure = 0.0;  // Pa

  // x strictly increasing from 0, F(0) = 0, F >= 0.
  void validate() const;
};

struct StiffnessResult {
  ForceDisplacementCurve curve;
  double stiffness_index = 0.0;  // N/m
  double stroke = 0.0;           // m
};

// Tip stroke protocol shared by the characterization experiments.
struct SweepProtocol {
  Eigen::Vector3d direction = Eigen::Vector3d::UnitY();
  double stroke = 0.02;  // m
  int samples = 5;
};

// Tip forces at the given non-decreasing, non-negative displacements, each
// solve warm-started from the previous one.
std::vector<double> forces_at_displacements(const RodSpec& spec, const MaterialModel& mat,
                                            const Eigen::Vector3d& direction,
                                            std::span<const double> displacements,
                                            const SolverSettings& settings);

ForceDisplacementCurve sweep_force_displacement(const RodSpec& spec, const MaterialModel& mat,
                                                const Eigen::Vector3d& direction,
                                                double max_displacement, int samples,
                                                const SolverSettings& settings);

// Secant (F(dx) - F(0)) / dx with F linearly interpolated between samples.
double stiffness_index(const ForceDisplacementCurve& curve, double dx);

StiffnessResult measure_stiffness(const RodSpec& spec, const MaterialModel& mat,
                                  const SweepProtocol& protocol, const SolverSettings& settings);

struct BatteryVariant {
  std::string id;
  std::string group;
  RodSpec spec;
};

struct VariantResult {
  std::string id;
  std::string group;
  std::size_t band_count = 0;
  std::vector<double> placements;  // m from tip
  double reduction_ratio = 0.0;    // shared ratio, 0 when unbanded
  double stiffness_index = 0.0;
  double terminal_force = 0.0;
  ForceDisplacementCurve curve;
};

struct ExperimentBattery {
  std::string name;
  std::vector<BatteryVariant> variants;
  SweepProtocol protocol;
  std::vector<VariantResult> results;  // same order as variants
};

// Identifier derived from the layout, e.g. "r50@50+100" or "0-bands".
std::string layout_id(const std::vector<BandSpec>& bands);

// Every distinct prototype of the characterization table (band count, band
// location, reduction ratio) plus the three navigation prototypes, built on
// `base` (band-free geometry).
std::vector<BatteryVariant> table2_variants(const RodSpec& base);

ExperimentBattery run_battery(std::string name, std::vector<BatteryVariant> variants,
                              const MaterialModel& mat, const SweepProtocol& protocol,
                              const SolverSettings& settings,
                              Execution exec = Execution::parallel);

ExperimentBattery run_table2_battery(const MaterialModel& mat, const SolverSettings& settings,
                                     const SweepProtocol& protocol = {},
                                     const RodSpec& base = RodSpec::reference(),
                                     Execution exec = Execution::parallel);

struct TrendCheck {
  std::string name;
  std::vector<std::string> sequence;  // variant ids, k expected strictly decreasing
  bool holds = false;
};

// Band count, band distance from tip, reduction ratio.
std::vector<TrendCheck> check_table2_trends(const ExperimentBattery& battery);

}  // namespace everrod
