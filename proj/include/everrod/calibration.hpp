#pragma once

#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "everrod/cosserat_solver.hpp"
#include "everrod/parallel.hpp"
#include "everrod/rod_domain.hpp"
#include "everrod/virtual_lab.hpp"

namespace everrod {

struct MeasuredCurve {
  std::vector<CurveSample> samples;
  std::string configuration;
  double pressure = 0.0;  // Pa

  // Non-decreasing x, at least five samples.
  void validate() const;
};

struct FitParameter {
  std::string name;
  std::string unit;
  double value;
};

struct FitResult {
  std::vector<FitParameter> parameters;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  bool at_boundary = false;
  std::string message;

  double value(const std::string& name) const;
};

struct FitOptions {
  bool fit_modulus = true;
  bool fit_free_length = false;
  // converged additionally requires residual_norm <= residual_tolerance.
  double residual_tolerance = std::numeric_limits<double>::infinity();
  double step_tolerance = 1e-6;  // relative parameter step
  int max_evaluations = 200;
  Eigen::Vector3d direction = Eigen::Vector3d::UnitY();
  Execution exec = Execution::parallel;
};

// Least-squares fit of E_eff (and optionally the free length) to band-free
// force-displacement curves. Parameters: "effective_modulus" [Pa],
// "free_length" [m].
FitResult fit_effective_modulus(const std::vector<MeasuredCurve>& curves, const RodSpec& spec,
                                const MaterialModel& mat, const SolverSettings& settings,
                                const FitOptions& options = {});

// One-dimensional fit of alpha in (0, 1] for the shared reduction ratio of
// the bands in `spec`, with E_eff fixed by `mat`. Parameter: "alpha".
FitResult fit_alpha(const std::vector<MeasuredCurve>& curves, const RodSpec& spec,
                    const MaterialModel& mat, const SolverSettings& settings,
                    const FitOptions& options = {});

// Free length at which the simulated stiffness index equals `target_k`,
// holding E_eff fixed. The clamp-to-grip length of a test rig is rarely
// reported; this recovers it from one measured stiffness index.
double calibrate_free_length(const RodSpec& spec, const MaterialModel& mat, double target_k,
                             const SweepProtocol& protocol, const SolverSettings& settings);

struct EversionPoint {
  double reduction_ratio;
  double pressure_kpa;
};

enum class EversionLaw {
  exponential,  // p0 exp(c rho)
  power,        // p0 (1 - rho)^(-c)
};

struct EversionPressureModel {
  EversionLaw law = EversionLaw::exponential;
  double p0_kpa = 0.0;
  double rate = 0.0;                  // c
  std::vector<EversionPoint> points;  // fitted data
  std::vector<double> log_residuals;  // ln(p_i) - ln(model(rho_i))
};

// Linear regression of ln p on the law's regressor.
EversionPressureModel fit_eversion_pressure(const std::vector<EversionPoint>& points,
                                            EversionLaw law = EversionLaw::exponential);

struct EversionPrediction {
  double pressure_kpa;
  bool out_of_range;  // rho outside the validated [0, 0.6]
};

EversionPrediction predict_eversion_pressure(const EversionPressureModel& model,
                                             double reduction_ratio);

// Medians of the minimum eversion pressure for rho = 0 ... 0.5.
std::vector<EversionPoint> reference_eversion_points();

}  // namespace everrod
