#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "everrod/rod_domain.hpp"

namespace everrod {

// Discretized static equilibrium. Vectors are in the global frame; R maps
// rod-local directions to global ones.
struct RodState {
  std::vector<double> s;
  std::vector<Eigen::Vector3d> P;
  std::vector<Eigen::Matrix3d> R;
  std::vector<Eigen::Vector3d> n;
  std::vector<Eigen::Vector3d> m;

  std::size_t size() const { return s.size(); }
  const Eigen::Vector3d& tip_position() const { return P.back(); }
  const Eigen::Vector3d& base_moment() const { return m.front(); }

  // Position at the station closest to arc length `station`.
  const Eigen::Vector3d& position_at(double station) const;

  double max_orthonormality_error() const;
  double min_rotation_determinant() const;
};

// Point load at arc length `station`, either a prescribed force magnitude or a
// prescribed displacement of that station along `direction`.
struct LoadCase {
  enum class Mode { force, displacement };

  double station = 0.0;
  Eigen::Vector3d direction = Eigen::Vector3d::UnitY();
  Mode mode = Mode::force;
  double magnitude = 0.0;  // N in force mode, m in displacement mode

  static LoadCase force(double station, const Eigen::Vector3d& direction, double newtons);
  static LoadCase displacement(double station, const Eigen::Vector3d& direction, double meters);

  void validate(double rod_length) const;
};

struct SolverSettings {
  int grid_nodes = 600;             // N, intervals along the rod
  double moment_tol = 1e-9;         // N m, shooting residual
  int max_iterations = 50;          // shooting Newton iterations
  double displacement_tol = 1e-6;   // m
  double max_force = 100.0;         // N, bracket limit in displacement mode
  int max_force_evaluations = 60;

  void validate() const;
  bool operator==(const SolverSettings&) const = default;
};

// Fixed-step discretization of one rod for one load station: grid nodes with
// a node exactly at the load, sub-steps split at band edges so every sub-step
// sees constant section properties.
class RodModel {
 public:
  RodModel(const RodSpec& spec, const MaterialModel& mat, double load_station,
           const SolverSettings& settings);

  const RodSpec& spec() const { return spec_; }
  const std::vector<double>& stations() const { return stations_; }
  double load_station() const { return load_station_; }
  std::size_t load_node() const { return load_node_; }

  // Bending stiffness E I at the base, used for initial force estimates.
  double base_bending_stiffness() const { return base_bending_stiffness_; }

  // Integrates the static equilibrium equations from the clamped base with base
  // moment m0 and point force `force` (global). Stops at node `last_node`.
  // Fills `out` when non-null. Returns m at the last node.
  Eigen::Vector3d integrate(const Eigen::Vector3d& force, const Eigen::Vector3d& m0,
                            std::size_t last_node, RodState* out) const;

 private:
  struct Step {
    double h;
    Eigen::Vector3d compliance_se;  // 1 / diag(K_se)
    Eigen::Vector3d compliance_bt;  // 1 / diag(K_bt)
    bool loaded;                    // before the load station
    bool ends_on_node;
  };

  RodSpec spec_;
  double load_station_;
  std::size_t load_node_ = 0;
  double base_bending_stiffness_ = 0.0;
  std::vector<double> stations_;
  std::vector<Step> steps_;
};

// Forward integration from the clamped base with trial base moment m0.
// The load must be force-controlled.
RodState integrate_ivp(const RodSpec& spec, const MaterialModel& mat, const LoadCase& load,
                       const Eigen::Vector3d& m0, const SolverSettings& settings);

// Shooting warm start: base moment and residual Jacobian from a nearby solve.
struct ShootingGuess {
  std::optional<Eigen::Vector3d> base_moment;
  std::optional<Eigen::Matrix3d> jacobian;
};

struct PointLoadSolution {
  RodState state;
  Eigen::Vector3d base_moment;
  Eigen::Matrix3d jacobian;  // d m(s_c) / d m0 at the solution
  double residual = 0.0;
  int iterations = 0;
  int integrations = 0;
};

PointLoadSolution shoot_point_load(const RodModel& model, const Eigen::Vector3d& force,
                                   const SolverSettings& settings,
                                   const ShootingGuess& guess = {});

RodState solve_point_load(const RodSpec& spec, const MaterialModel& mat, const LoadCase& load,
                          const SolverSettings& settings);

struct DisplacementGuess {
  std::optional<double> force;
  ShootingGuess shooting;
};

struct DisplacementSolution {
  RodState state;
  double force = 0.0;
  Eigen::Vector3d base_moment = Eigen::Vector3d::Zero();
  Eigen::Matrix3d jacobian = Eigen::Matrix3d::Identity();
  int force_evaluations = 0;
};

// Displacement of station `load.station` along `load.direction`, relative to
// the undeformed straight rod.
double projected_displacement(const RodState& state, const LoadCase& load);

DisplacementSolution solve_imposed_displacement(const RodModel& model, const LoadCase& load,
                                                const SolverSettings& settings,
                                                const DisplacementGuess& guess = {});

DisplacementSolution solve_imposed_displacement(const RodSpec& spec, const MaterialModel& mat,
                                                const LoadCase& load,
                                                const SolverSettings& settings);

}  // namespace everrod
