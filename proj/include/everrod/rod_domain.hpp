#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace everrod {

inline constexpr double kDefaultBandWidth = 0.015;  // m
inline constexpr double kMaxReductionRatio = 0.6;

// Circumferential constriction, located by its center's distance from the tip.
struct BandSpec {
  double distance_from_tip = 0.0;  // m
  double reduction_ratio = 0.0;    // fraction of diameter removed
  double width = kDefaultBandWidth;

  bool operator==(const BandSpec&) const = default;
};

// Pressure-dependent effective modulus and the reduction-ratio to alpha map.
class MaterialModel {
 public:
  struct ModulusPoint {
    double pressure;  // Pa
    double modulus;   // Pa
  };

  MaterialModel(std::vector<ModulusPoint> modulus_table, double poisson_ratio,
                std::map<double, double> alpha_table);

  // 25.2 MPa at 6.9 kPa, nu = 0.4, alpha identified for rho = 0.1 ... 0.5.
  static MaterialModel reference();
  static std::map<double, double> reference_alpha_table();

  // Linear interpolation over the modulus table. A single-entry table is
  // applied at every pressure.
  double effective_modulus_at(double pressure) const;

  // Piecewise-linear interpolation over the alpha table; rho beyond the
  // largest calibrated ratio throws CalibrationMissingError.
  double alpha_for(double reduction_ratio) const;

  double shear_modulus(double youngs_modulus) const {
    return youngs_modulus / (2.0 * (1.0 + poisson_ratio_));
  }

  const std::vector<ModulusPoint>& modulus_table() const { return modulus_table_; }
  const std::map<double, double>& alpha_table() const { return alpha_table_; }
  double poisson_ratio() const { return poisson_ratio_; }
  double max_calibrated_ratio() const { return alpha_table_.rbegin()->first; }

  // Copies with one ingredient replaced. with_modulus installs a
  // single-point table at the given pressure.
  MaterialModel with_modulus(double pressure, double modulus) const;
  MaterialModel with_alpha_table(std::map<double, double> alpha_table) const;

 private:
  std::vector<ModulusPoint> modulus_table_;
  double poisson_ratio_;
  std::map<double, double> alpha_table_;
};

// Geometry, band layout, and inflation pressure of one prototype.
class RodSpec {
 public:
  RodSpec(double length, double base_radius, double wall_thickness,
          std::vector<BandSpec> bands, double internal_pressure,
          std::string id = {});

  // 600 mm long, 40 mm diameter, 0.05 mm wall, 6.9 kPa.
  static RodSpec reference(std::vector<BandSpec> bands = {}, std::string id = {});

  double length() const { return length_; }
  double base_radius() const { return base_radius_; }
  double wall_thickness() const { return wall_thickness_; }
  double internal_pressure() const { return internal_pressure_; }
  const std::vector<BandSpec>& bands() const { return bands_; }
  const std::string& id() const { return id_; }

  double band_center(const BandSpec& band) const { return length_ - band.distance_from_tip; }

  // Band whose support [center - w/2, center + w/2] contains s, if any.
  const BandSpec* band_at(double s) const;

  // Sorted arc positions of every band edge.
  std::vector<double> band_edges() const;

  RodSpec with_bands(std::vector<BandSpec> bands, std::string id = {}) const;
  RodSpec with_length(double length) const;

 private:
  double length_;
  double base_radius_;
  double wall_thickness_;
  std::vector<BandSpec> bands_;  // ascending arc position of the center
  double internal_pressure_;
  std::string id_;
};

struct CrossSection {
  double radius;
  double area;
  double second_moment;

  // Thin-walled annulus: A = 2 pi r t, I = pi r^3 t.
  static CrossSection thin_wall(double radius, double wall_thickness);
};

// Diagonals of K_se = diag(GA, GA, EA) and K_bt = diag(EI, EI, 2GI).
struct StiffnessMatrices {
  Eigen::Vector3d shear_extension;
  Eigen::Vector3d bending_torsion;

  Eigen::Matrix3d K_se() const { return shear_extension.asDiagonal(); }
  Eigen::Matrix3d K_bt() const { return bending_torsion.asDiagonal(); }
};

double radius_profile(const RodSpec& spec, double s);
CrossSection cross_section_at(const RodSpec& spec, double s);
double effective_modulus(const MaterialModel& mat, const RodSpec& spec, double s);
StiffnessMatrices stiffness_matrices_at(const MaterialModel& mat, const RodSpec& spec, double s);

}  // namespace everrod
