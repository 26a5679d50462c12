#include "everrod/rod_domain.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include <spdlog/spdlog.h>

#include "everrod/errors.hpp"
#include "everrod/logging.hpp"

namespace everrod {

namespace {

std::string fmt_num(double v) { return std::to_string(v); }

}  // namespace

MaterialModel::MaterialModel(std::vector<ModulusPoint> modulus_table, double poisson_ratio,
                             std::map<double, double> alpha_table)
    : modulus_table_(std::move(modulus_table)),
      poisson_ratio_(poisson_ratio),
      alpha_table_(std::move(alpha_table)) {
  if (modulus_table_.empty()) {
    throw ValidationError("material: modulus table is empty");
  }
  std::sort(modulus_table_.begin(), modulus_table_.end(),
            [](const ModulusPoint& a, const ModulusPoint& b) { return a.pressure < b.pressure; });
  for (std::size_t i = 0; i < modulus_table_.size(); ++i) {
    const auto& p = modulus_table_[i];
    if (!(p.modulus > 0.0) || !std::isfinite(p.modulus)) {
      throw ValidationError("material: effective modulus must be positive");
    }
    if (!(p.pressure >= 0.0)) {
      throw ValidationError("material: modulus table pressure must be non-negative");
    }
    if (i > 0 && modulus_table_[i - 1].pressure == p.pressure) {
      throw ValidationError("material: duplicate pressure in modulus table");
    }
  }
  if (!(poisson_ratio_ >= 0.0 && poisson_ratio_ < 0.5)) {
    throw ValidationError("material: Poisson ratio must lie in [0, 0.5)");
  }
  auto zero = alpha_table_.find(0.0);
  if (zero == alpha_table_.end() || zero->second != 1.0) {
    throw ValidationError("material: alpha table must map reduction ratio 0 to 1");
  }
  for (const auto& [rho, alpha] : alpha_table_) {
    if (!(rho >= 0.0 && rho < 1.0)) {
      throw ValidationError("material: alpha table reduction ratio outside [0, 1)");
    }
    if (!(alpha > 0.0 && alpha <= 1.0)) {
      throw ValidationError("material: alpha must lie in (0, 1], got " + fmt_num(alpha));
    }
  }
}

std::map<double, double> MaterialModel::reference_alpha_table() {
  return {{0.0, 1.0}, {0.1, 0.55}, {0.2, 0.53}, {0.3, 0.46}, {0.4, 0.43}, {0.5, 0.36}};
}

MaterialModel MaterialModel::reference() {
  return MaterialModel({{6.9e3, 25.2e6}}, 0.4, reference_alpha_table());
}

double MaterialModel::effective_modulus_at(double pressure) const {
  if (modulus_table_.size() == 1) {
    const auto& only = modulus_table_.front();
    if (pressure != only.pressure) {
      static std::once_flag warned;
      std::call_once(warned, [&] {
        logger().warn("single-point modulus table ({} Pa at {} Pa) applied at {} Pa",
                      only.modulus, only.pressure, pressure);
      });
    }
    return only.modulus;
  }
  const auto& front = modulus_table_.front();
  const auto& back = modulus_table_.back();
  if (pressure < front.pressure || pressure > back.pressure) {
    throw CalibrationMissingError("material: pressure " + fmt_num(pressure) +
                                  " Pa outside calibrated modulus range");
  }
  auto hi = std::lower_bound(
      modulus_table_.begin(), modulus_table_.end(), pressure,
      [](const ModulusPoint& p, double value) { return p.pressure < value; });
  if (hi->pressure == pressure) return hi->modulus;
  auto lo = std::prev(hi);
  const double t = (pressure - lo->pressure) / (hi->pressure - lo->pressure);
  return lo->modulus + t * (hi->modulus - lo->modulus);
}

double MaterialModel::alpha_for(double reduction_ratio) const {
  if (reduction_ratio < 0.0) {
    throw CalibrationMissingError("material: negative reduction ratio");
  }
  auto hi = alpha_table_.lower_bound(reduction_ratio);
  if (hi == alpha_table_.end()) {
    throw CalibrationMissingError("material: no alpha calibrated for reduction ratio " +
                                  fmt_num(reduction_ratio));
  }
  if (hi->first == reduction_ratio) return hi->second;
  auto lo = std::prev(hi);
  const double t = (reduction_ratio - lo->first) / (hi->first - lo->first);
  return lo->second + t * (hi->second - lo->second);
}

MaterialModel MaterialModel::with_modulus(double pressure, double modulus) const {
  return MaterialModel({{pressure, modulus}}, poisson_ratio_, alpha_table_);
}

MaterialModel MaterialModel::with_alpha_table(std::map<double, double> alpha_table) const {
  return MaterialModel(modulus_table_, poisson_ratio_, std::move(alpha_table));
}

RodSpec::RodSpec(double length, double base_radius, double wall_thickness,
                 std::vector<BandSpec> bands, double internal_pressure, std::string id)
    : length_(length),
      base_radius_(base_radius),
      wall_thickness_(wall_thickness),
      bands_(std::move(bands)),
      internal_pressure_(internal_pressure),
      id_(std::move(id)) {
  if (!(length_ > 0.0) || !std::isfinite(length_)) {
    throw ValidationError("rod: length must be positive");
  }
  if (!(base_radius_ > 0.0)) throw ValidationError("rod: base radius must be positive");
  if (!(wall_thickness_ > 0.0 && wall_thickness_ < base_radius_)) {
    throw ValidationError("rod: wall thickness must lie in (0, base radius)");
  }
  if (!(internal_pressure_ >= 0.0)) {
    throw ValidationError("rod: internal pressure must be non-negative");
  }
  for (const auto& b : bands_) {
    if (!(b.distance_from_tip >= 0.0 && b.distance_from_tip <= length_)) {
      throw ValidationError("rod: band distance from tip " + fmt_num(b.distance_from_tip) +
                            " m outside [0, L]");
    }
    if (!(b.reduction_ratio >= 0.0 && b.reduction_ratio <= kMaxReductionRatio)) {
      throw ValidationError("rod: band reduction ratio outside [0, 0.6]");
    }
    if (!(b.width > 0.0)) throw ValidationError("rod: band width must be positive");
    const double c = band_center(b);
    if (c - 0.5 * b.width < 0.0 || c + 0.5 * b.width > length_) {
      throw ValidationError("rod: band at " + fmt_num(b.distance_from_tip) +
                            " m from tip does not fit inside the rod");
    }
  }
  std::sort(bands_.begin(), bands_.end(), [this](const BandSpec& a, const BandSpec& b) {
    return band_center(a) < band_center(b);
  });
  for (std::size_t i = 1; i < bands_.size(); ++i) {
    const double prev_hi = band_center(bands_[i - 1]) + 0.5 * bands_[i - 1].width;
    const double lo = band_center(bands_[i]) - 0.5 * bands_[i].width;
    if (lo < prev_hi) throw ValidationError("rod: bands overlap");
  }
}

RodSpec RodSpec::reference(std::vector<BandSpec> bands, std::string id) {
  return RodSpec(0.600, 0.020, 5.0e-5, std::move(bands), 6.9e3, std::move(id));
}

const BandSpec* RodSpec::band_at(double s) const {
  for (const auto& b : bands_) {
    const double c = band_center(b);
    if (s >= c - 0.5 * b.width && s <= c + 0.5 * b.width) return &b;
  }
  return nullptr;
}

std::vector<double> RodSpec::band_edges() const {
  std::vector<double> edges;
  edges.reserve(2 * bands_.size());
  for (const auto& b : bands_) {
    const double c = band_center(b);
    edges.push_back(c - 0.5 * b.width);
    edges.push_back(c + 0.5 * b.width);
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

RodSpec RodSpec::with_bands(std::vector<BandSpec> bands, std::string id) const {
  return RodSpec(length_, base_radius_, wall_thickness_, std::move(bands), internal_pressure_,
                 id.empty() ? id_ : std::move(id));
}

RodSpec RodSpec::with_length(double length) const {
  return RodSpec(length, base_radius_, wall_thickness_, bands_, internal_pressure_, id_);
}

CrossSection CrossSection::thin_wall(double radius, double wall_thickness) {
  if (!(radius > 0.0) || !(wall_thickness > 0.0)) {
    throw ValidationError("cross-section: radius and wall thickness must be positive");
  }
  const double pi = std::numbers::pi;
  return {radius, 2.0 * pi * radius * wall_thickness,
          pi * radius * radius * radius * wall_thickness};
}

double radius_profile(const RodSpec& spec, double s) {
  if (!(s >= 0.0 && s <= spec.length())) {
    throw DomainError("arc length " + fmt_num(s) + " m outside [0, L]");
  }
  const BandSpec* band = spec.band_at(s);
  return band ? spec.base_radius() * (1.0 - band->reduction_ratio) : spec.base_radius();
}

CrossSection cross_section_at(const RodSpec& spec, double s) {
  return CrossSection::thin_wall(radius_profile(spec, s), spec.wall_thickness());
}

double effective_modulus(const MaterialModel& mat, const RodSpec& spec, double s) {
  if (!(s >= 0.0 && s <= spec.length())) {
    throw DomainError("arc length " + fmt_num(s) + " m outside [0, L]");
  }
  const double e_eff = mat.effective_modulus_at(spec.internal_pressure());
  const BandSpec* band = spec.band_at(s);
  return band ? mat.alpha_for(band->reduction_ratio) * e_eff : e_eff;
}

StiffnessMatrices stiffness_matrices_at(const MaterialModel& mat, const RodSpec& spec, double s) {
  const CrossSection cs = cross_section_at(spec, s);
  const double e = effective_modulus(mat, spec, s);
  const double g = mat.shear_modulus(e);
  return {Eigen::Vector3d(g * cs.area, g * cs.area, e * cs.area),
          Eigen::Vector3d(e * cs.second_moment, e * cs.second_moment,
                          2.0 * g * cs.second_moment)};
}

}  // namespace everrod
