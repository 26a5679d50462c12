#include "everrod/virtual_lab.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "everrod/errors.hpp"

namespace everrod {

void ForceDisplacementCurve::validate() const {
  if (samples.empty()) throw DataError("curve: no samples");
  if (samples.front().displacement != 0.0 || samples.front().force != 0.0) {
    throw DataError("curve: must start at (0, 0)");
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].force < 0.0) throw DataError("curve: negative force");
    if (i > 0 && !(samples[i].displacement > samples[i - 1].displacement)) {
      throw DataError("curve: displacements must be strictly increasing");
    }
  }
}

std::vector<double> forces_at_displacements(const RodSpec& spec, const MaterialModel& mat,
                                            const Eigen::Vector3d& direction,
                                            std::span<const double> displacements,
                                            const SolverSettings& settings) {
  const RodModel model(spec, mat, spec.length(), settings);
  std::vector<double> forces;
  forces.reserve(displacements.size());
  DisplacementGuess guess;
  double prev_x = 0.0;
  for (double x : displacements) {
    if (!(x >= 0.0) || x < prev_x) {
      throw DataError("displacements must be non-negative and non-decreasing");
    }
    if (x == 0.0) {
      forces.push_back(0.0);
      continue;
    }
    if (guess.force && prev_x > 0.0) {
      const double ratio = x / prev_x;
      *guess.force *= ratio;
      if (guess.shooting.base_moment) *guess.shooting.base_moment *= ratio;
    }
    try {
      const auto sol = solve_imposed_displacement(
          model, LoadCase::displacement(spec.length(), direction, x), settings, guess);
      forces.push_back(sol.force);
      guess.force = sol.force;
      guess.shooting.base_moment = sol.base_moment;
      guess.shooting.jacobian = sol.jacobian;
    } catch (const SolverError& e) {
      std::ostringstream msg;
      msg << e.what() << " (spec '" << spec.id() << "', displacement " << x << " m)";
      throw SolverError(msg.str());
    }
    prev_x = x;
  }
  return forces;
}

ForceDisplacementCurve sweep_force_displacement(const RodSpec& spec, const MaterialModel& mat,
                                                const Eigen::Vector3d& direction,
                                                double max_displacement, int samples,
                                                const SolverSettings& settings) {
  if (!(max_displacement > 0.0)) throw ValidationError("sweep: stroke must be positive");
  if (samples < 2) throw ValidationError("sweep: at least two samples required");
  std::vector<double> xs(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) xs[i] = max_displacement * i / (samples - 1);
  xs.back() = max_displacement;
  const std::vector<double> fs = forces_at_displacements(spec, mat, direction, xs, settings);

  ForceDisplacementCurve curve;
  curve.spec_id = spec.id();
  curve.direction = direction;
  curve.pressure = spec.internal_pressure();
  curve.samples.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) curve.samples.push_back({xs[i], fs[i]});
  return curve;
}

double stiffness_index(const ForceDisplacementCurve& curve, double dx) {
  if (curve.samples.empty()) throw DataError("stiffness index: empty curve");
  if (!(dx > 0.0)) throw RangeError("stiffness index: stroke must be positive");
  const auto& s = curve.samples;
  if (dx < s.front().displacement || dx > s.back().displacement) {
    throw RangeError("stiffness index: stroke beyond curve support");
  }
  double f_at = s.back().force;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (dx <= s[i].displacement) {
      const double t = (dx - s[i - 1].displacement) / (s[i].displacement - s[i - 1].displacement);
      f_at = s[i - 1].force + t * (s[i].force - s[i - 1].force);
      if (dx == s[i].displacement) f_at = s[i].force;
      break;
    }
  }
  return (f_at - s.front().force) / dx;
}

StiffnessResult measure_stiffness(const RodSpec& spec, const MaterialModel& mat,
                                  const SweepProtocol& protocol, const SolverSettings& settings) {
  StiffnessResult result;
  result.curve = sweep_force_displacement(spec, mat, protocol.direction, protocol.stroke,
                                          protocol.samples, settings);
  result.stroke = protocol.stroke;
  result.stiffness_index = stiffness_index(result.curve, protocol.stroke);
  return result;
}

std::string layout_id(const std::vector<BandSpec>& bands) {
  if (bands.empty()) return "0-bands";
  std::vector<BandSpec> sorted = bands;
  std::sort(sorted.begin(), sorted.end(), [](const BandSpec& a, const BandSpec& b) {
    return a.distance_from_tip < b.distance_from_tip;
  });
  std::ostringstream id;
  id << 'r' << std::lround(sorted.front().reduction_ratio * 100.0) << '@';
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i) id << '+';
    id << std::lround(sorted[i].distance_from_tip * 1000.0);
  }
  return id.str();
}

namespace {

std::vector<BandSpec> bands_at(std::initializer_list<int> mm_from_tip, double ratio) {
  std::vector<BandSpec> bands;
  for (int mm : mm_from_tip) bands.push_back({mm * 1e-3, ratio, kDefaultBandWidth});
  return bands;
}

}  // namespace

std::vector<BatteryVariant> table2_variants(const RodSpec& base) {
  if (!base.bands().empty()) throw ValidationError("battery: base spec must be band-free");
  std::vector<BatteryVariant> out;
  auto add = [&](std::vector<BandSpec> bands, const char* group) {
    std::string id = layout_id(bands);
    for (const auto& v : out) {
      if (v.id == id) return;
    }
    out.push_back({id, group, base.with_bands(std::move(bands), id)});
  };
  add({}, "band-count");
  add(bands_at({50}, 0.5), "band-count");
  add(bands_at({50, 100}, 0.5), "band-count");
  add(bands_at({50, 100, 150}, 0.5), "band-count");
  add(bands_at({50, 100, 150, 200}, 0.5), "band-count");
  for (int mm : {30, 40, 50, 60, 70, 80, 90, 100}) add(bands_at({mm}, 0.5), "band-location");
  for (double ratio : {0.1, 0.2, 0.3, 0.4, 0.5}) add(bands_at({100}, ratio), "reduction-ratio");
  for (double ratio : {0.1, 0.2, 0.3}) add(bands_at({50, 100, 150}, ratio), "navigation");
  return out;
}

ExperimentBattery run_battery(std::string name, std::vector<BatteryVariant> variants,
                              const MaterialModel& mat, const SweepProtocol& protocol,
                              const SolverSettings& settings, Execution exec) {
  ExperimentBattery battery{std::move(name), std::move(variants), protocol, {}};
  battery.results.resize(battery.variants.size());
  for_each_index(battery.variants.size(), exec, [&](std::size_t i) {
    const BatteryVariant& v = battery.variants[i];
    VariantResult& r = battery.results[i];
    r.id = v.id;
    r.group = v.group;
    r.band_count = v.spec.bands().size();
    for (const auto& b : v.spec.bands()) {
      r.placements.push_back(b.distance_from_tip);
      r.reduction_ratio = std::max(r.reduction_ratio, b.reduction_ratio);
    }
    std::sort(r.placements.begin(), r.placements.end());
    if (protocol.stroke == 0.0) {
      r.curve.spec_id = v.spec.id();
      r.curve.direction = protocol.direction;
      r.curve.pressure = v.spec.internal_pressure();
      r.curve.samples = {{0.0, 0.0}};
      return;
    }
    StiffnessResult s = measure_stiffness(v.spec, mat, protocol, settings);
    r.stiffness_index = s.stiffness_index;
    r.terminal_force = s.curve.samples.back().force;
    r.curve = std::move(s.curve);
  });
  return battery;
}

ExperimentBattery run_table2_battery(const MaterialModel& mat, const SolverSettings& settings,
                                     const SweepProtocol& protocol, const RodSpec& base,
                                     Execution exec) {
  return run_battery("table2", table2_variants(base), mat, protocol, settings, exec);
}

std::vector<TrendCheck> check_table2_trends(const ExperimentBattery& battery) {
  std::map<std::string, double> k;
  for (const auto& r : battery.results) k[r.id] = r.stiffness_index;

  std::vector<TrendCheck> checks{
      {"band count", {"0-bands", "r50@50", "r50@50+100", "r50@50+100+150",
                      "r50@50+100+150+200"}},
      {"band distance from tip", {"0-bands", "r50@30", "r50@40", "r50@50", "r50@60", "r50@70",
                                  "r50@80", "r50@90", "r50@100"}},
      {"reduction ratio", {"0-bands", "r10@100", "r20@100", "r30@100", "r40@100", "r50@100"}},
  };
  for (auto& c : checks) {
    c.holds = true;
    for (std::size_t i = 0; i < c.sequence.size(); ++i) {
      auto it = k.find(c.sequence[i]);
      if (it == k.end()) {
        c.holds = false;
        break;
      }
      if (i > 0 && !(it->second < k.at(c.sequence[i - 1]))) c.holds = false;
    }
  }
  return checks;
}

}  // namespace everrod
