#include "everrod/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <unsupported/Eigen/LevenbergMarquardt>

#include "everrod/errors.hpp"
#include "everrod/logging.hpp"

#include <spdlog/spdlog.h>

namespace everrod {

void MeasuredCurve::validate() const {
  if (samples.size() < 5) {
    throw DataError("measured curve '" + configuration + "': at least 5 samples required");
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (!std::isfinite(s.displacement) || !std::isfinite(s.force) || s.displacement < 0.0) {
      throw DataError("measured curve '" + configuration + "': invalid sample");
    }
    if (i > 0 && s.displacement < samples[i - 1].displacement) {
      throw DataError("measured curve '" + configuration + "': displacement decreases");
    }
  }
}

double FitResult::value(const std::string& name) const {
  for (const auto& p : parameters) {
    if (p.name == name) return p.value;
  }
  throw ValidationError("fit result has no parameter '" + name + "'");
}

namespace {

// Solver tolerances tight enough that the forward model is smooth in the
// fitted parameters at finite-difference resolution.
SolverSettings forward_settings(SolverSettings s) {
  s.moment_tol = std::min(s.moment_tol, 1e-12);
  s.displacement_tol = std::min(s.displacement_tol, 1e-10);
  return s;
}

std::size_t total_samples(const std::vector<MeasuredCurve>& curves) {
  std::size_t n = 0;
  for (const auto& c : curves) n += c.samples.size();
  return n;
}

void check_curves(const std::vector<MeasuredCurve>& curves) {
  if (curves.empty()) throw DataError("fit: no curves supplied");
  bool any_force = false;
  for (const auto& c : curves) {
    c.validate();
    for (const auto& s : c.samples) any_force = any_force || s.force != 0.0;
  }
  if (!any_force) throw DataError("fit: all measured forces are zero");
}

// Model forces at every measured displacement, concatenated curve by curve.
Eigen::VectorXd model_forces(const std::vector<MeasuredCurve>& curves, const RodSpec& spec,
                             const MaterialModel& mat, const SolverSettings& settings,
                             const FitOptions& options) {
  std::vector<std::vector<double>> per_curve(curves.size());
  for_each_index(curves.size(), options.exec, [&](std::size_t i) {
    std::vector<double> xs;
    xs.reserve(curves[i].samples.size());
    for (const auto& s : curves[i].samples) xs.push_back(s.displacement);
    per_curve[i] = forces_at_displacements(spec, mat, options.direction, xs, settings);
  });
  Eigen::VectorXd out(static_cast<Eigen::Index>(total_samples(curves)));
  Eigen::Index k = 0;
  for (const auto& fs : per_curve) {
    for (double f : fs) out[k++] = f;
  }
  return out;
}

Eigen::VectorXd measured_forces(const std::vector<MeasuredCurve>& curves) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(total_samples(curves)));
  Eigen::Index k = 0;
  for (const auto& c : curves) {
    for (const auto& s : c.samples) out[k++] = s.force;
  }
  return out;
}

struct ModulusResiduals : Eigen::DenseFunctor<double> {
  const std::vector<MeasuredCurve>& curves;
  const RodSpec& spec;
  const MaterialModel& mat;
  SolverSettings settings;
  const FitOptions& options;
  Eigen::VectorXd measured;
  double modulus0;
  double length0;

  ModulusResiduals(const std::vector<MeasuredCurve>& c, const RodSpec& s,
                   const MaterialModel& m, const SolverSettings& st, const FitOptions& o,
                   int inputs)
      : DenseFunctor<double>(inputs, static_cast<int>(total_samples(c))),
        curves(c),
        spec(s),
        mat(m),
        settings(forward_settings(st)),
        options(o),
        measured(measured_forces(c)),
        modulus0(m.effective_modulus_at(s.internal_pressure())),
        length0(s.length()) {}

  // Parameters are logarithms of the ratios to the initial values.
  std::pair<double, double> unpack(const InputType& x) const {
    int k = 0;
    const double e = options.fit_modulus ? modulus0 * std::exp(x[k++]) : modulus0;
    const double l = options.fit_free_length ? length0 * std::exp(x[k++]) : length0;
    return {e, l};
  }

  int operator()(const InputType& x, ValueType& fvec) const {
    const auto [e, l] = unpack(x);
    const RodSpec trial = l == length0 ? spec : spec.with_length(l);
    fvec = model_forces(curves, trial, mat.with_modulus(spec.internal_pressure(), e), settings,
                        options) -
           measured;
    return 0;
  }

  int df(const InputType& x, JacobianType& fjac) const {
    ValueType base(values());
    (*this)(x, base);
    fjac.resize(values(), inputs());
    constexpr double h = 1e-6;
    for (int j = 0; j < inputs(); ++j) {
      InputType probe = x;
      probe[j] += h;
      ValueType shifted(values());
      (*this)(probe, shifted);
      fjac.col(j) = (shifted - base) / h;
    }
    return 0;
  }
};

bool lm_converged(Eigen::LevenbergMarquardtSpace::Status status) {
  using namespace Eigen::LevenbergMarquardtSpace;
  return status == RelativeReductionTooSmall || status == RelativeErrorTooSmall ||
         status == RelativeErrorAndReductionTooSmall || status == CosinusTooSmall;
}

}  // namespace

FitResult fit_effective_modulus(const std::vector<MeasuredCurve>& curves, const RodSpec& spec,
                                const MaterialModel& mat, const SolverSettings& settings,
                                const FitOptions& options) {
  check_curves(curves);
  if (!spec.bands().empty()) {
    throw ValidationError("fit_effective_modulus: spec must be band-free");
  }
  for (const auto& c : curves) {
    if (c.pressure != curves.front().pressure) {
      throw DataError("fit_effective_modulus: curves recorded at different pressures");
    }
  }
  const int inputs = int(options.fit_modulus) + int(options.fit_free_length);
  if (inputs == 0) throw ValidationError("fit_effective_modulus: nothing to fit");

  ModulusResiduals functor(curves, spec, mat, settings, options, inputs);
  Eigen::LevenbergMarquardt<ModulusResiduals> lm(functor);
  lm.setXtol(options.step_tolerance);
  lm.setFtol(1e-12);
  lm.setMaxfev(options.max_evaluations);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(inputs);
  const auto status = lm.minimize(x);

  const auto [e, l] = functor.unpack(x);
  Eigen::VectorXd r(functor.values());
  functor(x, r);

  FitResult result;
  if (options.fit_modulus) result.parameters.push_back({"effective_modulus", "Pa", e});
  if (options.fit_free_length) result.parameters.push_back({"free_length", "m", l});
  result.residual_norm = r.norm();
  result.iterations = static_cast<int>(lm.iterations());
  result.converged = lm_converged(status) && result.residual_norm <= options.residual_tolerance;
  result.message = "levenberg-marquardt status " + std::to_string(static_cast<int>(status));
  logger().info("modulus fit: E = {} Pa, L = {} m, residual {} N, {} iterations", e, l,
                result.residual_norm, result.iterations);
  return result;
}

FitResult fit_alpha(const std::vector<MeasuredCurve>& curves, const RodSpec& spec,
                    const MaterialModel& mat, const SolverSettings& settings,
                    const FitOptions& options) {
  check_curves(curves);
  FitResult result;

  std::set<double> ratios;
  for (const auto& b : spec.bands()) {
    if (b.reduction_ratio > 0.0) ratios.insert(b.reduction_ratio);
  }
  if (ratios.size() > 1) {
    throw ValidationError("fit_alpha: bands must share one reduction ratio");
  }
  const Eigen::VectorXd measured = measured_forces(curves);
  const SolverSettings tight = forward_settings(settings);

  auto sse = [&](double alpha) {
    const double ratio = ratios.empty() ? 0.0 : *ratios.begin();
    std::map<double, double> table{{0.0, 1.0}};
    if (ratio > 0.0) table[ratio] = alpha;
    return (model_forces(curves, spec, mat.with_alpha_table(std::move(table)), tight, options) -
            measured)
        .squaredNorm();
  };

  if (ratios.empty()) {
    // Nothing in the spec can soften.
    result.parameters.push_back({"alpha", "1", 1.0});
    result.residual_norm = std::sqrt(sse(1.0));
    result.at_boundary = true;
    result.converged = false;
    result.message = "spec has no constricted band; alpha is unidentifiable";
    return result;
  }

  constexpr double lower = 0.02;
  constexpr double upper = 1.0;
  std::uintmax_t max_iter = static_cast<std::uintmax_t>(options.max_evaluations);
  const auto [alpha, best] =
      boost::math::tools::brent_find_minima(sse, lower, upper, std::numeric_limits<double>::digits / 2, max_iter);

  result.parameters.push_back({"alpha", "1", alpha});
  result.residual_norm = std::sqrt(best);
  result.iterations = static_cast<int>(max_iter);
  result.at_boundary = alpha > upper - 1e-4 || alpha < lower + 1e-4;
  result.converged = max_iter < static_cast<std::uintmax_t>(options.max_evaluations) &&
                     result.residual_norm <= options.residual_tolerance;
  result.message = result.at_boundary ? "optimum on the alpha boundary; band shows no "
                                        "measurable softening"
                                      : "brent";
  return result;
}

double calibrate_free_length(const RodSpec& spec, const MaterialModel& mat, double target_k,
                             const SweepProtocol& protocol, const SolverSettings& settings) {
  if (!(target_k > 0.0)) throw ValidationError("calibrate_free_length: target must be positive");
  if (!spec.bands().empty()) throw ValidationError("calibrate_free_length: spec must be band-free");
  const SolverSettings tight = forward_settings(settings);
  auto excess = [&](double length) {
    return measure_stiffness(spec.with_length(length), mat, protocol, tight).stiffness_index -
           target_k;
  };
  // Linear cantilever estimate k = 3 E I / L^3 seeds the bracket.
  const double ei = stiffness_matrices_at(mat, spec, 0.0).bending_torsion.x();
  const double guess = std::cbrt(3.0 * ei / target_k);
  double lo = 0.5 * guess, hi = 2.0 * guess;
  if (hi < 2.0 * protocol.stroke) throw RangeError("calibrate_free_length: stiffness too high");
  lo = std::max(lo, 2.0 * protocol.stroke);
  std::uintmax_t max_iter = 100;
  const auto root = boost::math::tools::toms748_solve(
      excess, lo, hi, boost::math::tools::eps_tolerance<double>(40), max_iter);
  return 0.5 * (root.first + root.second);
}

namespace {

double regressor(EversionLaw law, double ratio) {
  if (law == EversionLaw::exponential) return ratio;
  if (!(ratio < 1.0)) throw RangeError("eversion model: reduction ratio must be below 1");
  return -std::log1p(-ratio);
}

}  // namespace

EversionPressureModel fit_eversion_pressure(const std::vector<EversionPoint>& points,
                                            EversionLaw law) {
  if (points.size() < 3) throw DataError("eversion fit: at least three points required");
  std::set<double> seen;
  for (const auto& p : points) {
    if (!(p.pressure_kpa > 0.0) || !std::isfinite(p.pressure_kpa)) {
      throw DataError("eversion fit: pressures must be positive");
    }
    if (!std::isfinite(p.reduction_ratio) || p.reduction_ratio < 0.0) {
      throw DataError("eversion fit: reduction ratios must be non-negative");
    }
    if (!seen.insert(p.reduction_ratio).second) {
      throw DataError("eversion fit: reduction ratios must be distinct");
    }
  }

  const double n = static_cast<double>(points.size());
  double mean_x = 0.0, mean_y = 0.0;
  for (const auto& p : points) {
    mean_x += regressor(law, p.reduction_ratio);
    mean_y += std::log(p.pressure_kpa);
  }
  mean_x /= n;
  mean_y /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : points) {
    const double dx = regressor(law, p.reduction_ratio) - mean_x;
    sxx += dx * dx;
    sxy += dx * (std::log(p.pressure_kpa) - mean_y);
  }
  const double slope = sxy / sxx;
  if (!(slope > 0.0)) {
    throw DataError("eversion fit: pressure does not increase with reduction ratio");
  }

  EversionPressureModel model;
  model.law = law;
  model.rate = slope;
  model.p0_kpa = std::exp(mean_y - slope * mean_x);
  model.points = points;
  for (const auto& p : points) {
    model.log_residuals.push_back(std::log(p.pressure_kpa) - std::log(model.p0_kpa) -
                                  slope * regressor(law, p.reduction_ratio));
  }
  return model;
}

EversionPrediction predict_eversion_pressure(const EversionPressureModel& model,
                                             double reduction_ratio) {
  const bool out_of_range = !(reduction_ratio >= 0.0 && reduction_ratio <= kMaxReductionRatio);
  if (out_of_range) {
    logger().warn("eversion prediction at reduction ratio {} outside validated [0, {}]",
                  reduction_ratio, kMaxReductionRatio);
  }
  return {model.p0_kpa * std::exp(model.rate * regressor(model.law, reduction_ratio)),
          out_of_range};
}

std::vector<EversionPoint> reference_eversion_points() {
  return {{0.0, 0.46}, {0.1, 0.62}, {0.2, 1.16}, {0.3, 1.53}, {0.4, 3.39}, {0.5, 9.01}};
}

}  // namespace everrod
