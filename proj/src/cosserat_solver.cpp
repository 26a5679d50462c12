#include "everrod/cosserat_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "everrod/errors.hpp"
#include "everrod/so3.hpp"

namespace everrod {

namespace {

const Eigen::Vector3d kUnitStrain = Eigen::Vector3d::UnitZ();

bool finite(const Eigen::Vector3d& v) { return v.allFinite(); }

}  // namespace

const Eigen::Vector3d& RodState::position_at(double station) const {
  auto it = std::lower_bound(s.begin(), s.end(), station);
  std::size_t i = static_cast<std::size_t>(it - s.begin());
  if (i == s.size()) return P.back();
  if (i > 0 && station - s[i - 1] < s[i] - station) --i;
  return P[i];
}

double RodState::max_orthonormality_error() const {
  double worst = 0.0;
  for (const auto& r : R) worst = std::max(worst, orthonormality_error(r));
  return worst;
}

double RodState::min_rotation_determinant() const {
  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& r : R) lowest = std::min(lowest, r.determinant());
  return lowest;
}

LoadCase LoadCase::force(double station, const Eigen::Vector3d& direction, double newtons) {
  return {station, direction, Mode::force, newtons};
}

LoadCase LoadCase::displacement(double station, const Eigen::Vector3d& direction,
                                double meters) {
  return {station, direction, Mode::displacement, meters};
}

void LoadCase::validate(double rod_length) const {
  if (!(station > 0.0 && station <= rod_length)) {
    throw ValidationError("load: station must lie in (0, L]");
  }
  if (!direction.allFinite() || std::abs(direction.norm() - 1.0) > 1e-12) {
    throw ValidationError("load: direction must be a unit vector");
  }
  if (!(magnitude >= 0.0) || !std::isfinite(magnitude)) {
    throw ValidationError("load: magnitude must be finite and non-negative");
  }
}

void SolverSettings::validate() const {
  if (grid_nodes < 50) throw ValidationError("settings: grid_nodes must be at least 50");
  if (!(moment_tol > 0.0) || !(displacement_tol > 0.0)) {
    throw ValidationError("settings: tolerances must be positive");
  }
  if (max_iterations < 1 || max_force_evaluations < 2) {
    throw ValidationError("settings: iteration limits must be positive");
  }
  if (!(max_force > 0.0)) throw ValidationError("settings: max_force must be positive");
}

RodModel::RodModel(const RodSpec& spec, const MaterialModel& mat, double load_station,
                   const SolverSettings& settings)
    : spec_(spec), load_station_(load_station) {
  settings.validate();
  const double length = spec.length();
  if (!(load_station > 0.0 && load_station <= length)) {
    throw ValidationError("load: station must lie in (0, L]");
  }

  // Piecewise-uniform grid with a node exactly on the load station.
  const int n = settings.grid_nodes;
  if (load_station >= length) {
    load_node_ = static_cast<std::size_t>(n);
    stations_.resize(n + 1);
    for (int i = 0; i <= n; ++i) stations_[i] = length * i / n;
    stations_.back() = length;
  } else {
    const int before =
        std::clamp(static_cast<int>(std::lround(n * load_station / length)), 1, n - 1);
    const int after = n - before;
    load_node_ = static_cast<std::size_t>(before);
    stations_.resize(n + 1);
    for (int i = 0; i <= before; ++i) stations_[i] = load_station * i / before;
    for (int i = 1; i <= after; ++i) {
      stations_[before + i] = load_station + (length - load_station) * i / after;
    }
    stations_[before] = load_station;
    stations_.back() = length;
  }

  base_bending_stiffness_ = stiffness_matrices_at(mat, spec, 0.0).bending_torsion.x();

  const std::vector<double> edges = spec.band_edges();
  const double eps = 1e-12 * length;
  auto push_step = [&](double a, double b, bool ends_on_node) {
    const double mid = 0.5 * (a + b);
    const StiffnessMatrices k = stiffness_matrices_at(mat, spec, mid);
    steps_.push_back({b - a, k.shear_extension.cwiseInverse(), k.bending_torsion.cwiseInverse(),
                      mid < load_station, ends_on_node});
  };
  for (std::size_t i = 0; i + 1 < stations_.size(); ++i) {
    double a = stations_[i];
    const double b = stations_[i + 1];
    for (double e : edges) {
      if (e > a + eps && e < b - eps) {
        push_step(a, e, false);
        a = e;
      }
    }
    push_step(a, b, true);
  }
}

Eigen::Vector3d RodModel::integrate(const Eigen::Vector3d& force, const Eigen::Vector3d& m0,
                                    std::size_t last_node, RodState* out) const {
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
  Eigen::Vector3d m = m0;

  if (out) {
    const std::size_t count = last_node + 1;
    out->s.assign(stations_.begin(), stations_.begin() + static_cast<std::ptrdiff_t>(count));
    out->P.resize(count);
    out->R.resize(count);
    out->n.resize(count);
    out->m.resize(count);
    out->P[0] = p;
    out->R[0] = r;
    out->n[0] = load_node_ == 0 ? Eigen::Vector3d::Zero() : force;
    out->m[0] = m;
  }

  std::size_t node = 0;
  for (const Step& step : steps_) {
    if (node >= last_node) break;
    const Eigen::Vector3d n = step.loaded ? force : Eigen::Vector3d::Zero();
    const double h = step.h;

    // Right-hand side of the static Cosserat equations for constant n.
    auto rhs = [&](const Eigen::Matrix3d& rot, const Eigen::Vector3d& mom, Eigen::Vector3d& dp,
                   Eigen::Matrix3d& dr, Eigen::Vector3d& dm) {
      const Eigen::Vector3d u = step.compliance_bt.cwiseProduct(rot.transpose() * mom);
      const Eigen::Vector3d v =
          step.compliance_se.cwiseProduct(rot.transpose() * n) + kUnitStrain;
      dp = rot * v;
      dr = rot * hat(u);
      dm = -dp.cross(n);
    };

    Eigen::Vector3d dp1, dp2, dp3, dp4, dm1, dm2, dm3, dm4;
    Eigen::Matrix3d dr1, dr2, dr3, dr4;
    rhs(r, m, dp1, dr1, dm1);
    rhs(r + 0.5 * h * dr1, m + 0.5 * h * dm1, dp2, dr2, dm2);
    rhs(r + 0.5 * h * dr2, m + 0.5 * h * dm2, dp3, dr3, dm3);
    rhs(r + h * dr3, m + h * dm3, dp4, dr4, dm4);
    p += (h / 6.0) * (dp1 + 2.0 * dp2 + 2.0 * dp3 + dp4);
    m += (h / 6.0) * (dm1 + 2.0 * dm2 + 2.0 * dm3 + dm4);
    r = project_to_so3(r + (h / 6.0) * (dr1 + 2.0 * dr2 + 2.0 * dr3 + dr4));

    if (!step.ends_on_node) continue;
    ++node;
    if (!finite(p) || !finite(m) || !r.allFinite()) {
      throw IntegrationDivergedError(
          "integration diverged at s = " + std::to_string(stations_[node]) + " m",
          stations_[node]);
    }
    if (out) {
      out->P[node] = p;
      out->R[node] = r;
      out->n[node] = node < load_node_ ? force : Eigen::Vector3d::Zero();
      out->m[node] = m;
    }
  }
  return m;
}

RodState integrate_ivp(const RodSpec& spec, const MaterialModel& mat, const LoadCase& load,
                       const Eigen::Vector3d& m0, const SolverSettings& settings) {
  load.validate(spec.length());
  if (load.mode != LoadCase::Mode::force) {
    throw ValidationError("integrate_ivp: load must be force-controlled");
  }
  const RodModel model(spec, mat, load.station, settings);
  RodState state;
  model.integrate(load.magnitude * load.direction, m0, model.stations().size() - 1, &state);
  return state;
}

PointLoadSolution shoot_point_load(const RodModel& model, const Eigen::Vector3d& force,
                                   const SolverSettings& settings, const ShootingGuess& guess) {
  const std::size_t last = model.load_node();
  const double station = model.load_station();
  PointLoadSolution sol;

  auto residual = [&](const Eigen::Vector3d& m0) {
    ++sol.integrations;
    return model.integrate(force, m0, last, nullptr);
  };

  // Straight-rod moment of the load about the base.
  Eigen::Vector3d m0 = guess.base_moment.value_or(
      Eigen::Vector3d(0.0, 0.0, station).cross(force));
  Eigen::Vector3d r = residual(m0);
  double norm = r.norm();
  sol.iterations = 1;

  const double scale = std::max({m0.norm(), force.norm() * station, 1e-12});
  auto fd_jacobian = [&](const Eigen::Vector3d& at, const Eigen::Vector3d& r_at) {
    Eigen::Matrix3d jac;
    const double h = 1e-7 * std::max(at.norm(), scale);
    for (int j = 0; j < 3; ++j) {
      Eigen::Vector3d probe = at;
      probe[j] += h;
      jac.col(j) = (residual(probe) - r_at) / h;
    }
    return jac;
  };

  Eigen::Matrix3d jac = guess.jacobian.value_or(Eigen::Matrix3d::Identity());
  bool jac_fresh = false;
  if (!guess.jacobian && norm > settings.moment_tol) {
    jac = fd_jacobian(m0, r);
    jac_fresh = true;
  }

  while (norm > settings.moment_tol) {
    if (sol.iterations >= settings.max_iterations) {
      throw NoEquilibriumError("shooting did not converge; best residual " +
                                   std::to_string(norm) + " N m",
                               norm);
    }
    ++sol.iterations;

    Eigen::Vector3d step = -jac.fullPivLu().solve(r);
    bool accepted = false;
    Eigen::Vector3d m_new, r_new;
    double norm_new = norm;
    if (step.allFinite()) {
      double lambda = 1.0;
      for (int k = 0; k < 12; ++k, lambda *= 0.5) {
        m_new = m0 + lambda * step;
        r_new = residual(m_new);
        norm_new = r_new.norm();
        if (std::isfinite(norm_new) && norm_new < (1.0 - 1e-4 * lambda) * norm) {
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) {
      if (jac_fresh) {
        throw NoEquilibriumError("shooting stalled; best residual " + std::to_string(norm) +
                                     " N m",
                                 norm);
      }
      jac = fd_jacobian(m0, r);
      jac_fresh = true;
      continue;
    }

    // Broyden rank-one update keeps the Jacobian current between refreshes.
    const Eigen::Vector3d dm = m_new - m0;
    const Eigen::Vector3d dr = r_new - r;
    const double dm2 = dm.squaredNorm();
    if (dm2 > 0.0) jac += ((dr - jac * dm) * dm.transpose()) / dm2;
    jac_fresh = false;
    const bool slow = norm_new > 0.5 * norm;
    m0 = m_new;
    r = r_new;
    norm = norm_new;
    if (slow && norm > settings.moment_tol) {
      jac = fd_jacobian(m0, r);
      jac_fresh = true;
    }
  }

  sol.base_moment = m0;
  sol.jacobian = jac;
  sol.residual = norm;
  model.integrate(force, m0, model.stations().size() - 1, &sol.state);
  return sol;
}

RodState solve_point_load(const RodSpec& spec, const MaterialModel& mat, const LoadCase& load,
                          const SolverSettings& settings) {
  load.validate(spec.length());
  if (load.mode != LoadCase::Mode::force) {
    throw ValidationError("solve_point_load: load must be force-controlled");
  }
  const RodModel model(spec, mat, load.station, settings);
  return shoot_point_load(model, load.magnitude * load.direction, settings).state;
}

double projected_displacement(const RodState& state, const LoadCase& load) {
  const Eigen::Vector3d straight(0.0, 0.0, load.station);
  return (state.position_at(load.station) - straight).dot(load.direction);
}

DisplacementSolution solve_imposed_displacement(const RodModel& model, const LoadCase& load,
                                                const SolverSettings& settings,
                                                const DisplacementGuess& guess) {
  load.validate(model.spec().length());
  if (load.mode != LoadCase::Mode::displacement) {
    throw ValidationError("solve_imposed_displacement: load must be displacement-controlled");
  }
  if (std::abs(load.station - model.load_station()) > 0.0) {
    throw ValidationError("solve_imposed_displacement: model built for another station");
  }
  const double target = load.magnitude;
  DisplacementSolution out;

  PointLoadSolution last;
  ShootingGuess shooting = guess.shooting;
  double last_force = 0.0;
  auto evaluate = [&](double force) {
    ++out.force_evaluations;
    ShootingGuess g = shooting;
    if (g.base_moment && last_force > 0.0 && force > 0.0) *g.base_moment *= force / last_force;
    if (!g.base_moment || last_force == 0.0) g.base_moment.reset();
    last = shoot_point_load(model, force * load.direction, settings, g);
    shooting.base_moment = last.base_moment;
    shooting.jacobian = last.jacobian;
    last_force = force;
    return projected_displacement(last.state, load) - target;
  };
  auto finish = [&](double force) {
    out.state = std::move(last.state);
    out.force = force;
    out.base_moment = last.base_moment;
    out.jacobian = last.jacobian;
    return out;
  };

  if (target == 0.0) {
    evaluate(0.0);
    return finish(0.0);
  }
  if (guess.shooting.base_moment && guess.force && *guess.force > 0.0) {
    last_force = *guess.force;
  }

  // g(F) = displacement(F) - target; g(0) = -target < 0.
  double lo = 0.0, g_lo = -target;
  double hi = std::numeric_limits<double>::quiet_NaN(), g_hi = 0.0;
  const double station = model.load_station();
  double f_prev = 0.0, g_prev = -target;
  double f = guess.force.value_or(target * 3.0 * model.base_bending_stiffness() /
                                  (station * station * station));
  f = std::min(f, settings.max_force);

  while (true) {
    if (out.force_evaluations >= settings.max_force_evaluations) {
      throw DisplacementUnreachableError("displacement solve did not converge within " +
                                         std::to_string(out.force_evaluations) +
                                         " force evaluations");
    }
    const double g = evaluate(f);
    if (std::abs(g) <= settings.displacement_tol) return finish(f);
    if (g < 0.0) {
      lo = f;
      g_lo = g;
    } else {
      hi = f;
      g_hi = g;
    }

    double next = (g != g_prev) ? f - g * (f - f_prev) / (g - g_prev) : 2.0 * f;
    f_prev = f;
    g_prev = g;
    if (std::isnan(hi)) {
      if (f >= settings.max_force) {
        throw DisplacementUnreachableError("displacement " + std::to_string(target) +
                                           " m unreachable below max force " +
                                           std::to_string(settings.max_force) + " N");
      }
      if (!(next > 1.1 * f)) next = 1.1 * f;
      next = std::min({next, 4.0 * std::max(f, 1e-12), settings.max_force});
    } else if (!(next > lo && next < hi)) {
      next = lo - g_lo * (hi - lo) / (g_hi - g_lo);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    }
    f = next;
  }
}

DisplacementSolution solve_imposed_displacement(const RodSpec& spec, const MaterialModel& mat,
                                                const LoadCase& load,
                                                const SolverSettings& settings) {
  load.validate(spec.length());
  const RodModel model(spec, mat, load.station, settings);
  return solve_imposed_displacement(model, load, settings);
}

}  // namespace everrod
