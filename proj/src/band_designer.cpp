#include "everrod/band_designer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include <spdlog/spdlog.h>

#include "everrod/errors.hpp"
#include "everrod/logging.hpp"

namespace everrod {

namespace {

constexpr double kSpacingSlack = 1e-12;

std::vector<double> sorted_grid(const DesignProblem& problem) {
  std::vector<double> grid = problem.placement_grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

std::vector<BandSpec> make_bands(const std::vector<double>& placements, double ratio,
                                 double width) {
  std::vector<BandSpec> bands;
  bands.reserve(placements.size());
  for (double d : placements) bands.push_back({d, ratio, width});
  return bands;
}

std::vector<double> placements_of(const std::vector<BandSpec>& bands) {
  std::vector<double> out;
  for (const auto& b : bands) out.push_back(b.distance_from_tip);
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

// Lower k wins; ties go to fewer bands, then smaller ratio, then placements
// nearer the base.
bool preferred(const EvaluatedLayout& a, const EvaluatedLayout& b) {
  if (a.stiffness_index != b.stiffness_index) return a.stiffness_index < b.stiffness_index;
  if (a.bands.size() != b.bands.size()) return a.bands.size() < b.bands.size();
  if (a.reduction_ratio != b.reduction_ratio) return a.reduction_ratio < b.reduction_ratio;
  const auto pa = placements_of(a.bands);
  const auto pb = placements_of(b.bands);
  return std::lexicographical_compare(pb.begin(), pb.end(), pa.begin(), pa.end());
}

void evaluate_all(std::vector<EvaluatedLayout>& layouts, const DesignProblem& problem,
                  const MaterialModel& mat, const SolverSettings& settings, Execution exec) {
  for_each_index(layouts.size(), exec, [&](std::size_t i) {
    EvaluatedLayout& l = layouts[i];
    const RodSpec spec = problem.base.with_bands(l.bands, layout_id(l.bands));
    l.stiffness_index = measure_stiffness(spec, mat, problem.protocol, settings).stiffness_index;
  });
}

EvaluatedLayout candidate(const DesignProblem& problem, const std::vector<double>& placements,
                          double ratio) {
  EvaluatedLayout l;
  l.bands = make_bands(placements, ratio, problem.band_width);
  l.reduction_ratio = placements.empty() ? 0.0 : ratio;
  l.eversion_pressure_kpa = layout_eversion_pressure(problem.eversion, l.bands);
  return l;
}

bool spacing_ok(const std::vector<double>& chosen, double next, double min_spacing) {
  for (double c : chosen) {
    if (std::abs(c - next) < min_spacing - kSpacingSlack) return false;
  }
  return true;
}

}  // namespace

void DesignProblem::validate(const MaterialModel& mat) const {
  if (!base.bands().empty()) throw ValidationError("design: base spec must be band-free");
  if (max_bands < 0) throw ValidationError("design: max_bands must be non-negative");
  if (!(band_width > 0.0)) throw ValidationError("design: band width must be positive");
  if (min_spacing < band_width) {
    throw ValidationError("design: min spacing must be at least the band width");
  }
  for (double d : placement_grid) {
    if (!(d >= 0.0 && d <= base.length())) {
      throw ValidationError("design: placement grid point outside [0, L]");
    }
    base.with_bands({{d, 0.0, band_width}});  // throws when the band does not fit
  }
  for (double r : ratio_candidates) {
    if (!(r > 0.0 && r <= mat.max_calibrated_ratio())) {
      throw ValidationError("design: reduction ratio candidate outside calibrated alpha range");
    }
  }
  if (!(pressure_budget_kpa > 0.0)) {
    throw ValidationError("design: pressure budget must be positive");
  }
  if (!(eversion.p0_kpa > 0.0) || !(eversion.rate > 0.0)) {
    throw ValidationError("design: eversion model must have positive p0 and rate");
  }
  if (!(protocol.stroke > 0.0) || protocol.samples < 2) {
    throw ValidationError("design: protocol needs a positive stroke and two samples");
  }
}

double count_layouts(const DesignProblem& problem) {
  const std::vector<double> grid = sorted_grid(problem);
  const std::size_t g = grid.size();
  const int kmax = std::min<int>(problem.max_bands, static_cast<int>(g));
  // ways[k][i]: spacing-valid subsets of size k whose largest element is grid[i].
  std::vector<std::vector<double>> ways(kmax + 1, std::vector<double>(g, 0.0));
  double subsets = 0.0;
  for (std::size_t i = 0; i < g && kmax >= 1; ++i) ways[1][i] = 1.0;
  for (int k = 2; k <= kmax; ++k) {
    for (std::size_t i = 0; i < g; ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if (grid[i] - grid[j] >= problem.min_spacing - kSpacingSlack) ways[k][i] += ways[k - 1][j];
      }
    }
  }
  for (int k = 1; k <= kmax; ++k) {
    for (double w : ways[k]) subsets += w;
  }
  return 1.0 + subsets * static_cast<double>(problem.ratio_candidates.size());
}

double layout_eversion_pressure(const EversionPressureModel& model,
                                const std::vector<BandSpec>& bands) {
  double worst = 0.0;
  for (const auto& b : bands) worst = std::max(worst, b.reduction_ratio);
  return predict_eversion_pressure(model, worst).pressure_kpa;
}

DesignResult design_bands(const DesignProblem& problem, const MaterialModel& mat,
                          const SolverSettings& settings, Execution exec) {
  problem.validate(mat);
  const std::vector<double> grid = sorted_grid(problem);
  const double budget = problem.pressure_budget_kpa;

  std::vector<double> ratios = problem.ratio_candidates;
  std::sort(ratios.begin(), ratios.end());
  ratios.erase(std::unique(ratios.begin(), ratios.end()), ratios.end());

  const EvaluatedLayout empty = candidate(problem, {}, 0.0);
  if (empty.eversion_pressure_kpa > budget) {
    std::ostringstream msg;
    msg << "no feasible layout: the band-free robot already needs "
        << empty.eversion_pressure_kpa << " kPa, above the " << budget << " kPa budget";
    throw InfeasibleDesignError(msg.str());
  }
  std::vector<double> feasible_ratios;
  for (double r : ratios) {
    if (candidate(problem, {grid.empty() ? 0.0 : grid.front()}, r).eversion_pressure_kpa <=
        budget) {
      feasible_ratios.push_back(r);
    }
  }

  DesignResult result;
  const double total = count_layouts(problem);
  result.exhaustive = total <= static_cast<double>(problem.exhaustive_limit);

  if (result.exhaustive) {
    std::vector<EvaluatedLayout> layouts{empty};
    std::vector<double> chosen;
    std::function<void(std::size_t)> extend = [&](std::size_t start) {
      for (std::size_t i = start; i < grid.size(); ++i) {
        if (!spacing_ok(chosen, grid[i], problem.min_spacing)) continue;
        chosen.push_back(grid[i]);
        for (double r : feasible_ratios) layouts.push_back(candidate(problem, chosen, r));
        if (static_cast<int>(chosen.size()) < problem.max_bands) extend(i + 1);
        chosen.pop_back();
      }
    };
    if (problem.max_bands > 0) extend(0);
    evaluate_all(layouts, problem, mat, settings, exec);
    result.evaluated = std::move(layouts);
  } else {
    std::vector<EvaluatedLayout> all{empty};
    evaluate_all(all, problem, mat, settings, exec);
    for (double r : feasible_ratios) {
      std::vector<double> chosen;
      double current_k = all.front().stiffness_index;
      for (int step = 0; step < problem.max_bands; ++step) {
        std::vector<EvaluatedLayout> trial;
        for (double d : grid) {
          if (std::find(chosen.begin(), chosen.end(), d) != chosen.end()) continue;
          if (!spacing_ok(chosen, d, problem.min_spacing)) continue;
          std::vector<double> next = chosen;
          next.push_back(d);
          trial.push_back(candidate(problem, next, r));
        }
        if (trial.empty()) break;
        evaluate_all(trial, problem, mat, settings, exec);
        const auto best = std::min_element(trial.begin(), trial.end(), preferred);
        const bool improves = best->stiffness_index < current_k;
        if (improves) {
          chosen = placements_of(best->bands);
          current_k = best->stiffness_index;
        }
        all.insert(all.end(), trial.begin(), trial.end());
        if (!improves) break;
      }
    }
    result.evaluated = std::move(all);
  }

  const auto best = std::min_element(result.evaluated.begin(), result.evaluated.end(), preferred);
  result.bands = best->bands;
  result.stiffness_index = best->stiffness_index;
  result.eversion_pressure_kpa = best->eversion_pressure_kpa;
  result.sheet = fabrication_sheet(result, problem.base);
  logger().info("design: {} layouts evaluated ({}), best k = {} N/m with {} bands",
                result.evaluated.size(), result.exhaustive ? "exhaustive" : "greedy",
                result.stiffness_index, result.bands.size());
  return result;
}

FabricationSheet fabrication_sheet(const DesignResult& result, const RodSpec& spec) {
  FabricationSheet sheet;
  const double circumference = std::numbers::pi * 2.0 * spec.base_radius();
  sheet.sheet_width = circumference;
  sheet.sheet_length = spec.length();
  sheet.strip_width = result.bands.empty() ? kDefaultBandWidth : result.bands.front().width;
  std::vector<BandSpec> bands = result.bands;
  std::sort(bands.begin(), bands.end(), [](const BandSpec& a, const BandSpec& b) {
    return a.distance_from_tip < b.distance_from_tip;
  });
  for (const auto& b : bands) {
    sheet.strip_lengths.push_back(circumference * (1.0 - b.reduction_ratio));
    sheet.strip_positions.push_back(b.distance_from_tip);
  }
  return sheet;
}

std::string FabricationSheet::to_text() const {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(1);
  out << "Substrate sheet: " << sheet_width * 1e3 << " mm x " << sheet_length * 1e3 << " mm\n";
  out << "Band strips (" << strip_lengths.size() << "), width " << strip_width * 1e3 << " mm:\n";
  for (std::size_t i = 0; i < strip_lengths.size(); ++i) {
    out << "  strip " << i + 1 << ": " << strip_lengths[i] * 1e3 << " mm long, centered "
        << strip_positions[i] * 1e3 << " mm from tip\n";
  }
  return out.str();
}

}  // namespace everrod
