#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "everrod/calibration.hpp"
#include "everrod/cosserat_solver.hpp"
#include "everrod/parallel.hpp"
#include "everrod/rod_domain.hpp"
#include "everrod/virtual_lab.hpp"

namespace everrod {

struct DesignProblem {
  RodSpec base = RodSpec::reference();  // band-free
  int max_bands = 4;
  std::vector<double> placement_grid;  // m from tip
  double min_spacing = kDefaultBandWidth;
  std::vector<double> ratio_candidates;
  double pressure_budget_kpa = 0.0;
  EversionPressureModel eversion;
  double band_width = kDefaultBandWidth;
  SweepProtocol protocol{Eigen::Vector3d::UnitY(), 0.02, 2};
  // Layout counts above this switch the search from exhaustive to greedy.
  std::size_t exhaustive_limit = 10000;

  void validate(const MaterialModel& mat) const;
};

struct EvaluatedLayout {
  std::vector<BandSpec> bands;
  double reduction_ratio = 0.0;
  double stiffness_index = 0.0;
  double eversion_pressure_kpa = 0.0;
};

struct FabricationSheet {
  double sheet_width = 0.0;   // m, circumference of the unconstricted tube
  double sheet_length = 0.0;  // m
  double strip_width = 0.0;   // m
  std::vector<double> strip_lengths;    // m, one per band, tip to base order
  std::vector<double> strip_positions;  // m from tip, same order

  std::string to_text() const;
};

struct DesignResult {
  std::vector<BandSpec> bands;
  double stiffness_index = 0.0;
  double eversion_pressure_kpa = 0.0;
  FabricationSheet sheet;
  bool exhaustive = true;
  std::vector<EvaluatedLayout> evaluated;  // every simulated feasible layout
};

// Number of band layouts the exhaustive search would consider.
double count_layouts(const DesignProblem& problem);

// Eversion pressure gated by the most constricting band.
double layout_eversion_pressure(const EversionPressureModel& model,
                                const std::vector<BandSpec>& bands);

DesignResult design_bands(const DesignProblem& problem, const MaterialModel& mat,
                          const SolverSettings& settings, Execution exec = Execution::parallel);

FabricationSheet fabrication_sheet(const DesignResult& result, const RodSpec& spec);

}  // namespace everrod
