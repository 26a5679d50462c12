#include <benchmark/benchmark.h>

#include "everrod/band_designer.hpp"
#include "everrod/calibration.hpp"
#include "everrod/virtual_lab.hpp"

using namespace everrod;

namespace {

Execution mode(const benchmark::State& state) {
  return state.range(0) ? Execution::parallel : Execution::serial;
}

void label(benchmark::State& state) {
  state.SetLabel(state.range(0) ? "parallel x" + std::to_string(worker_count()) : "serial");
}

void BM_Battery(benchmark::State& state) {
  const MaterialModel mat = MaterialModel::reference();
  for (auto _ : state) {
    auto b = run_table2_battery(mat, SolverSettings{}, {}, RodSpec::reference(), mode(state));
    benchmark::DoNotOptimize(b.results.data());
  }
  label(state);
}
BENCHMARK(BM_Battery)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Design(benchmark::State& state) {
  const MaterialModel mat = MaterialModel::reference();
  DesignProblem p;
  p.placement_grid = {0.03, 0.05, 0.07, 0.09, 0.11, 0.13, 0.15, 0.17, 0.19, 0.21};
  p.ratio_candidates = {0.1, 0.2, 0.3};
  p.pressure_budget_kpa = 3.0;
  p.eversion = fit_eversion_pressure(reference_eversion_points());
  p.max_bands = 3;
  for (auto _ : state) {
    auto r = design_bands(p, mat, SolverSettings{}, mode(state));
    benchmark::DoNotOptimize(r.stiffness_index);
  }
  label(state);
}
BENCHMARK(BM_Design)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_PointLoad(benchmark::State& state) {
  const RodSpec spec = RodSpec::reference({{0.05, 0.5, 0.015}, {0.1, 0.5, 0.015}});
  const MaterialModel mat = MaterialModel::reference();
  SolverSettings settings;
  settings.grid_nodes = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto st = solve_point_load(spec, mat, LoadCase::force(0.6, Eigen::Vector3d::UnitY(), 0.1),
                               settings);
    benchmark::DoNotOptimize(st.P.data());
  }
}
BENCHMARK(BM_PointLoad)->Arg(150)->Arg(600)->Arg(2400)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
