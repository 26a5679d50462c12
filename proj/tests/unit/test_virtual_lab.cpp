#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <string>

#include "everrod/calibration.hpp"
#include "everrod/errors.hpp"
#include "everrod/virtual_lab.hpp"

using namespace everrod;

namespace {

const MaterialModel kMat = MaterialModel::reference();

ForceDisplacementCurve linear_curve(double slope, double stroke, int samples) {
  ForceDisplacementCurve c;
  for (int i = 0; i < samples; ++i) {
    const double x = stroke * i / (samples - 1);
    c.samples.push_back({x, slope * x});
  }
  return c;
}

double k_of(const RodSpec& spec, int samples = 2) {
  return measure_stiffness(spec, kMat, {Eigen::Vector3d::UnitY(), 0.02, samples},
                           SolverSettings{})
      .stiffness_index;
}

}  // namespace

TEST_CASE("stiffness index arithmetic") {
  CHECK(stiffness_index(linear_curve(5.0, 0.02, 5), 0.02) == doctest::Approx(5.0).epsilon(1e-14));
  ForceDisplacementCurve row1;
  row1.samples = {{0.0, 0.0}, {0.02, 0.2388}};
  CHECK(stiffness_index(row1, 0.02) == doctest::Approx(11.94).epsilon(1e-14));
  ForceDisplacementCurve banded;
  banded.samples = {{0.0, 0.0}, {0.02, 0.0762}};
  CHECK(stiffness_index(banded, 0.02) == doctest::Approx(3.81).epsilon(1e-14));
  // Interpolated inside the support.
  ForceDisplacementCurve kinked;
  kinked.samples = {{0.0, 0.0}, {0.01, 0.1}, {0.03, 0.5}};
  CHECK(stiffness_index(kinked, 0.02) == doctest::Approx(15.0).epsilon(1e-14));
  CHECK_THROWS_AS(stiffness_index(row1, 0.03), RangeError);
}

TEST_CASE("two-sample sweep has exactly the endpoints") {
  const auto c = sweep_force_displacement(RodSpec::reference(), kMat, Eigen::Vector3d::UnitY(),
                                          0.02, 2, SolverSettings{});
  REQUIRE(c.samples.size() == 2);
  CHECK(c.samples[0] == CurveSample{0.0, 0.0});
  CHECK(c.samples[1].displacement == 0.02);
  CHECK(c.samples[1].force > 0.0);
  CHECK_NOTHROW(c.validate());
  CHECK_THROWS_AS(sweep_force_displacement(RodSpec::reference(), kMat, Eigen::Vector3d::UnitY(),
                                           0.02, 1, SolverSettings{}),
                  ValidationError);
}

TEST_CASE("secant stiffness does not depend on the sample count") {
  const RodSpec spec = RodSpec::reference({{0.05, 0.5, 0.015}, {0.1, 0.5, 0.015}});
  const double k2 = k_of(spec, 2), k21 = k_of(spec, 21);
  // Each terminal force is good to the displacement tolerance.
  CHECK(k21 == doctest::Approx(k2).epsilon(1e-4));
}

TEST_CASE("calibrated free length reproduces the unbanded stiffness index") {
  const SweepProtocol protocol{Eigen::Vector3d::UnitY(), 0.02, 2};
  const double length =
      calibrate_free_length(RodSpec::reference(), kMat, 11.94, protocol, SolverSettings{});
  CHECK(length > 0.15);
  CHECK(length < 0.25);
  const auto r = measure_stiffness(RodSpec::reference().with_length(length), kMat, protocol,
                                   SolverSettings{});
  CHECK(r.stiffness_index == doctest::Approx(11.94).epsilon(1e-3));
  CHECK(r.curve.samples.back().force == doctest::Approx(0.2388).epsilon(1e-3));
}

TEST_CASE("property: adding a band never stiffens") {
  std::mt19937 rng(21);
  std::uniform_int_distribution<int> slot(0, 14);
  std::uniform_int_distribution<int> ratio(1, 5);
  for (int trial = 0; trial < 8; ++trial) {
    std::set<int> used;
    std::vector<BandSpec> bands;
    const int count = trial % 3;
    while (static_cast<int>(bands.size()) < count) {
      const int k = slot(rng);
      if (!used.insert(k).second) continue;
      bands.push_back({0.03 + 0.035 * k, 0.1 * ratio(rng), kDefaultBandWidth});
    }
    const RodSpec before = RodSpec::reference(bands);
    int k = slot(rng);
    while (used.count(k)) k = slot(rng);
    bands.push_back({0.03 + 0.035 * k, 0.1 * ratio(rng), kDefaultBandWidth});
    const RodSpec after = RodSpec::reference(bands);
    CHECK(k_of(after) <= k_of(before));
  }
}

TEST_CASE("moving a band away from the tip softens") {
  double prev = k_of(RodSpec::reference({{0.03, 0.5, 0.015}}));
  for (int mm = 40; mm <= 100; mm += 10) {
    const double k = k_of(RodSpec::reference({{mm * 1e-3, 0.5, 0.015}}));
    CHECK(k < prev);
    prev = k;
  }
}

TEST_CASE("characterization battery") {
  const auto variants = table2_variants(RodSpec::reference());
  CHECK(variants.size() == 19);
  std::set<std::string> ids;
  for (const auto& v : variants) {
    ids.insert(v.id);
    CHECK(v.spec.length() == 0.6);
    CHECK(v.spec.base_radius() == 0.02);
  }
  CHECK(ids.size() == 19);
  CHECK(layout_id({{0.1, 0.5, 0.015}, {0.05, 0.5, 0.015}}) == "r50@50+100");
  CHECK_THROWS_AS(table2_variants(RodSpec::reference({{0.05, 0.5, 0.015}})), ValidationError);

  const auto serial = run_table2_battery(kMat, SolverSettings{}, {}, RodSpec::reference(),
                                         Execution::serial);
  const auto parallel = run_table2_battery(kMat, SolverSettings{}, {}, RodSpec::reference(),
                                           Execution::parallel);
  REQUIRE(serial.results.size() == 19);
  for (std::size_t i = 0; i < serial.results.size(); ++i) {
    CHECK(serial.results[i].stiffness_index == parallel.results[i].stiffness_index);
    CHECK(serial.results[i].curve.samples == parallel.results[i].curve.samples);
  }
  for (const auto& t : check_table2_trends(serial)) {
    INFO(t.name);
    CHECK(t.holds);
  }
}

TEST_CASE("zero stroke battery is empty") {
  const auto b = run_battery("empty", {{"x", "g", RodSpec::reference()}}, kMat,
                             {Eigen::Vector3d::UnitY(), 0.0, 5}, SolverSettings{});
  REQUIRE(b.results.size() == 1);
  CHECK(b.results[0].stiffness_index == 0.0);
}

TEST_CASE("solver failures carry the failing displacement") {
  SolverSettings weak;
  weak.max_force = 1e-3;
  try {
    sweep_force_displacement(RodSpec::reference({}, "weak"), kMat, Eigen::Vector3d::UnitY(), 0.02,
                             3, weak);
    FAIL("expected a solver error");
  } catch (const SolverError& e) {
    CHECK(std::string(e.what()).find("displacement 0.01") != std::string::npos);
  }
}
