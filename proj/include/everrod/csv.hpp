#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "everrod/calibration.hpp"
#include "everrod/cosserat_solver.hpp"
#include "everrod/virtual_lab.hpp"

namespace everrod {

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);
double parse_double(const std::string& text, const std::string& context);

inline constexpr const char* kCurveHeader = "displacement_m,force_n";
inline constexpr const char* kEversionHeader = "reduction_ratio,pressure_kpa";

void write_curve_csv(std::ostream& out, const std::vector<CurveSample>& samples);
std::vector<CurveSample> read_curve_csv(std::istream& in, const std::string& source);

void write_eversion_csv(std::ostream& out, const std::vector<EversionPoint>& points);
std::vector<EversionPoint> read_eversion_csv(std::istream& in, const std::string& source);

// Columns s, Px..Pz, R00..R22 (row-major), nx..nz, mx..mz.
void write_state_csv(std::ostream& out, const RodState& state);

void write_battery_csv(std::ostream& out, const ExperimentBattery& battery);

// First line of a CSV stream, without the line terminator.
std::string peek_header(std::istream& in);

}  // namespace everrod
