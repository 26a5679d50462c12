#include "everrod/csv.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <system_error>

#include "everrod/errors.hpp"

namespace everrod {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text, const std::string& context) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end || text.empty()) {
    throw ValidationError(context + ": cannot parse number '" + text + "'");
  }
  return value;
}

namespace {

bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

// Reads a two-column numeric table with a mandatory header.
std::vector<std::pair<double, double>> read_pairs(std::istream& in, const std::string& source,
                                                  const std::string& header) {
  std::string line;
  if (!next_line(in, line) || line != header) {
    throw ValidationError(source + ": line 1: expected header '" + header + "'");
  }
  std::vector<std::pair<double, double>> rows;
  int line_no = 1;
  while (next_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    const std::string where = source + ": line " + std::to_string(line_no);
    if (fields.size() != 2) throw ValidationError(where + ": expected 2 fields");
    rows.emplace_back(parse_double(fields[0], where), parse_double(fields[1], where));
  }
  return rows;
}

}  // namespace

std::string peek_header(std::istream& in) {
  const auto pos = in.tellg();
  std::string line;
  next_line(in, line);
  in.clear();
  in.seekg(pos);
  return line;
}

void write_curve_csv(std::ostream& out, const std::vector<CurveSample>& samples) {
  out << kCurveHeader << '\n';
  for (const auto& s : samples) {
    out << format_double(s.displacement) << ',' << format_double(s.force) << '\n';
  }
}

std::vector<CurveSample> read_curve_csv(std::istream& in, const std::string& source) {
  std::vector<CurveSample> samples;
  for (const auto& [x, f] : read_pairs(in, source, kCurveHeader)) samples.push_back({x, f});
  return samples;
}

void write_eversion_csv(std::ostream& out, const std::vector<EversionPoint>& points) {
  out << kEversionHeader << '\n';
  for (const auto& p : points) {
    out << format_double(p.reduction_ratio) << ',' << format_double(p.pressure_kpa) << '\n';
  }
}

std::vector<EversionPoint> read_eversion_csv(std::istream& in, const std::string& source) {
  std::vector<EversionPoint> points;
  for (const auto& [r, p] : read_pairs(in, source, kEversionHeader)) points.push_back({r, p});
  return points;
}

void write_state_csv(std::ostream& out, const RodState& state) {
  out << "s,Px,Py,Pz,R00,R01,R02,R10,R11,R12,R20,R21,R22,nx,ny,nz,mx,my,mz\n";
  for (std::size_t i = 0; i < state.size(); ++i) {
    out << format_double(state.s[i]);
    for (int k = 0; k < 3; ++k) out << ',' << format_double(state.P[i][k]);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) out << ',' << format_double(state.R[i](r, c));
    }
    for (int k = 0; k < 3; ++k) out << ',' << format_double(state.n[i][k]);
    for (int k = 0; k < 3; ++k) out << ',' << format_double(state.m[i][k]);
    out << '\n';
  }
}

void write_battery_csv(std::ostream& out, const ExperimentBattery& battery) {
  out << "variant_id,group,band_count,placements_mm,reduction_ratio,stiffness_index_n_per_m,"
         "terminal_force_n\n";
  for (const auto& r : battery.results) {
    out << r.id << ',' << r.group << ',' << r.band_count << ',';
    for (std::size_t i = 0; i < r.placements.size(); ++i) {
      if (i) out << ';';
      out << format_double(r.placements[i] * 1e3);
    }
    out << ',' << format_double(r.reduction_ratio) << ',' << format_double(r.stiffness_index)
        << ',' << format_double(r.terminal_force) << '\n';
  }
}

}  // namespace everrod
