#include "everrod/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "everrod/csv.hpp"
#include "everrod/errors.hpp"

namespace everrod {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

// Field access with path-qualified validation errors.
class Reader {
 public:
  Reader(const json& node, std::string path, const std::string& source)
      : node_(node), path_(std::move(path)), source_(source) {
    if (!node_.is_object()) fail("expected an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& item : node_.items()) {
      if (!allowed.count(item.key())) {
        throw ValidationError(source_ + ": unknown field '" + qualify(item.key()) + "'");
      }
    }
  }

  bool has(const char* key) const { return node_.contains(key); }

  double number(const char* key) const {
    const json& v = at(key);
    if (!v.is_number()) fail_field(key, "expected a number");
    return v.get<double>();
  }
  double number(const char* key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }
  int integer(const char* key, int fallback) const {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_number_integer()) fail_field(key, "expected an integer");
    return v.get<int>();
  }
  bool boolean(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_boolean()) fail_field(key, "expected true or false");
    return v.get<bool>();
  }
  std::string string(const char* key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_string()) fail_field(key, "expected a string");
    return v.get<std::string>();
  }
  const json& array(const char* key) const {
    const json& v = at(key);
    if (!v.is_array()) fail_field(key, "expected an array");
    return v;
  }
  std::vector<double> numbers(const char* key) const {
    std::vector<double> out;
    for (const auto& e : array(key)) {
      if (!e.is_number()) fail_field(key, "expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }
  Reader child(const char* key) const { return Reader(at(key), qualify(key), source_); }
  Reader element(const char* key, std::size_t i) const {
    return Reader(array(key)[i], qualify(key) + "[" + std::to_string(i) + "]", source_);
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ValidationError(source_ + ": field '" + path_ + "': " + what);
  }
  [[noreturn]] void fail_field(const char* key, const std::string& what) const {
    throw ValidationError(source_ + ": field '" + qualify(key) + "': " + what);
  }

 private:
  const json& at(const char* key) const {
    if (!node_.contains(key)) fail_field(key, "missing");
    return node_.at(key);
  }
  std::string qualify(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const json& node_;
  std::string path_;
  const std::string& source_;
};

json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(source + ": " + e.what());
  }
}

// Wraps invariant violations raised while building domain objects.
template <class Fn>
auto with_context(const Reader& r, Fn&& fn) {
  try {
    return fn();
  } catch (const ValidationError& e) {
    r.fail(e.what());
  }
}

std::vector<BandSpec> read_bands(const Reader& r, const char* key) {
  std::vector<BandSpec> bands;
  if (!r.has(key)) return bands;
  const auto& arr = r.array(key);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const Reader b = r.element(key, i);
    b.allow({"distance_from_tip_m", "reduction_ratio", "width_m"});
    bands.push_back({b.number("distance_from_tip_m"), b.number("reduction_ratio"),
                     b.number("width_m", kDefaultBandWidth)});
  }
  return bands;
}

RodSpec read_rod(const Reader& r) {
  r.allow({"id", "length_m", "base_radius_m", "wall_thickness_m", "internal_pressure_kpa",
           "bands"});
  const RodSpec ref = RodSpec::reference();
  return with_context(r, [&] {
    return RodSpec(r.number("length_m", ref.length()), r.number("base_radius_m", ref.base_radius()),
                   r.number("wall_thickness_m", ref.wall_thickness()), read_bands(r, "bands"),
                   r.number("internal_pressure_kpa", ref.internal_pressure() * 1e-3) * 1e3,
                   r.string("id", ""));
  });
}

MaterialModel read_material(const Reader& r) {
  r.allow({"effective_modulus_table", "poisson_ratio", "alpha_table"});
  const MaterialModel ref = MaterialModel::reference();
  std::vector<MaterialModel::ModulusPoint> moduli = ref.modulus_table();
  if (r.has("effective_modulus_table")) {
    moduli.clear();
    const auto& arr = r.array("effective_modulus_table");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const Reader e = r.element("effective_modulus_table", i);
      e.allow({"pressure_kpa", "modulus_pa"});
      moduli.push_back({e.number("pressure_kpa") * 1e3, e.number("modulus_pa")});
    }
  }
  std::map<double, double> alpha = ref.alpha_table();
  if (r.has("alpha_table")) {
    alpha.clear();
    const auto& arr = r.array("alpha_table");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const Reader e = r.element("alpha_table", i);
      e.allow({"reduction_ratio", "alpha"});
      alpha[e.number("reduction_ratio")] = e.number("alpha");
    }
  }
  return with_context(r, [&] {
    return MaterialModel(moduli, r.number("poisson_ratio", ref.poisson_ratio()), alpha);
  });
}

SolverSettings read_settings(const Reader& r) {
  r.allow({"grid_nodes", "moment_tol_nm", "max_iterations", "displacement_tol_m", "max_force_n",
           "max_force_evaluations"});
  SolverSettings s;
  s.grid_nodes = r.integer("grid_nodes", s.grid_nodes);
  s.moment_tol = r.number("moment_tol_nm", s.moment_tol);
  s.max_iterations = r.integer("max_iterations", s.max_iterations);
  s.displacement_tol = r.number("displacement_tol_m", s.displacement_tol);
  s.max_force = r.number("max_force_n", s.max_force);
  s.max_force_evaluations = r.integer("max_force_evaluations", s.max_force_evaluations);
  with_context(r, [&] {
    s.validate();
    return 0;
  });
  return s;
}

Eigen::Vector3d read_direction(const Reader& r) {
  if (!r.has("direction")) return Eigen::Vector3d::UnitY();
  const auto v = r.numbers("direction");
  if (v.size() != 3) r.fail_field("direction", "expected three components");
  Eigen::Vector3d d(v[0], v[1], v[2]);
  if (!(d.norm() > 0.0)) r.fail_field("direction", "must be non-zero");
  return d.normalized();
}

void check_schema(const Reader& root, const char* expected) {
  const std::string version = root.string("schema_version", "");
  if (version != expected) {
    root.fail_field("schema_version", "expected '" + std::string(expected) + "'");
  }
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& source) {
  const json doc = parse_json(text, source);
  const Reader root(doc, "", source);
  root.allow({"schema_version", "rod", "material", "load", "protocol", "settings", "battery",
              "fit"});
  check_schema(root, kScenarioSchema);

  Scenario sc;
  if (root.has("rod")) sc.rod = read_rod(root.child("rod"));
  if (root.has("material")) sc.material = read_material(root.child("material"));
  if (root.has("settings")) sc.settings = read_settings(root.child("settings"));

  sc.load = LoadCase::displacement(sc.rod.length(), Eigen::Vector3d::UnitY(), 0.02);
  if (root.has("load")) {
    const Reader l = root.child("load");
    l.allow({"mode", "station_m", "direction", "force_n", "displacement_m"});
    const std::string mode = l.string("mode", "displacement");
    sc.load.station = l.number("station_m", sc.rod.length());
    sc.load.direction = read_direction(l);
    if (mode == "force") {
      sc.load.mode = LoadCase::Mode::force;
      sc.load.magnitude = l.number("force_n");
    } else if (mode == "displacement") {
      sc.load.mode = LoadCase::Mode::displacement;
      sc.load.magnitude = l.number("displacement_m", 0.02);
    } else {
      l.fail_field("mode", "expected 'force' or 'displacement'");
    }
    with_context(l, [&] {
      sc.load.validate(sc.rod.length());
      return 0;
    });
  }

  if (root.has("protocol")) {
    const Reader p = root.child("protocol");
    p.allow({"kind", "stroke_m", "samples", "target_stiffness_n_per_m", "target_rel_tol"});
    const std::string kind = p.string("kind", "sweep");
    if (kind == "sweep") {
      sc.protocol.kind = Protocol::Kind::sweep;
    } else if (kind == "single") {
      sc.protocol.kind = Protocol::Kind::single;
    } else {
      p.fail_field("kind", "expected 'single' or 'sweep'");
    }
    sc.protocol.stroke = p.number("stroke_m", sc.protocol.stroke);
    sc.protocol.samples = p.integer("samples", sc.protocol.samples);
    if (p.has("target_stiffness_n_per_m")) {
      sc.protocol.target_stiffness = p.number("target_stiffness_n_per_m");
    }
    sc.protocol.target_rel_tol = p.number("target_rel_tol", sc.protocol.target_rel_tol);
    if (!(sc.protocol.stroke >= 0.0)) p.fail_field("stroke_m", "must be non-negative");
    if (sc.protocol.samples < 2) p.fail_field("samples", "must be at least 2");
  }

  if (root.has("battery")) {
    const Reader b = root.child("battery");
    b.allow({"preset", "variants"});
    BatteryConfig cfg;
    if (b.has("preset")) {
      if (b.string("preset", "") != "table2") b.fail_field("preset", "expected 'table2'");
      cfg.table2 = true;
    }
    if (b.has("variants")) {
      const auto& arr = b.array("variants");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const Reader v = b.element("variants", i);
        v.allow({"id", "group", "bands"});
        auto bands = read_bands(v, "bands");
        const std::string id = v.string("id", layout_id(bands));
        RodSpec spec = with_context(v, [&] { return sc.rod.with_bands(bands, id); });
        cfg.variants.push_back({id, v.string("group", "custom"), std::move(spec)});
      }
    }
    if (cfg.table2 == !cfg.variants.empty()) {
      b.fail("give exactly one of 'preset' or 'variants'");
    }
    sc.battery = std::move(cfg);
  }

  if (root.has("fit")) {
    const Reader f = root.child("fit");
    f.allow({"fit_modulus", "fit_free_length"});
    sc.fit.fit_modulus = f.boolean("fit_modulus", true);
    sc.fit.fit_free_length = f.boolean("fit_free_length", false);
  }
  return sc;
}

DesignScenario parse_design(const std::string& text, const std::string& source) {
  const json doc = parse_json(text, source);
  const Reader root(doc, "", source);
  root.allow({"schema_version", "rod", "material", "settings", "max_bands", "placement_grid_m",
              "min_spacing_m", "reduction_ratio_candidates", "pressure_budget_kpa",
              "eversion_model", "band_width_m", "stroke_m", "direction", "exhaustive_limit"});
  check_schema(root, kDesignSchema);

  DesignScenario ds;
  if (root.has("rod")) ds.problem.base = read_rod(root.child("rod"));
  if (root.has("material")) ds.material = read_material(root.child("material"));
  if (root.has("settings")) ds.settings = read_settings(root.child("settings"));
  DesignProblem& p = ds.problem;
  p.max_bands = root.integer("max_bands", p.max_bands);
  p.placement_grid = root.numbers("placement_grid_m");
  p.band_width = root.number("band_width_m", p.band_width);
  p.min_spacing = root.number("min_spacing_m", std::max(p.min_spacing, p.band_width));
  p.ratio_candidates = root.numbers("reduction_ratio_candidates");
  p.pressure_budget_kpa = root.number("pressure_budget_kpa");
  p.protocol.stroke = root.number("stroke_m", p.protocol.stroke);
  p.protocol.direction = read_direction(root);
  p.exhaustive_limit =
      static_cast<std::size_t>(root.integer("exhaustive_limit", static_cast<int>(p.exhaustive_limit)));

  const Reader ev = root.child("eversion_model");
  ev.allow({"law", "p0_kpa", "rate", "points"});
  const std::string law = ev.string("law", "exponential");
  EversionLaw kind = EversionLaw::exponential;
  if (law == "power") {
    kind = EversionLaw::power;
  } else if (law != "exponential") {
    ev.fail_field("law", "expected 'exponential' or 'power'");
  }
  if (ev.has("points")) {
    std::vector<EversionPoint> pts;
    const auto& arr = ev.array("points");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const Reader e = ev.element("points", i);
      e.allow({"reduction_ratio", "pressure_kpa"});
      pts.push_back({e.number("reduction_ratio"), e.number("pressure_kpa")});
    }
    p.eversion = with_context(ev, [&] { return fit_eversion_pressure(pts, kind); });
  } else {
    p.eversion.law = kind;
    p.eversion.p0_kpa = ev.number("p0_kpa");
    p.eversion.rate = ev.number("rate");
  }
  with_context(root, [&] {
    p.validate(ds.material);
    return 0;
  });
  return ds;
}

void apply_settings_overrides(SolverSettings& settings, const std::string& overrides) {
  std::istringstream in(overrides);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("--settings: expected key=value, got '" + item + "'");
    }
    const std::string key = item.substr(0, eq);
    const double value = parse_double(item.substr(eq + 1), "--settings " + key);
    if (key == "grid_nodes") {
      settings.grid_nodes = static_cast<int>(value);
    } else if (key == "moment_tol") {
      settings.moment_tol = value;
    } else if (key == "displacement_tol") {
      settings.displacement_tol = value;
    } else if (key == "max_iterations") {
      settings.max_iterations = static_cast<int>(value);
    } else if (key == "max_force") {
      settings.max_force = value;
    } else {
      throw ValidationError("--settings: unknown key '" + key + "'");
    }
  }
  settings.validate();
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

ojson to_json(const BandSpec& band) {
  ojson j;
  j["distance_from_tip_m"] = band.distance_from_tip;
  j["reduction_ratio"] = band.reduction_ratio;
  j["width_m"] = band.width;
  return j;
}

ojson to_json(const FitResult& fit) {
  ojson j;
  j["parameters"] = ojson::array();
  for (const auto& p : fit.parameters) {
    j["parameters"].push_back({{"name", p.name}, {"unit", p.unit}, {"value", p.value}});
  }
  j["residual_norm"] = fit.residual_norm;
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  j["at_boundary"] = fit.at_boundary;
  j["message"] = fit.message;
  return j;
}

ojson to_json(const EversionPressureModel& model) {
  ojson j;
  j["law"] = model.law == EversionLaw::exponential ? "exponential" : "power";
  j["p0_kpa"] = model.p0_kpa;
  j["rate"] = model.rate;
  j["points"] = ojson::array();
  for (std::size_t i = 0; i < model.points.size(); ++i) {
    const auto& p = model.points[i];
    j["points"].push_back({{"reduction_ratio", p.reduction_ratio},
                           {"pressure_kpa", p.pressure_kpa},
                           {"predicted_kpa",
                            predict_eversion_pressure(model, p.reduction_ratio).pressure_kpa},
                           {"log_residual", model.log_residuals[i]}});
  }
  return j;
}

ojson to_json(const DesignResult& design) {
  ojson j;
  j["bands"] = ojson::array();
  for (const auto& b : design.bands) j["bands"].push_back(to_json(b));
  j["stiffness_index_n_per_m"] = design.stiffness_index;
  j["eversion_pressure_kpa"] = design.eversion_pressure_kpa;
  j["search"] = design.exhaustive ? "exhaustive" : "greedy";
  j["layouts_evaluated"] = design.evaluated.size();
  ojson sheet;
  sheet["sheet_width_m"] = design.sheet.sheet_width;
  sheet["sheet_length_m"] = design.sheet.sheet_length;
  sheet["strip_width_m"] = design.sheet.strip_width;
  sheet["strip_lengths_m"] = design.sheet.strip_lengths;
  sheet["strip_positions_from_tip_m"] = design.sheet.strip_positions;
  j["fabrication"] = sheet;
  return j;
}

ojson to_json(const ExperimentBattery& battery) {
  ojson j;
  j["name"] = battery.name;
  j["stroke_m"] = battery.protocol.stroke;
  j["samples"] = battery.protocol.samples;
  j["variants"] = ojson::array();
  for (const auto& r : battery.results) {
    j["variants"].push_back({{"id", r.id},
                             {"group", r.group},
                             {"band_count", r.band_count},
                             {"placements_from_tip_m", r.placements},
                             {"reduction_ratio", r.reduction_ratio},
                             {"stiffness_index_n_per_m", r.stiffness_index},
                             {"terminal_force_n", r.terminal_force}});
  }
  return j;
}

}  // namespace everrod
