#include "mlpo/cli.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mlpo/exponents.hpp"
#include "mlpo/extremal.hpp"
#include "mlpo/grid.hpp"
#include "mlpo/norms.hpp"
#include "mlpo/op.hpp"
#include "mlpo/windows.hpp"

namespace mlpo {
namespace {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

// --- file helpers --------------------------------------------------------------

std::string read_text_file(const std::string& path, const std::string& flag) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error(flag + ": cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text,
                     const std::string& flag) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error(flag + ": cannot write '" + path + "'");
  out << text;
  if (!out) throw config_error(flag + ": cannot write '" + path + "'");
}

// --- JSON config reading ---------------------------------------------------------
//
// Wraps one JSON object; every accessor marks its key as known, and finish()
// rejects the first remaining unknown key by name.  All experiment config
// files flow through this, so typos fail loudly instead of silently keeping
// a default.

class ConfigReader {
 public:
  ConfigReader(const json& object, std::string context)
      : obj_(object), context_(std::move(context)) {
    if (!obj_.is_object())
      throw config_error(context_ + ": expected a JSON object");
  }

  bool has(const std::string& key) {
    seen_.push_back(key);
    return obj_.contains(key);
  }

  int get_int(const std::string& key, int def) {
    if (!has(key)) return def;
    const json& v = obj_.at(key);
    if (!v.is_number_integer()) fail(key, "an integer");
    return v.get<int>();
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t def) {
    if (!has(key)) return def;
    const json& v = obj_.at(key);
    if (!v.is_number_integer()) fail(key, "an integer");
    return v.get<std::uint64_t>();
  }

  double get_double(const std::string& key, double def) {
    if (!has(key)) return def;
    const json& v = obj_.at(key);
    if (!v.is_number()) fail(key, "a number");
    return v.get<double>();
  }

  bool get_bool(const std::string& key, bool def) {
    if (!has(key)) return def;
    const json& v = obj_.at(key);
    if (!v.is_boolean()) fail(key, "a boolean");
    return v.get<bool>();
  }

  std::string get_string(const std::string& key, const std::string& def) {
    if (!has(key)) return def;
    const json& v = obj_.at(key);
    if (!v.is_string()) fail(key, "a string");
    return v.get<std::string>();
  }

  std::vector<double> get_double_list(const std::string& key,
                                      std::vector<double> def) {
    if (!has(key)) return def;
    const json& v = obj_.at(key);
    if (!v.is_array()) fail(key, "an array of numbers");
    std::vector<double> out;
    for (const json& e : v) {
      if (!e.is_number()) fail(key, "an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<int> get_int_list(const std::string& key, std::vector<int> def) {
    if (!has(key)) return def;
    const json& v = obj_.at(key);
    if (!v.is_array()) fail(key, "an array of integers");
    std::vector<int> out;
    for (const json& e : v) {
      if (!e.is_number_integer()) fail(key, "an array of integers");
      out.push_back(e.get<int>());
    }
    return out;
  }

  LebesgueExponent get_exponent(const std::string& key, const LebesgueExponent& def) {
    if (!has(key)) return def;
    return exponent_value(obj_.at(key), key);
  }

  std::vector<LebesgueExponent> get_exponent_list(const std::string& key,
                                                  std::vector<LebesgueExponent> def) {
    if (!has(key)) return def;
    const json& v = obj_.at(key);
    if (!v.is_array()) fail(key, "an array of exponents");
    std::vector<LebesgueExponent> out;
    for (const json& e : v) out.push_back(exponent_value(e, key));
    return out;
  }

  std::vector<LatticePoint> get_points(const std::string& key,
                                       std::vector<LatticePoint> def) {
    if (!has(key)) return def;
    const json& v = obj_.at(key);
    if (!v.is_array()) fail(key, "an array of lattice points");
    std::vector<LatticePoint> out;
    for (const json& e : v) {
      if (!e.is_array() || e.empty() || e.size() > 2) fail(key, "lattice points [a] or [a,b]");
      LatticePoint p{0, 0};
      for (std::size_t axis = 0; axis < e.size(); ++axis) {
        if (!e[axis].is_number_integer()) fail(key, "integer lattice coordinates");
        p[axis] = e[axis].get<int>();
      }
      out.push_back(p);
    }
    return out;
  }

  // Returns the subobject (marking the key) or an empty object when absent.
  json subobject(const std::string& key) {
    if (!has(key)) return json::object();
    const json& v = obj_.at(key);
    if (!v.is_object()) fail(key, "a JSON object");
    return v;
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      bool known = false;
      for (const std::string& s : seen_)
        if (s == it.key()) {
          known = true;
          break;
        }
      if (!known)
        throw config_error(context_ + ": unknown key '" + it.key() + "'");
    }
  }

 private:
  [[noreturn]] void fail(const std::string& key, const std::string& expected) const {
    throw config_error(context_ + ": key '" + key + "' must be " + expected);
  }

  LebesgueExponent exponent_value(const json& v, const std::string& key) const {
    try {
      if (v.is_string()) return LebesgueExponent::parse(v.get<std::string>());
      if (v.is_number_integer()) return LebesgueExponent::from_int(v.get<std::int64_t>());
      if (v.is_number_float()) return LebesgueExponent::parse(format_double(v.get<double>()));
    } catch (const config_error& e) {
      throw config_error(context_ + ": key '" + key + "': " + e.what());
    }
    fail(key, "an exponent (string, integer, or short decimal)");
  }

  const json& obj_;
  std::string context_;
  std::vector<std::string> seen_;
};

json parse_json_text(const std::string& text, const std::string& context) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw config_error(context + ": malformed JSON");
  return j;
}

// --- profiles --------------------------------------------------------------------

ExponentProfile profile_from_object(const json& object, const std::string& context) {
  ConfigReader reader(object, context);
  for (const char* key : {"N", "n", "p", "q", "p_j", "q_j", "s", "s_j"}) reader.has(key);
  reader.finish();
  return ExponentProfile::parse_json(object.dump());
}

ordered profile_echo(const ExponentProfile& profile) {
  ordered out;
  out["N"] = profile.N;
  out["n"] = profile.n;
  out["p"] = profile.p.str();
  out["q"] = profile.q.str();
  ordered::array_t pj, qj, sj;
  for (const LebesgueExponent& e : profile.p_j) pj.push_back(e.str());
  for (const LebesgueExponent& e : profile.q_j) qj.push_back(e.str());
  for (double s : profile.s_j) sj.push_back(s);
  out["p_j"] = pj;
  out["q_j"] = qj;
  out["s"] = profile.s;
  out["s_j"] = sj;
  return out;
}

// Profile config files may wrap the profile in {"profile": {...}} or give the
// object directly.
ExponentProfile profile_from_config_text(const std::string& text) {
  json j = parse_json_text(text, "profile config");
  if (j.is_object() && j.contains("profile")) {
    ConfigReader reader(j, "profile config");
    json sub = reader.subobject("profile");
    reader.finish();
    return profile_from_object(sub, "profile");
  }
  return profile_from_object(j, "profile");
}

// --- symbol parsing ---------------------------------------------------------------

TestSymbolParams test_symbol_params_from(ConfigReader& reader, TestSymbolParams start) {
  TestSymbolParams params = start;
  params.n = reader.get_int("n", params.n);
  params.N = reader.get_int("N", params.N);
  params.constant = cd{reader.get_double("constant_re", params.constant.real()),
                       reader.get_double("constant_im", params.constant.imag())};
  params.gaussian_widths = reader.get_double_list("gaussian_widths", params.gaussian_widths);
  std::string factor = reader.get_string(
      "space_factor",
      params.space_factor == TestSymbolParams::SpaceFactor::modulation ? "modulation"
                                                                       : "cosine-series");
  if (factor == "modulation")
    params.space_factor = TestSymbolParams::SpaceFactor::modulation;
  else if (factor == "cosine-series")
    params.space_factor = TestSymbolParams::SpaceFactor::cosine_series;
  else
    throw config_error("symbol: key 'space_factor' must be 'modulation' or 'cosine-series'");
  params.modulation_freq = reader.get_double("modulation_freq", params.modulation_freq);
  params.cosine_terms = reader.get_int("cosine_terms", params.cosine_terms);
  params.cosine_power = reader.get_double("cosine_power", params.cosine_power);
  return params;
}

TupleKind tuple_kind_from_string(const std::string& text, const std::string& context) {
  if (text == "sum-zero") return TupleKind::sum_zero;
  if (text == "free-sum") return TupleKind::free_sum;
  throw config_error(context + ": tuple kind must be 'sum-zero' or 'free-sum'");
}

LatticeTupleParams tuple_params_from_object(const json& object, const std::string& context) {
  ConfigReader reader(object, context);
  LatticeTupleParams set;
  set.kind = tuple_kind_from_string(reader.get_string("kind", "sum-zero"), context);
  set.n = reader.get_int("n", set.n);
  set.N = reader.get_int("N", set.N);
  set.ell = reader.get_int("ell", set.ell);
  set.delta = reader.get_double("delta", set.delta);
  set.gap = reader.get_int("gap", set.gap);
  reader.finish();
  return set;
}

}  // namespace

Symbol symbol_from_json(const std::string& text) {
  json j = parse_json_text(text, "symbol");
  ConfigReader reader(j, "symbol");
  std::string kind = reader.get_string("kind", "constant");
  if (kind == "constant" || kind == "separable" || kind == "oscillatory-x") {
    TestSymbolParams params = test_symbol_params_from(reader, TestSymbolParams{});
    reader.finish();
    TestSymbolKind k = kind == "constant"    ? TestSymbolKind::constant
                       : kind == "separable" ? TestSymbolKind::separable
                                             : TestSymbolKind::oscillatory_x;
    return make_test_symbol(k, params);
  }
  if (kind == "lattice") {
    LatticeTupleParams set = tuple_params_from_object(reader.subobject("set"), "symbol set");
    double m = reader.get_double("m", 0.0);
    int stored = set.kind == TupleKind::sum_zero ? set.N : set.N - 1;
    std::vector<double> a =
        reader.get_double_list("a", std::vector<double>(static_cast<std::size_t>(stored), 0.5));
    std::uint64_t seed = reader.get_u64("seed", 20260819ull);
    std::function<cd(std::span<const LatticePoint>)> coefficient;
    if (reader.has("coefficient_file")) {
      std::string path = reader.get_string("coefficient_file", "");
      coefficient = read_lattice_coefficients(path);
    } else {
      std::string choice = reader.get_string("coefficients", "chirp");
      if (choice == "chirp")
        coefficient = chirp_phase_coefficients(a);
      else if (choice == "rademacher-chirp")
        coefficient = rademacher_chirp_coefficients(a, seed);
      else
        throw config_error("symbol: key 'coefficients' must be 'chirp' or 'rademacher-chirp'");
    }
    reader.finish();
    return make_sharpness_symbol(set, m, std::move(coefficient));
  }
  throw config_error(
      "symbol: key 'kind' must be 'constant', 'separable', 'oscillatory-x', or 'lattice'");
}

// --- experiment config parsers -----------------------------------------------------

SharpnessSConfig sharpness_s_config_from_json(const std::string& text) {
  json j = parse_json_text(text, "sharpness-s config");
  ConfigReader reader(j, "sharpness-s config");
  SharpnessSConfig config;
  config.profile = reader.has("profile")
                       ? profile_from_object(j.at("profile"), "sharpness-s profile")
                       : l2_profile(1, 2);
  if (reader.has("m")) config.m = reader.get_double("m", 0.0);
  config.a = reader.get_double_list("a", config.a);
  config.b = reader.get_double_list("b", config.b);
  config.b_margin = reader.get_double("b_margin", config.b_margin);
  config.ell_lo = reader.get_int("ell_lo", config.ell_lo);
  config.ell_hi = reader.get_int("ell_hi", config.ell_hi);
  config.delta = reader.get_double("delta", config.delta);
  config.gap = reader.get_int("gap", config.gap);
  config.epsilon_ladder = reader.get_double_list("epsilon_ladder", config.epsilon_ladder);
  config.tolerance = reader.get_double("tolerance", config.tolerance);
  config.residual_cap = reader.get_double("residual_cap", config.residual_cap);
  config.pipeline_ell_lo = reader.get_int("pipeline_ell_lo", config.pipeline_ell_lo);
  config.pipeline_ell_hi = reader.get_int("pipeline_ell_hi", config.pipeline_ell_hi);
  config.pipeline_delta = reader.get_double("pipeline_delta", config.pipeline_delta);
  config.pipeline_points = reader.get_int("pipeline_points", config.pipeline_points);
  config.pipeline_scale = reader.get_double("pipeline_scale", config.pipeline_scale);
  config.pipeline_epsilon = reader.get_double("pipeline_epsilon", config.pipeline_epsilon);
  config.pipeline_tolerance = reader.get_double("pipeline_tolerance", config.pipeline_tolerance);
  config.seed = reader.get_u64("seed", config.seed);
  config.jobs = reader.get_int("jobs", config.jobs);
  reader.finish();
  return config;
}

SharpnessSjConfig sharpness_sj_config_from_json(const std::string& text) {
  json j = parse_json_text(text, "sharpness-sj config");
  ConfigReader reader(j, "sharpness-sj config");
  SharpnessSjConfig config;
  config.profile = reader.has("profile")
                       ? profile_from_object(j.at("profile"), "sharpness-sj profile")
                       : l2_profile(1, 2);
  if (reader.has("m")) config.m = reader.get_double("m", 0.0);
  config.a = reader.get_double_list("a", config.a);
  config.b = reader.get_double_list("b", config.b);
  config.b_margin = reader.get_double("b_margin", config.b_margin);
  config.ell_lo = reader.get_int("ell_lo", config.ell_lo);
  config.ell_hi = reader.get_int("ell_hi", config.ell_hi);
  config.delta = reader.get_double("delta", config.delta);
  config.gap = reader.get_int("gap", config.gap);
  config.tolerance = reader.get_double("tolerance", config.tolerance);
  config.residual_cap = reader.get_double("residual_cap", config.residual_cap);
  config.khintchine = reader.get_bool("khintchine", config.khintchine);
  config.khintchine_ell = reader.get_int("khintchine_ell", config.khintchine_ell);
  config.khintchine_samples = reader.get_int("khintchine_samples", config.khintchine_samples);
  config.khintchine_p = reader.get_exponent_list("khintchine_p", config.khintchine_p);
  config.khintchine_points = reader.get_int("khintchine_points", config.khintchine_points);
  config.khintchine_lo = reader.get_double("khintchine_lo", config.khintchine_lo);
  config.khintchine_hi = reader.get_double("khintchine_hi", config.khintchine_hi);
  config.seed = reader.get_u64("seed", config.seed);
  config.jobs = reader.get_int("jobs", config.jobs);
  reader.finish();
  return config;
}

KeypropConfig keyprop_config_from_json(const std::string& text) {
  json j = parse_json_text(text, "keyprop config");
  ConfigReader reader(j, "keyprop config");
  KeypropConfig config;
  config.n = reader.get_int("n", config.n);
  config.N = reader.get_int("N", config.N);
  config.p = reader.get_exponent_list("p", config.p);
  config.r_scale = reader.get_double_list("r_scale", config.r_scale);
  config.R_values = reader.get_int_list("R_values", config.R_values);
  config.trials = reader.get_int("trials", config.trials);
  config.points_per_dim = reader.get_int("points_per_dim", config.points_per_dim);
  config.scale_T = reader.get_double("scale_T", config.scale_T);
  config.tolerance = reader.get_double("tolerance", config.tolerance);
  config.residual_cap = reader.get_double("residual_cap", config.residual_cap);
  config.seed = reader.get_u64("seed", config.seed);
  config.jobs = reader.get_int("jobs", config.jobs);
  reader.finish();
  return config;
}

BandDecayConfig band_decay_config_from_json(const std::string& text) {
  json j = parse_json_text(text, "band-decay config");
  ConfigReader reader(j, "band-decay config");
  BandDecayConfig config;
  std::string kind = reader.get_string("symbol_kind", "oscillatory-x");
  if (kind == "constant")
    config.symbol_kind = TestSymbolKind::constant;
  else if (kind == "separable")
    config.symbol_kind = TestSymbolKind::separable;
  else if (kind == "oscillatory-x")
    config.symbol_kind = TestSymbolKind::oscillatory_x;
  else
    throw config_error(
        "band-decay config: key 'symbol_kind' must be 'constant', 'separable', or "
        "'oscillatory-x'");
  if (reader.has("symbol")) {
    ConfigReader sym(j.at("symbol"), "band-decay config symbol");
    config.symbol = test_symbol_params_from(sym, config.symbol);
    sym.finish();
  }
  config.nu = reader.get_points("nu", config.nu);
  config.mu = reader.get_points("mu", config.mu);
  config.order = reader.get_int("order", config.order);
  config.quad_points = reader.get_int("quad_points", config.quad_points);
  config.level_lo = reader.get_int("level_lo", config.level_lo);
  config.level_hi = reader.get_int("level_hi", config.level_hi);
  config.reference_orders = reader.get_double_list("reference_orders", config.reference_orders);
  config.x_points = reader.get_int("x_points", config.x_points);
  config.x_scale = reader.get_double("x_scale", config.x_scale);
  config.q_tolerance = reader.get_double("q_tolerance", config.q_tolerance);
  config.residual_cap = reader.get_double("residual_cap", config.residual_cap);
  config.with_remainder = reader.get_bool("with_remainder", config.with_remainder);
  config.input_bands = reader.get_int_list("input_bands", config.input_bands);
  config.output_band = reader.get_int("output_band", config.output_band);
  config.remainder_p = reader.get_exponent("remainder_p", config.remainder_p);
  config.remainder_slope_max = reader.get_double("remainder_slope_max",
                                                 config.remainder_slope_max);
  config.seed = reader.get_u64("seed", config.seed);
  config.jobs = reader.get_int("jobs", config.jobs);
  reader.finish();
  return config;
}

EmbeddingConfig embedding_config_from_json(const std::string& text) {
  json j = parse_json_text(text, "embeddings config");
  ConfigReader reader(j, "embeddings config");
  EmbeddingConfig config;
  config.n = reader.get_int("n", config.n);
  config.band_lo = reader.get_int("band_lo", config.band_lo);
  config.band_hi = reader.get_int("band_hi", config.band_hi);
  config.trials_per_band = reader.get_int("trials_per_band", config.trials_per_band);
  config.sequence_cases = reader.get_int("sequence_cases", config.sequence_cases);
  config.sequence_length = reader.get_int("sequence_length", config.sequence_length);
  config.points_per_dim = reader.get_int("points_per_dim", config.points_per_dim);
  config.scale_T = reader.get_double("scale_T", config.scale_T);
  config.stability_factor = reader.get_double("stability_factor", config.stability_factor);
  config.seed = reader.get_u64("seed", config.seed);
  config.jobs = reader.get_int("jobs", config.jobs);
  reader.finish();
  return config;
}

WaingerContrastConfig wainger_contrast_config_from_json(const std::string& text) {
  json j = parse_json_text(text, "wainger-contrast config");
  ConfigReader reader(j, "wainger-contrast config");
  WaingerContrastConfig config;
  config.n = reader.get_int("n", config.n);
  config.a = reader.get_double("a", config.a);
  config.p_values = reader.get_exponent_list("p_values", config.p_values);
  config.above_margin = reader.get_double("above_margin", config.above_margin);
  config.below_margin = reader.get_double("below_margin", config.below_margin);
  config.epsilon_ladder = reader.get_double_list("epsilon_ladder", config.epsilon_ladder);
  config.V_max = reader.get_int("V_max", config.V_max);
  config.points_per_dim = reader.get_int("points_per_dim", config.points_per_dim);
  config.scale_T = reader.get_double("scale_T", config.scale_T);
  config.flat_growth_max = reader.get_double("flat_growth_max", config.flat_growth_max);
  config.rising_growth_min = reader.get_double("rising_growth_min", config.rising_growth_min);
  config.seed = reader.get_u64("seed", config.seed);
  config.jobs = reader.get_int("jobs", config.jobs);
  reader.finish();
  return config;
}

// --- report paths -----------------------------------------------------------------

std::string sidecar_path(const std::string& csv_path) {
  std::size_t slash = csv_path.find_last_of("/\\");
  std::size_t dot = csv_path.find_last_of('.');
  bool has_ext = dot != std::string::npos &&
                 (slash == std::string::npos || dot > slash);
  std::string stem = has_ext ? csv_path.substr(0, dot) : csv_path;
  std::string candidate = stem + ".json";
  return candidate == csv_path ? stem + ".meta.json" : candidate;
}

std::string multi_report_path(const std::string& csv_path, const std::string& name) {
  std::size_t slash = csv_path.find_last_of("/\\");
  std::size_t dot = csv_path.find_last_of('.');
  bool has_ext = dot != std::string::npos &&
                 (slash == std::string::npos || dot > slash);
  if (!has_ext) return csv_path + "." + name + ".csv";
  return csv_path.substr(0, dot) + "." + name + csv_path.substr(dot);
}

namespace {

// --- config echoes (dry runs print these; runs echo through the reports) -----------

ordered echo_sharpness_s(const SharpnessSConfig& c, const std::string& mode) {
  ordered out;
  out["experiment"] = "sharpness-s";
  out["mode"] = mode;
  out["profile"] = profile_echo(c.profile);
  if (c.m) out["m"] = *c.m;
  out["a"] = c.a;
  out["b"] = c.b;
  out["b_margin"] = c.b_margin;
  out["ell_lo"] = c.ell_lo;
  out["ell_hi"] = c.ell_hi;
  out["delta"] = c.delta;
  out["gap"] = c.gap;
  out["epsilon_ladder"] = c.epsilon_ladder;
  out["tolerance"] = c.tolerance;
  out["residual_cap"] = c.residual_cap;
  if (mode == "pipeline") {
    out["pipeline_ell_lo"] = c.pipeline_ell_lo;
    out["pipeline_ell_hi"] = c.pipeline_ell_hi;
    out["pipeline_delta"] = c.pipeline_delta;
    out["pipeline_points"] = c.pipeline_points;
    out["pipeline_scale"] = c.pipeline_scale;
    out["pipeline_epsilon"] = c.pipeline_epsilon;
    out["pipeline_tolerance"] = c.pipeline_tolerance;
  }
  out["seed"] = c.seed;
  out["jobs"] = c.jobs;
  return out;
}

ordered echo_sharpness_sj(const SharpnessSjConfig& c) {
  ordered out;
  out["experiment"] = "sharpness-sj";
  out["profile"] = profile_echo(c.profile);
  if (c.m) out["m"] = *c.m;
  out["a"] = c.a;
  out["b"] = c.b;
  out["b_margin"] = c.b_margin;
  out["ell_lo"] = c.ell_lo;
  out["ell_hi"] = c.ell_hi;
  out["delta"] = c.delta;
  out["gap"] = c.gap;
  out["tolerance"] = c.tolerance;
  out["residual_cap"] = c.residual_cap;
  out["khintchine"] = c.khintchine;
  if (c.khintchine) {
    out["khintchine_ell"] = c.khintchine_ell;
    out["khintchine_samples"] = c.khintchine_samples;
    ordered::array_t ps;
    for (const LebesgueExponent& p : c.khintchine_p) ps.push_back(p.str());
    out["khintchine_p"] = ps;
    out["khintchine_points"] = c.khintchine_points;
    out["khintchine_lo"] = c.khintchine_lo;
    out["khintchine_hi"] = c.khintchine_hi;
  }
  out["seed"] = c.seed;
  out["jobs"] = c.jobs;
  return out;
}

ordered echo_keyprop(const KeypropConfig& c) {
  ordered out;
  out["experiment"] = "keyprop";
  out["n"] = c.n;
  out["N"] = c.N;
  ordered::array_t ps;
  for (const LebesgueExponent& p : c.p) ps.push_back(p.str());
  out["p"] = ps;
  out["r_scale"] = c.r_scale;
  out["R_values"] = c.R_values;
  out["trials"] = c.trials;
  out["points_per_dim"] = c.points_per_dim;
  out["scale_T"] = c.scale_T;
  out["tolerance"] = c.tolerance;
  out["residual_cap"] = c.residual_cap;
  out["seed"] = c.seed;
  out["jobs"] = c.jobs;
  return out;
}

ordered echo_band_decay(const BandDecayConfig& c) {
  ordered out;
  out["experiment"] = "band-decay";
  out["symbol_kind"] = c.symbol_kind == TestSymbolKind::constant    ? "constant"
                       : c.symbol_kind == TestSymbolKind::separable ? "separable"
                                                                    : "oscillatory-x";
  ordered sym;
  sym["n"] = c.symbol.n;
  sym["N"] = c.symbol.N;
  sym["constant_re"] = c.symbol.constant.real();
  sym["constant_im"] = c.symbol.constant.imag();
  sym["gaussian_widths"] = c.symbol.gaussian_widths;
  sym["space_factor"] =
      c.symbol.space_factor == TestSymbolParams::SpaceFactor::modulation ? "modulation"
                                                                         : "cosine-series";
  sym["modulation_freq"] = c.symbol.modulation_freq;
  sym["cosine_terms"] = c.symbol.cosine_terms;
  sym["cosine_power"] = c.symbol.cosine_power;
  out["symbol"] = sym;
  ordered::array_t nus, mus;
  for (const LatticePoint& p : c.nu) nus.push_back(ordered::array_t{p[0], p[1]});
  for (const LatticePoint& p : c.mu) mus.push_back(ordered::array_t{p[0], p[1]});
  out["nu"] = nus;
  out["mu"] = mus;
  out["order"] = c.order;
  out["quad_points"] = c.quad_points;
  out["level_lo"] = c.level_lo;
  out["level_hi"] = c.level_hi;
  out["reference_orders"] = c.reference_orders;
  out["x_points"] = c.x_points;
  out["x_scale"] = c.x_scale;
  out["q_tolerance"] = c.q_tolerance;
  out["residual_cap"] = c.residual_cap;
  out["with_remainder"] = c.with_remainder;
  out["input_bands"] = c.input_bands;
  out["output_band"] = c.output_band;
  out["remainder_p"] = c.remainder_p.str();
  out["remainder_slope_max"] = c.remainder_slope_max;
  out["seed"] = c.seed;
  out["jobs"] = c.jobs;
  return out;
}

ordered echo_embedding(const EmbeddingConfig& c) {
  ordered out;
  out["experiment"] = "embeddings";
  out["n"] = c.n;
  out["band_lo"] = c.band_lo;
  out["band_hi"] = c.band_hi;
  out["trials_per_band"] = c.trials_per_band;
  out["sequence_cases"] = c.sequence_cases;
  out["sequence_length"] = c.sequence_length;
  out["points_per_dim"] = c.points_per_dim;
  out["scale_T"] = c.scale_T;
  out["stability_factor"] = c.stability_factor;
  out["seed"] = c.seed;
  out["jobs"] = c.jobs;
  return out;
}

ordered echo_wainger_contrast(const WaingerContrastConfig& c) {
  ordered out;
  out["experiment"] = "wainger-contrast";
  out["n"] = c.n;
  out["a"] = c.a;
  ordered::array_t ps;
  for (const LebesgueExponent& p : c.p_values) ps.push_back(p.str());
  out["p_values"] = ps;
  out["above_margin"] = c.above_margin;
  out["below_margin"] = c.below_margin;
  out["epsilon_ladder"] = c.epsilon_ladder;
  out["V_max"] = c.V_max;
  out["points_per_dim"] = c.points_per_dim;
  out["scale_T"] = c.scale_T;
  out["flat_growth_max"] = c.flat_growth_max;
  out["rising_growth_min"] = c.rising_growth_min;
  out["seed"] = c.seed;
  out["jobs"] = c.jobs;
  return out;
}

// --- report writing ----------------------------------------------------------------

int write_reports(const std::vector<ExperimentReport>& reports, const std::string& out) {
  for (const ExperimentReport& rep : reports) {
    std::string csv_path = reports.size() == 1 ? out : multi_report_path(out, rep.name);
    write_text_file(csv_path, rep.csv(), "--out");
    write_text_file(sidecar_path(csv_path), rep.metadata_json(), "--out");
    std::cout << (rep.verdict ? "pass " : "FAIL ") << rep.name << " -> " << csv_path << "\n";
  }
  return 0;
}

int dry_run_echo(const ordered& resolved) {
  std::cout << resolved.dump(2) << "\n";
  std::cout << "dry-run: configuration valid; no outputs written\n";
  return 0;
}

// --- flag parsing helpers ------------------------------------------------------------

LebesgueExponent exponent_flag(const std::string& text, const std::string& flag) {
  try {
    return LebesgueExponent::parse(text);
  } catch (const config_error& e) {
    throw config_error(flag + ": " + e.what());
  }
}

std::vector<double> double_list_flag(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      double v = std::stod(item, &pos);
      if (pos != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw config_error(flag + ": cannot parse '" + item + "' as a number");
    }
  }
  if (out.empty()) throw config_error(flag + ": empty list");
  return out;
}

std::vector<std::string> string_list_flag(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

// Largest dyadic level whose window still fits the representable band.
int auto_levels(const GridSpec& spec) {
  int K = static_cast<int>(std::floor(std::log2(spec.nyquist()) - 0.75));
  return K < 1 ? 1 : K;
}

// --- subcommand state ----------------------------------------------------------------

struct CliState {
  // exponents
  std::string config_path;
  std::string out_path;

  // norm
  std::string space;
  std::string p_text = "2";
  std::string q_text = "2";
  double s = 0.0;
  std::string seq_text;
  std::string in_path;
  int levels = -1;

  // windows
  std::string kind = "sharp";
  std::string variant = "s3";
  int points = 1 << 12;
  double scale = 4.0;
  std::uint64_t seed = 1;

  // op apply
  std::string symbol_path;
  std::string inputs_text;
  std::string method = "direct";
  int mode_radius = 8;
  int order = 2;
  int quad_points = 64;
  double bin_threshold = 0.0;
  double alias_tolerance = 1e-9;
  std::uint64_t cost_budget = 400'000'000ull;

  // extremal
  double a = 0.5;
  double b = 1.0;
  double epsilon = 1.0 / 64.0;
  int V_max = 6000;
  bool modulated = false;
  int wainger_points = 1 << 15;
  double wainger_scale = 1.0;
  int ell = 5;
  double delta = 0.5;
  int gap = -1;
  int n = 1;
  int N = 2;
  double m = 0.0;
  std::string b_list_text;
  double sum_epsilon = 0.0;

  // experiment
  std::string mode = "combinatorial";
  bool dry_run = false;
  std::optional<std::uint64_t> seed_override;
  std::optional<int> jobs_override;
};

int run_exponents_critical(const CliState& st) {
  ExponentProfile profile =
      profile_from_config_text(read_text_file(st.config_path, "--config"));
  CriticalOrder order = critical_order(profile);
  std::cout << format_double(order.value()) << "\n";
  if (!st.out_path.empty()) {
    ordered out;
    out["profile"] = profile_echo(profile);
    out["exponent_part"] = order.exponent_part.str();
    out["smoothness_part"] = order.smoothness_part;
    out["critical_order"] = order.value();
    write_text_file(st.out_path, out.dump(2) + "\n", "--out");
  }
  return 0;
}

int run_exponents_check(const CliState& st) {
  ExponentProfile profile =
      profile_from_config_text(read_text_file(st.config_path, "--config"));
  SmoothnessCheck check = check_smoothness_conditions(profile);
  std::cout << "sufficient: " << (check.sufficient ? "true" : "false") << "\n";
  std::cout << "necessary: " << (check.necessary ? "true" : "false") << "\n";
  for (std::size_t j = 0; j < check.source_margins.size(); ++j)
    std::cout << "source_margin_" << (j + 1) << ": "
              << format_double(check.source_margins[j]) << "\n";
  std::cout << "target_margin: " << format_double(check.target_margin) << "\n";
  if (!st.out_path.empty()) {
    ordered out;
    out["profile"] = profile_echo(profile);
    out["sufficient"] = check.sufficient;
    out["necessary"] = check.necessary;
    out["source_margins"] = check.source_margins;
    out["target_margin"] = check.target_margin;
    write_text_file(st.out_path, out.dump(2) + "\n", "--out");
  }
  return 0;
}

int run_norm(const CliState& st) {
  LebesgueExponent p = exponent_flag(st.p_text, "--p");
  LebesgueExponent q = exponent_flag(st.q_text, "--q");
  double value = 0.0;
  ordered echo;
  echo["space"] = st.space;
  if (st.space == "lq") {
    if (st.seq_text.empty()) throw config_error("--seq is required for --space lq");
    std::vector<double> seq = double_list_flag(st.seq_text, "--seq");
    value = lq_norm(seq, q);
    echo["q"] = q.str();
    echo["seq"] = seq;
  } else {
    if (st.in_path.empty()) throw config_error("--in is required for --space " + st.space);
    GridFunction f = read_gridfn(st.in_path);
    if (f.domain != Domain::space) f = transform(f, Domain::space);
    echo["in"] = st.in_path;
    echo["points_per_dim"] = f.spec.points_per_dim;
    echo["scale_T"] = f.spec.scale_T;
    NormRequest request;
    request.p = p;
    request.q = q;
    request.s = st.s;
    WindowFamily family;
    UniformWindow kappa;
    if (st.space == "lp") {
      request.space = SpaceKind::lp;
      echo["p"] = p.str();
    } else if (st.space == "besov" || st.space == "besov-hp") {
      request.space =
          st.space == "besov" ? SpaceKind::besov : SpaceKind::besov_hp_variant;
      int K = st.levels > 0 ? st.levels : auto_levels(f.spec);
      family = make_lp_family(FamilyKind::sharp_lp, K, &f.spec);
      request.family = &family;
      echo["p"] = p.str();
      echo["q"] = q.str();
      echo["s"] = st.s;
      echo["levels"] = K;
    } else if (st.space == "hardy") {
      request.space = SpaceKind::local_hardy;
      echo["p"] = p.str();
    } else if (st.space == "bmo") {
      request.space = SpaceKind::bmo;
    } else if (st.space == "amalgam") {
      request.space = SpaceKind::wiener_amalgam;
      kappa = make_uniform_window(UniformKind::kappa_wiener, UniformVariant::s3);
      request.kappa = &kappa;
      echo["p"] = p.str();
      echo["q"] = q.str();
      echo["s"] = st.s;
    } else {
      throw config_error("--space: unknown space '" + st.space + "'");
    }
    value = evaluate_norm(f, request);
  }
  std::cout << format_double(value) << "\n";
  if (!st.out_path.empty()) {
    echo["value"] = value;
    write_text_file(st.out_path, echo.dump(2) + "\n", "--out");
  }
  return 0;
}

struct WindowSelection {
  bool dyadic = false;
  FamilyKind family_kind = FamilyKind::sharp_lp;
  UniformKind uniform_kind = UniformKind::phi;
  UniformVariant variant = UniformVariant::s3;
};

WindowSelection window_selection(const CliState& st) {
  WindowSelection sel;
  if (st.kind == "generic") {
    sel.dyadic = true;
    sel.family_kind = FamilyKind::generic_lp;
  } else if (st.kind == "sharp") {
    sel.dyadic = true;
    sel.family_kind = FamilyKind::sharp_lp;
  } else if (st.kind == "sharp-tilde") {
    sel.dyadic = true;
    sel.family_kind = FamilyKind::sharp_lp_tilde;
  } else if (st.kind == "phi") {
    sel.uniform_kind = UniformKind::phi;
  } else if (st.kind == "phi-tilde") {
    sel.uniform_kind = UniformKind::phi_tilde;
  } else if (st.kind == "kappa-wiener") {
    sel.uniform_kind = UniformKind::kappa_wiener;
  } else {
    throw config_error("--kind: unknown window kind '" + st.kind +
                       "' (expected generic, sharp, sharp-tilde, phi, phi-tilde, or "
                       "kappa-wiener)");
  }
  if (st.variant == "s3")
    sel.variant = UniformVariant::s3;
  else if (st.variant == "s4")
    sel.variant = UniformVariant::s4;
  else
    throw config_error("--variant: expected 's3' or 's4'");
  return sel;
}

GridSpec window_grid(const CliState& st) {
  GridSpec spec;
  spec.n = 1;
  spec.points_per_dim = st.points;
  spec.scale_T = st.scale;
  spec.validate();
  return spec;
}

int run_windows_make(const CliState& st) {
  WindowSelection sel = window_selection(st);
  ordered out;
  out["kind"] = st.kind;
  if (sel.dyadic) {
    GridSpec spec = window_grid(st);
    int K = st.levels > 0 ? st.levels : auto_levels(spec);
    WindowFamily family = make_lp_family(sel.family_kind, K, &spec);
    out["levels"] = K;
    ordered::array_t windows;
    for (const DyadicWindow& w : family.windows) {
      ordered row;
      row["k"] = w.k;
      row["support_inner"] = w.support_inner;
      row["support_outer"] = w.support_outer;
      row["plateau_inner"] = w.plateau_inner;
      row["plateau_outer"] = w.plateau_outer;
      windows.push_back(row);
    }
    out["windows"] = windows;
  } else {
    UniformWindow window = make_uniform_window(sel.uniform_kind, sel.variant);
    out["variant"] = st.variant;
    out["half_width"] = window.half_width;
    out["plateau_half_width"] = window.plateau_half_width;
  }
  std::string text = out.dump(2) + "\n";
  if (!st.out_path.empty())
    write_text_file(st.out_path, text, "--out");
  else
    std::cout << text;
  return 0;
}

int run_windows_verify(const CliState& st) {
  WindowSelection sel = window_selection(st);
  GridSpec spec = window_grid(st);
  VerificationReport report;
  if (sel.dyadic) {
    int K = st.levels > 0 ? st.levels : auto_levels(spec);
    WindowFamily family = make_lp_family(sel.family_kind, K, &spec);
    report = verify_partition(family, spec, st.seed);
  } else {
    UniformWindow window = make_uniform_window(sel.uniform_kind, sel.variant);
    report = verify_partition(window, spec, st.seed);
  }
  std::cout << report.summary();
  if (!st.out_path.empty()) {
    ordered out;
    out["kind"] = st.kind;
    out["points_per_dim"] = st.points;
    out["scale_T"] = st.scale;
    out["seed"] = st.seed;
    ordered::array_t checks;
    for (const VerificationCheck& c : report.checks) {
      ordered row;
      row["name"] = c.name;
      row["value"] = c.value;
      row["threshold"] = c.threshold;
      row["lower_bound"] = c.lower_bound;
      row["pass"] = c.pass;
      checks.push_back(row);
    }
    out["checks"] = checks;
    out["all_pass"] = report.all_pass;
    write_text_file(st.out_path, out.dump(2) + "\n", "--out");
  }
  if (!report.all_pass) {
    std::cerr << "error: window verification failed\n";
    return 2;
  }
  return 0;
}

int run_op_apply(const CliState& st) {
  Symbol sigma = symbol_from_json(read_text_file(st.symbol_path, "--symbol"));
  std::vector<std::string> paths = string_list_flag(st.inputs_text);
  if (static_cast<int>(paths.size()) != sigma.N)
    throw config_error("--inputs: expected " + std::to_string(sigma.N) +
                       " files for an N=" + std::to_string(sigma.N) + " symbol, got " +
                       std::to_string(paths.size()));
  std::vector<GridFunction> inputs;
  for (const std::string& path : paths) {
    GridFunction f = read_gridfn(path);
    if (f.domain != Domain::space) f = transform(f, Domain::space);
    inputs.push_back(std::move(f));
  }
  for (const GridFunction& f : inputs)
    if (!(f.spec == inputs.front().spec))
      throw config_error("--inputs: all inputs must share one grid");
  if (st.method != "direct" && st.method != "expansion")
    throw config_error("--method: expected 'direct' or 'expansion'");

  if (st.dry_run) {
    ordered out;
    out["method"] = st.method;
    out["n"] = sigma.n;
    out["N"] = sigma.N;
    out["points_per_dim"] = inputs.front().spec.points_per_dim;
    out["scale_T"] = inputs.front().spec.scale_T;
    if (st.method == "expansion") {
      DecompositionPlan plan = make_plan(sigma, inputs, st.mode_radius, st.order);
      plan.quad_points = st.quad_points;
      plan.cost_budget = st.cost_budget;
      ordered::array_t active;
      for (const auto& slot : plan.active) active.push_back(slot.size());
      out["active_boxes_per_slot"] = active;
      out["mode_radius"] = plan.mode_radius;
      out["order"] = plan.order;
      out["quad_points"] = plan.quad_points;
    } else {
      out["bin_threshold"] = st.bin_threshold;
      out["alias_tolerance"] = st.alias_tolerance;
    }
    out["cost_budget"] = st.cost_budget;
    return dry_run_echo(out);
  }
  if (st.out_path.empty()) throw config_error("--out is required");
  GridFunction g = [&] {
    if (st.method == "expansion") {
      DecompositionPlan plan = make_plan(sigma, inputs, st.mode_radius, st.order);
      plan.quad_points = st.quad_points;
      plan.cost_budget = st.cost_budget;
      return apply_via_expansion(sigma, inputs, plan);
    }
    ApplyOptions options;
    options.bin_threshold = st.bin_threshold;
    options.alias_tolerance = st.alias_tolerance;
    options.cost_budget = st.cost_budget;
    return apply_direct(sigma, inputs, options);
  }();
  write_gridfn(st.out_path, g);
  std::cout << "wrote " << st.out_path << " (max |g| = " << format_double(g.max_abs())
            << ")\n";
  return 0;
}

int run_extremal_wainger(const CliState& st) {
  WaingerParams params;
  params.n = st.n;
  params.a = st.a;
  params.b = st.b;
  params.epsilon = st.epsilon;
  params.V_max = st.V_max;
  params.p = exponent_flag(st.p_text, "--p");
  GridSpec spec;
  spec.n = st.n;
  spec.points_per_dim = st.wainger_points;
  spec.scale_T = st.wainger_scale;
  spec.validate();
  params.validate();
  if (st.dry_run) {
    ordered out;
    out["a"] = params.a;
    out["b"] = params.b;
    out["epsilon"] = params.epsilon;
    out["V_max"] = params.V_max;
    out["p"] = params.p.str();
    out["points_per_dim"] = spec.points_per_dim;
    out["scale_T"] = spec.scale_T;
    out["modulated"] = st.modulated;
    out["above_threshold"] = params.above_threshold();
    out["threshold"] = wainger_threshold(params.a, params.p, params.n);
    return dry_run_echo(out);
  }
  if (st.out_path.empty()) throw config_error("--out is required");
  GridFunction f;
  if (st.modulated) {
    UniformWindow envelope = make_uniform_window(UniformKind::phi, UniformVariant::s4);
    f = make_wainger_modulated(params, envelope, spec);
  } else {
    UniformWindow phi = make_uniform_window(UniformKind::phi, UniformVariant::s3);
    f = make_wainger(params, phi, spec);
  }
  write_gridfn(st.out_path, f);
  GridFunction space = f.domain == Domain::space ? f : transform(f, Domain::space);
  std::cout << "wrote " << st.out_path
            << " (Lp norm = " << format_double(lp_norm(space, params.p)) << ")\n";
  return 0;
}

LatticeTupleParams tuple_params_from_state(const CliState& st) {
  LatticeTupleParams params;
  params.kind = tuple_kind_from_string(st.kind, "--kind");
  params.n = st.n;
  params.N = st.N;
  params.ell = st.ell;
  params.delta = st.delta;
  params.gap = st.gap;
  params.validate();
  return params;
}

int run_extremal_enumerate(const CliState& st) {
  LatticeTupleParams params = tuple_params_from_state(st);
  int stored = params.kind == TupleKind::sum_zero ? params.N : params.N - 1;
  if (st.dry_run) {
    ordered out;
    out["kind"] = st.kind;
    out["n"] = params.n;
    out["N"] = params.N;
    out["ell"] = params.ell;
    out["delta"] = params.delta;
    out["gap"] = params.effective_gap();
    out["stored_entries"] = stored;
    return dry_run_echo(out);
  }
  std::uint64_t count = 0;
  if (!st.out_path.empty()) {
    std::ostringstream csv;
    for (int e = 0; e < stored; ++e)
      csv << (e ? "," : "") << "mu" << (e + 1) << "_a0,mu" << (e + 1) << "_a1";
    csv << "\n";
    count = for_each_tuple(params, [&](std::span<const LatticePoint> mu) {
      for (std::size_t e = 0; e < mu.size(); ++e)
        csv << (e ? "," : "") << mu[e][0] << "," << mu[e][1];
      csv << "\n";
    });
    write_text_file(st.out_path, csv.str(), "--out");
  } else {
    count = for_each_tuple(params, [](std::span<const LatticePoint>) {});
  }
  std::cout << "count = " << count << "\n";
  return 0;
}

int run_extremal_sum(const CliState& st) {
  LatticeTupleParams params = tuple_params_from_state(st);
  int stored = params.kind == TupleKind::sum_zero ? params.N : params.N - 1;
  std::vector<double> b(static_cast<std::size_t>(stored), 0.0);
  if (!st.b_list_text.empty()) b = double_list_flag(st.b_list_text, "--b");
  if (st.dry_run) {
    ordered out;
    out["kind"] = st.kind;
    out["n"] = params.n;
    out["N"] = params.N;
    out["ell"] = params.ell;
    out["delta"] = params.delta;
    out["gap"] = params.effective_gap();
    out["m"] = st.m;
    out["b"] = b;
    out["epsilon"] = st.sum_epsilon;
    return dry_run_echo(out);
  }
  CoefficientSums sums = coefficient_sums(params, st.m, b, st.sum_epsilon);
  std::cout << "count = " << sums.count << "\n";
  std::cout << "total = " << format_double(sums.total) << "\n";
  std::cout << "l2_per_sum = " << format_double(sums.l2_per_sum) << "\n";
  std::cout << "l2_weights = " << format_double(sums.l2_weights) << "\n";
  if (!st.out_path.empty()) {
    std::ostringstream csv;
    csv << "nu_a0,nu_a1,d_nu\n";
    for (const auto& [nu, d] : sums.per_sum)
      csv << nu[0] << "," << nu[1] << "," << format_double(d) << "\n";
    write_text_file(st.out_path, csv.str(), "--out");
  }
  return 0;
}

int run_experiment(const std::string& kind, const CliState& st) {
  std::string text = st.config_path.empty() ? std::string("{}")
                                            : read_text_file(st.config_path, "--config");
  if (!st.dry_run && st.out_path.empty()) throw config_error("--out is required");

  auto apply_overrides = [&](auto& config) {
    if (st.seed_override) config.seed = *st.seed_override;
    if (st.jobs_override) config.jobs = *st.jobs_override;
  };

  if (kind == "sharpness-s") {
    SharpnessSConfig config = sharpness_s_config_from_json(text);
    apply_overrides(config);
    if (st.mode != "combinatorial" && st.mode != "pipeline")
      throw config_error("--mode: expected 'combinatorial' or 'pipeline'");
    if (st.dry_run) return dry_run_echo(echo_sharpness_s(config, st.mode));
    SharpnessMode mode = st.mode == "pipeline" ? SharpnessMode::full_pipeline
                                               : SharpnessMode::combinatorial;
    return write_reports({run_sharpness_s(config, mode)}, st.out_path);
  }
  if (kind == "sharpness-sj") {
    SharpnessSjConfig config = sharpness_sj_config_from_json(text);
    apply_overrides(config);
    if (st.dry_run) return dry_run_echo(echo_sharpness_sj(config));
    return write_reports({run_sharpness_sj(config)}, st.out_path);
  }
  if (kind == "keyprop") {
    KeypropConfig config = keyprop_config_from_json(text);
    apply_overrides(config);
    if (st.dry_run) return dry_run_echo(echo_keyprop(config));
    return write_reports(run_keyprop_ratio(config), st.out_path);
  }
  if (kind == "band-decay") {
    BandDecayConfig config = band_decay_config_from_json(text);
    apply_overrides(config);
    if (st.dry_run) return dry_run_echo(echo_band_decay(config));
    return write_reports(run_band_decay(config), st.out_path);
  }
  if (kind == "embeddings") {
    EmbeddingConfig config = embedding_config_from_json(text);
    apply_overrides(config);
    if (st.dry_run) return dry_run_echo(echo_embedding(config));
    return write_reports(run_embedding_suite(config), st.out_path);
  }
  if (kind == "wainger-contrast") {
    WaingerContrastConfig config = wainger_contrast_config_from_json(text);
    apply_overrides(config);
    if (st.dry_run) return dry_run_echo(echo_wainger_contrast(config));
    return write_reports(run_wainger_contrast(config), st.out_path);
  }
  throw config_error("unknown experiment '" + kind + "'");
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{
      "Numerical toolkit for multilinear frequency-uniform symbol classes: exponent "
      "formulas, window partitions, operator application, extremal inputs, and "
      "measurement experiments"};
  app.require_subcommand(1);

  CliState st;
  std::function<int()> action;

  // exponents
  CLI::App* exponents =
      app.add_subcommand("exponents", "order formulas and admissibility margins");
  exponents->require_subcommand(1);
  CLI::App* critical =
      exponents->add_subcommand("critical", "critical operator order for a profile");
  critical->add_option("--config", st.config_path, "profile JSON file")->required();
  critical->add_option("--out", st.out_path, "JSON report path");
  critical->callback([&] { action = [&] { return run_exponents_critical(st); }; });
  CLI::App* check =
      exponents->add_subcommand("check", "smoothness window margins for a profile");
  check->add_option("--config", st.config_path, "profile JSON file")->required();
  check->add_option("--out", st.out_path, "JSON report path");
  check->callback([&] { action = [&] { return run_exponents_check(st); }; });

  // norm
  CLI::App* norm = app.add_subcommand("norm", "sequence and function-space quasi-norms");
  norm->add_option("--space", st.space,
                   "lq, lp, besov, besov-hp, hardy, bmo, or amalgam")
      ->required();
  norm->add_option("--p", st.p_text, "Lebesgue exponent (default 2)");
  norm->add_option("--q", st.q_text, "fine index (default 2)");
  norm->add_option("--s", st.s, "smoothness weight (default 0)");
  norm->add_option("--seq", st.seq_text, "comma-separated sequence (lq only)");
  norm->add_option("--in", st.in_path, "grid-function file");
  norm->add_option("--levels", st.levels, "dyadic levels (besov; default: fit the grid)");
  norm->add_option("--out", st.out_path, "JSON report path");
  norm->callback([&] { action = [&] { return run_norm(st); }; });

  // windows
  CLI::App* windows =
      app.add_subcommand("windows", "partition construction and verification");
  windows->require_subcommand(1);
  CLI::App* wmake = windows->add_subcommand("make", "construct and describe windows");
  CLI::App* wverify = windows->add_subcommand("verify", "run the verification battery");
  for (CLI::App* sub : {wmake, wverify}) {
    sub->add_option("--kind", st.kind,
                    "generic, sharp, sharp-tilde, phi, phi-tilde, or kappa-wiener");
    sub->add_option("--variant", st.variant, "s3 or s4 (uniform kinds)");
    sub->add_option("--levels", st.levels, "dyadic levels (default: fit the grid)");
    sub->add_option("--points", st.points, "grid points per axis");
    sub->add_option("--scale", st.scale, "grid scale T (period 2 pi T)");
    sub->add_option("--out", st.out_path, "JSON report path");
  }
  wverify->add_option("--seed", st.seed, "verification sample seed");
  wmake->callback([&] { action = [&] { return run_windows_make(st); }; });
  wverify->callback([&] { action = [&] { return run_windows_verify(st); }; });

  // op apply
  CLI::App* op = app.add_subcommand("op", "operator application");
  op->require_subcommand(1);
  CLI::App* apply = op->add_subcommand("apply", "apply a symbol to inputs");
  apply->add_option("--symbol", st.symbol_path, "symbol JSON file")->required();
  apply->add_option("--inputs", st.inputs_text, "comma-separated grid-function files")
      ->required();
  apply->add_option("--method", st.method, "direct or expansion (default direct)");
  apply->add_option("--out", st.out_path, "output grid-function file");
  apply->add_option("--mode-radius", st.mode_radius, "Fourier modes per slot axis");
  apply->add_option("--order", st.order, "integration-by-parts order");
  apply->add_option("--quad-points", st.quad_points, "coefficient quadrature points");
  apply->add_option("--bin-threshold", st.bin_threshold, "relative active-bin cutoff");
  apply->add_option("--alias-tolerance", st.alias_tolerance, "output aliasing budget");
  apply->add_option("--cost-budget", st.cost_budget, "symbol-evaluation budget");
  apply->add_flag("--dry-run", st.dry_run, "validate and print the plan only");
  apply->callback([&] { action = [&] { return run_op_apply(st); }; });

  // extremal
  CLI::App* extremal = app.add_subcommand("extremal", "extremal input construction");
  extremal->require_subcommand(1);
  CLI::App* wainger =
      extremal->add_subcommand("wainger", "damped oscillatory lattice sum");
  wainger->add_option("--a", st.a, "oscillation exponent in (0,1)");
  wainger->add_option("--b", st.b, "coefficient decay exponent");
  wainger->add_option("--epsilon", st.epsilon, "damping");
  wainger->add_option("--V-max", st.V_max, "lattice truncation radius");
  wainger->add_option("--p", st.p_text, "target Lebesgue exponent");
  wainger->add_option("--n", st.n, "dimension (1 or 2)");
  wainger->add_option("--points", st.wainger_points, "grid points per axis");
  wainger->add_option("--scale", st.wainger_scale, "grid scale T (positive integer)");
  wainger->add_flag("--modulated", st.modulated,
                    "envelope-box spectrum instead of pointwise spatial factor");
  wainger->add_option("--out", st.out_path, "output grid-function file");
  wainger->add_flag("--dry-run", st.dry_run, "validate and print the plan only");
  wainger->callback([&] { action = [&] { return run_extremal_wainger(st); }; });

  CLI::App* enumerate =
      extremal->add_subcommand("enumerate", "constrained lattice tuple sets");
  CLI::App* sum = extremal->add_subcommand("sum", "weighted sums over a tuple set");
  for (CLI::App* sub : {enumerate, sum}) {
    sub->add_option("--kind", st.kind, "sum-zero or free-sum")->required();
    sub->add_option("--n", st.n, "lattice dimension (1 or 2)");
    sub->add_option("--N", st.N, "operator arity");
    sub->add_option("--ell", st.ell, "primary shell level");
    sub->add_option("--delta", st.delta, "shell half-width exponent");
    sub->add_option("--gap", st.gap, "low-shell offset (-1 = default)");
    sub->add_option("--out", st.out_path, "CSV output path");
    sub->add_flag("--dry-run", st.dry_run, "validate and print the plan only");
  }
  sum->add_option("--m", st.m, "order weight on the tuple magnitude");
  sum->add_option("--b", st.b_list_text, "comma-separated decay exponents");
  sum->add_option("--epsilon", st.sum_epsilon, "damping");
  enumerate->callback([&] { action = [&] { return run_extremal_enumerate(st); }; });
  sum->callback([&] { action = [&] { return run_extremal_sum(st); }; });

  // experiment
  CLI::App* experiment = app.add_subcommand("experiment", "measurement experiments");
  experiment->require_subcommand(1);
  const char* kinds[] = {"sharpness-s", "sharpness-sj",  "keyprop",
                         "band-decay",  "embeddings",    "wainger-contrast"};
  const char* blurbs[] = {
      "growth of the constrained lattice sums against the target smoothness",
      "growth of the per-sum-frequency coefficients against the source smoothness",
      "levelness of the lattice-product ratio against its product bound",
      "x-band decay of localized-symbol coefficients and the band remainder",
      "sequence monotonicity and function-space embedding stability",
      "norm growth contrast across the oscillatory-sum threshold"};
  std::uint64_t seed_flag = 0;
  int jobs_flag = 0;
  for (int i = 0; i < 6; ++i) {
    std::string kind = kinds[i];
    CLI::App* sub = experiment->add_subcommand(kinds[i], blurbs[i]);
    sub->add_option("--config", st.config_path, "experiment config JSON file");
    sub->add_option("--out", st.out_path, "report CSV path (JSON sidecar follows)");
    CLI::Option* seed_opt = sub->add_option("--seed", seed_flag, "master seed override");
    CLI::Option* jobs_opt = sub->add_option("--jobs", jobs_flag, "worker threads override");
    if (kind == "sharpness-s")
      sub->add_option("--mode", st.mode, "combinatorial or pipeline");
    sub->add_flag("--dry-run", st.dry_run,
                  "validate and print the resolved configuration only");
    sub->callback([&, kind, seed_opt, jobs_opt] {
      if (seed_opt->count() > 0) st.seed_override = seed_flag;
      if (jobs_opt->count() > 0) st.jobs_override = jobs_flag;
      action = [&, kind] { return run_experiment(kind, st); };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    return action ? action() : 0;
  } catch (const config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const compute_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace mlpo
