#include "odmr/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "odmr/error.hpp"

namespace odmr {

namespace {

enum class Kind { Section, Number, Integer, Bool, String, Choice, Axes, Any };
enum class Rule { None, Positive, NonNegative, NonZero, OddPositive, AtLeast1, AtLeast10 };

struct Field {
  std::string_view path;
  Kind kind;
  Rule rule = Rule::None;
  std::vector<std::string_view> choices = {};
};

const std::vector<Field>& schema() {
  static const std::vector<Field> fields = {
      {"mode", Kind::Choice, Rule::None, {kRunModes.begin(), kRunModes.end()}},
      {"seed", Kind::Integer, Rule::NonNegative},
      {"environment", Kind::Section},
      {"environment.d0", Kind::Number, Rule::Positive},
      {"environment.t0", Kind::Number, Rule::Positive},
      {"environment.dd_dt", Kind::Number, Rule::NonZero},
      {"environment.ex", Kind::Number},
      {"environment.ey", Kind::Number},
      {"environment.b_transverse", Kind::Number},
      {"environment.b_parallel", Kind::Number},
      {"environment.temperature", Kind::Number, Rule::Positive},
      {"drive", Kind::Section},
      {"drive.omega_mw", Kind::Number},
      {"drive.rabi_mw", Kind::Number, Rule::NonNegative},
      {"drive.rabi_mw_y", Kind::Number, Rule::NonNegative},
      {"drive.omega_rf", Kind::Number, Rule::NonNegative},
      {"drive.rabi_rf", Kind::Number, Rule::NonNegative},
      {"decay", Kind::Section},
      {"decay.gamma_b", Kind::Number, Rule::Positive},
      {"decay.gamma_d", Kind::Number, Rule::Positive},
      {"strain", Kind::Section},
      {"strain.sigma_ex", Kind::Number, Rule::NonNegative},
      {"strain.nodes", Kind::Integer, Rule::OddPositive},
      {"budget", Kind::Section},
      {"budget.photon_rate", Kind::Number, Rule::Positive},
      {"budget.alpha", Kind::Number, Rule::NonNegative},
      {"budget.laser", Kind::Section},
      {"budget.laser.power_mw", Kind::Number, Rule::Positive},
      {"budget.laser.rate_per_mw", Kind::Number, Rule::Positive},
      {"budget.laser.pump_per_mw", Kind::Number, Rule::Positive},
      {"budget.laser.gamma_sat", Kind::Number, Rule::NonNegative},
      {"budget.laser.dephase_b", Kind::Number, Rule::NonNegative},
      {"budget.laser.dephase_d", Kind::Number, Rule::NonNegative},
      {"budget.laser.dark_pump_fraction", Kind::Number, Rule::NonNegative},
      {"grid", Kind::Section},
      {"grid.start", Kind::Number},
      {"grid.stop", Kind::Number},
      {"grid.points", Kind::Integer, Rule::AtLeast10},
      {"noise", Kind::Section},
      {"noise.enabled", Kind::Bool},
      {"noise.dwell_s", Kind::Number, Rule::Positive},
      {"fit", Kind::Section},
      {"fit.input", Kind::String},
      {"fit.family", Kind::Choice, Rule::None, {"dressed_dip", "multi_lorentzian"}},
      {"fit.peaks", Kind::Integer, Rule::AtLeast1},
      {"fit.fit_sigma_ex", Kind::Bool},
      {"fit.multi_start", Kind::Integer, Rule::AtLeast1},
      {"sweep", Kind::Section},
      {"sweep.axes", Kind::Axes},
      {"sweep.generator", Kind::Choice, Rule::None, {"closed_form", "lindblad"}},
      {"sweep.threads", Kind::Integer, Rule::NonNegative},
      {"sweep.mw_rabi_at_0dbm", Kind::Number, Rule::Positive},
      {"sweep.rf_rabi_at_0dbm", Kind::Number, Rule::Positive},
      {"oracle", Kind::Section},
      {"oracle.dephase_driven", Kind::Number, Rule::NonNegative},
      {"oracle.dephase_partner", Kind::Number, Rule::NonNegative},
      {"oracle.tolerance", Kind::Number, Rule::Positive},
      {"sensitivity", Kind::Section},
      {"sensitivity.input", Kind::String},
      {"sensitivity.calibration_input", Kind::String},
      {"sensitivity.calibration_temperature", Kind::Number, Rule::Positive},
      {"output", Kind::String},
      {"notes", Kind::Any},
  };
  return fields;
}

const Field* find_field(std::string_view path) {
  for (const auto& f : schema()) {
    if (f.path == path) return &f;
  }
  return nullptr;
}

std::string join(std::string_view prefix, std::string_view key) {
  return prefix.empty() ? std::string(key) : std::string(prefix) + "." + std::string(key);
}

// Line of the key at `path`, found by locating each component in turn.
// "axes[2]" means the next component is searched for its third occurrence.
int line_of(std::string_view text, std::string_view path) {
  std::size_t pos = 0;
  int skip = 0;
  std::size_t start = 0;
  while (start <= path.size()) {
    std::size_t end = path.find('.', start);
    if (end == std::string_view::npos) end = path.size();
    std::string_view comp = path.substr(start, end - start);
    int index = 0;
    if (const auto br = comp.find('['); br != std::string_view::npos) {
      index = std::atoi(std::string(comp.substr(br + 1)).c_str());
      comp = comp.substr(0, br);
    }
    const std::string needle = "\"" + std::string(comp) + "\"";
    for (int k = 0; k <= skip; ++k) {
      const std::size_t found = text.find(needle, k == 0 ? pos : pos + 1);
      if (found == std::string_view::npos) return 0;
      pos = found;
    }
    skip = index;
    start = end + 1;
  }
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

struct Checker {
  std::string_view text;
  std::vector<Diagnostic> out;

  void add(const std::string& path, const std::string& message) {
    out.push_back({path, path.empty() ? 0 : line_of(text, path), message});
  }

  void unknown(std::string_view prefix, const std::string& key) {
    std::string best;
    std::size_t best_d = std::string::npos;
    for (const auto& f : schema()) {
      const auto dot = f.path.rfind('.');
      const std::string_view parent = dot == std::string_view::npos ? "" : f.path.substr(0, dot);
      if (parent != prefix) continue;
      const std::string_view leaf = dot == std::string_view::npos ? f.path : f.path.substr(dot + 1);
      const std::size_t d = edit_distance(key, leaf);
      if (d < best_d) {
        best_d = d;
        best = std::string(leaf);
      }
    }
    std::string msg = "unknown key '" + key + "'";
    if (!best.empty() && best_d <= std::max<std::size_t>(2, key.size() / 3)) {
      msg += "; did you mean '" + best + "'?";
    }
    add(join(prefix, key), msg);
  }

  void check_rule(const std::string& path, double v, Rule rule) {
    switch (rule) {
      case Rule::None: break;
      case Rule::Positive:
        if (!(v > 0.0)) add(path, "must be > 0 (got " + fmt(v) + ")");
        break;
      case Rule::NonNegative:
        if (!(v >= 0.0)) add(path, "must be >= 0 (got " + fmt(v) + ")");
        break;
      case Rule::NonZero:
        if (v == 0.0) add(path, "must be nonzero");
        break;
      case Rule::OddPositive:
        if (!(v >= 1.0) || std::fmod(v, 2.0) != 1.0) {
          add(path, "must be an odd integer >= 1 (got " + fmt(v) + ")");
        }
        break;
      case Rule::AtLeast1:
        if (!(v >= 1.0)) add(path, "must be >= 1 (got " + fmt(v) + ")");
        break;
      case Rule::AtLeast10:
        if (!(v >= 10.0)) add(path, "must be >= 10 (got " + fmt(v) + ")");
        break;
    }
  }

  static std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
  }

  void check_axes(const std::string& path, const nlohmann::json& v) {
    if (!v.is_array() || v.empty()) {
      add(path, "must be a nonempty array of {name, values}");
      return;
    }
    if (v.size() > 2) add(path, "at most two axes are supported");
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string ap = path + "[" + std::to_string(i) + "]";
      const auto& axis = v[i];
      if (!axis.is_object()) {
        add(ap, "axis must be an object with 'name' and 'values'");
        continue;
      }
      for (const auto& [key, val] : axis.items()) {
        if (key != "name" && key != "values") {
          std::string msg = "unknown key '" + key + "'";
          if (edit_distance(key, "name") <= 2) msg += "; did you mean 'name'?";
          else if (edit_distance(key, "values") <= 2) msg += "; did you mean 'values'?";
          add(ap + "." + key, msg);
        }
      }
      if (!axis.contains("name") || !axis["name"].is_string()) {
        add(ap + ".name", "missing or not a string");
      } else {
        const std::string name = axis["name"].get<std::string>();
        if (std::find(kSweepParameters.begin(), kSweepParameters.end(), name) ==
            kSweepParameters.end()) {
          std::string allowed;
          for (auto p : kSweepParameters) allowed += (allowed.empty() ? "" : ", ") + std::string(p);
          add(ap + ".name", "'" + name + "' is not sweepable (" + allowed + ")");
        }
      }
      if (!axis.contains("values") || !axis["values"].is_array() || axis["values"].empty()) {
        add(ap + ".values", "must be a nonempty array of numbers");
      } else {
        for (const auto& x : axis["values"]) {
          if (!x.is_number() || !std::isfinite(x.get<double>())) {
            add(ap + ".values", "every value must be a finite number");
            break;
          }
        }
      }
    }
  }

  void walk(const nlohmann::json& obj, std::string_view prefix) {
    for (const auto& [key, val] : obj.items()) {
      const std::string path = join(prefix, key);
      const Field* f = find_field(path);
      if (!f) {
        unknown(prefix, key);
        continue;
      }
      switch (f->kind) {
        case Kind::Section:
          if (!val.is_object()) add(path, "must be an object");
          else walk(val, path);
          break;
        case Kind::Number:
          if (!val.is_number()) add(path, "must be a number");
          else if (!std::isfinite(val.get<double>())) add(path, "must be finite");
          else check_rule(path, val.get<double>(), f->rule);
          break;
        case Kind::Integer:
          if (!val.is_number_integer()) add(path, "must be an integer");
          else if (f->rule != Rule::None && val.is_number_unsigned()) {
            check_rule(path, static_cast<double>(val.get<std::uint64_t>()), f->rule);
          } else {
            check_rule(path, static_cast<double>(val.get<std::int64_t>()), f->rule);
          }
          break;
        case Kind::Bool:
          if (!val.is_boolean()) add(path, "must be true or false");
          break;
        case Kind::String:
          if (!val.is_string()) add(path, "must be a string");
          break;
        case Kind::Choice: {
          if (!val.is_string()) {
            add(path, "must be a string");
            break;
          }
          const std::string s = val.get<std::string>();
          if (std::find(f->choices.begin(), f->choices.end(), s) == f->choices.end()) {
            std::string allowed;
            for (auto c : f->choices) allowed += (allowed.empty() ? "" : ", ") + std::string(c);
            add(path, "'" + s + "' is not one of " + allowed);
          }
          break;
        }
        case Kind::Axes:
          check_axes(path, val);
          break;
        case Kind::Any:
          break;
      }
    }
  }
};

double num(const nlohmann::json& doc, const nlohmann::json::json_pointer& ptr, double fallback) {
  return doc.contains(ptr) && doc.at(ptr).is_number() ? doc.at(ptr).get<double>() : fallback;
}

template <typename T>
T get_or(const nlohmann::json& doc, const char* pointer, T fallback) {
  const nlohmann::json::json_pointer ptr(pointer);
  if (!doc.contains(ptr)) return fallback;
  return doc.at(ptr).get<T>();
}

}  // namespace

std::string Diagnostic::to_string() const {
  std::string out;
  if (line > 0) out += "line " + std::to_string(line) + ": ";
  if (!path.empty()) out += path + ": ";
  return out + message;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

nlohmann::json parse_config_text(std::string_view text) {
  try {
    auto doc = nlohmann::json::parse(text, nullptr, true, true);
    if (!doc.is_object()) {
      throw Error(ErrorCode::Config, "config: top level must be an object");
    }
    return doc;
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t byte = std::min(e.byte, text.size());
    const int line =
        1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
    throw Error(ErrorCode::Config, "config: line " + std::to_string(line) +
                                       ": syntax error: " + e.what());
  }
}

void apply_override(nlohmann::json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw Error(ErrorCode::Config,
                "override '" + std::string(assignment) + "' is not of the form key=value");
  }
  const std::string path(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  nlohmann::json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) {
      throw Error(ErrorCode::Config, "override '" + path + "' has an empty path component");
    }
    if (!node->is_object()) {
      throw Error(ErrorCode::Config, "override '" + path + "': '" + key +
                                         "' is inside a non-object value");
    }
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    if (node->is_null()) *node = nlohmann::json::object();
    start = dot + 1;
  }
}

std::vector<Diagnostic> validate_config(const nlohmann::json& doc, std::string_view text,
                                        std::string_view mode_override) {
  Checker c{text, {}};
  if (!doc.is_object()) {
    c.add("", "top level must be an object");
    return c.out;
  }
  c.walk(doc, "");
  // cross-field rules, evaluated only on well-typed values
  const auto jp = [](const char* p) { return nlohmann::json::json_pointer(p); };
  const double bt = num(doc, jp("/environment/b_transverse"), 0.0);
  const double bp = num(doc, jp("/environment/b_parallel"), 0.0);
  if (bt != 0.0 && bp != 0.0) {
    c.add("environment.b_parallel",
          "b_transverse and b_parallel are mutually exclusive; set one to 0");
  }
  const double start = num(doc, jp("/grid/start"), 2866.0);
  const double stop = num(doc, jp("/grid/stop"), 2905.0);
  if (!(stop > start)) c.add("grid.stop", "must be greater than grid.start");

  std::string mode(mode_override);
  if (mode.empty() && doc.contains("mode") && doc["mode"].is_string()) {
    mode = doc["mode"].get<std::string>();
  }
  auto require_file = [&](const char* pointer, const std::string& path, bool required) {
    const auto ptr = jp(pointer);
    if (!doc.contains(ptr) || !doc.at(ptr).is_string() || doc.at(ptr).get<std::string>().empty()) {
      if (required) c.add(path, "required for mode '" + mode + "'");
      return;
    }
    const std::string file = doc.at(ptr).get<std::string>();
    std::error_code ec;
    if (!std::filesystem::is_regular_file(file, ec)) {
      c.add(path, "file '" + file + "' does not exist");
    }
  };
  const bool lorentz = doc.contains(jp("/fit/family")) && doc.at(jp("/fit/family")).is_string() &&
                       doc.at(jp("/fit/family")).get<std::string>() == "multi_lorentzian";
  const bool dressed_fit = bp == 0.0 && !lorentz;
  const bool needs_fit = mode == "fit" || mode == "sensitivity" || mode == "sweep";
  if (needs_fit && dressed_fit && !(num(doc, jp("/drive/rabi_mw"), 0.0) > 0.0) && mode != "sweep") {
    c.add("drive.rabi_mw", "must be > 0: the dressed fit needs the applied MW Rabi frequency");
  }
  if (mode == "fit") require_file("/fit/input", "fit.input", true);
  if (mode == "sensitivity") {
    require_file("/sensitivity/input", "sensitivity.input", false);
    require_file("/sensitivity/calibration_input", "sensitivity.calibration_input", false);
  }
  if (mode == "sweep") {
    if (!doc.contains(jp("/sweep/axes"))) c.add("sweep.axes", "required for mode 'sweep'");
    bool laser_axis = false;
    if (doc.contains(jp("/sweep/axes")) && doc.at(jp("/sweep/axes")).is_array()) {
      for (const auto& a : doc.at(jp("/sweep/axes"))) {
        if (a.is_object() && a.contains("name") && a["name"] == "laser_power_mw") laser_axis = true;
      }
    }
    if (laser_axis && !doc.contains(jp("/budget/laser"))) {
      c.add("budget.laser", "required when sweeping laser_power_mw");
    }
  }
  if (mode == "oracle-check" && bp != 0.0) {
    c.add("environment.b_parallel", "oracle-check needs transverse or zero field");
  }
  return c.out;
}

RunConfig build_config(const nlohmann::json& doc, std::string_view mode) {
  RunConfig r;
  r.mode = mode.empty() ? get_or<std::string>(doc, "/mode", "simulate") : std::string(mode);
  r.seed = get_or<std::uint64_t>(doc, "/seed", 0);

  auto& e = r.environment;
  e.d0 = get_or(doc, "/environment/d0", e.d0);
  e.t0 = get_or(doc, "/environment/t0", e.t0);
  e.dd_dt = get_or(doc, "/environment/dd_dt", e.dd_dt);
  e.ex = get_or(doc, "/environment/ex", e.ex);
  e.ey = get_or(doc, "/environment/ey", e.ey);
  e.b_transverse = get_or(doc, "/environment/b_transverse", e.b_transverse);
  e.b_parallel = get_or(doc, "/environment/b_parallel", e.b_parallel);
  e.temperature = get_or(doc, "/environment/temperature", e.t0);

  auto& d = r.drive;
  d.omega_mw = get_or(doc, "/drive/omega_mw", d.omega_mw);
  d.rabi_mw = get_or(doc, "/drive/rabi_mw", d.rabi_mw);
  d.rabi_mw_y = get_or(doc, "/drive/rabi_mw_y", d.rabi_mw_y);
  d.omega_rf = get_or(doc, "/drive/omega_rf", d.omega_rf);
  d.rabi_rf = get_or(doc, "/drive/rabi_rf", d.rabi_rf);

  r.decay.gamma_b = get_or(doc, "/decay/gamma_b", r.decay.gamma_b);
  r.decay.gamma_d = get_or(doc, "/decay/gamma_d", r.decay.gamma_d);

  r.strain.mean_ex = e.ex;
  r.strain.sigma_ex = get_or(doc, "/strain/sigma_ex", r.strain.sigma_ex);
  r.strain.nodes = get_or(doc, "/strain/nodes", r.strain.nodes);

  r.budget.photon_rate = get_or(doc, "/budget/photon_rate", r.budget.photon_rate);
  r.budget.alpha = get_or(doc, "/budget/alpha", r.budget.alpha);
  if (doc.contains(nlohmann::json::json_pointer("/budget/laser"))) {
    LaserModel l;
    l.power_mw = get_or(doc, "/budget/laser/power_mw", l.power_mw);
    l.rate_per_mw = get_or(doc, "/budget/laser/rate_per_mw", l.rate_per_mw);
    l.pump_per_mw = get_or(doc, "/budget/laser/pump_per_mw", l.pump_per_mw);
    l.gamma_sat = get_or(doc, "/budget/laser/gamma_sat", l.gamma_sat);
    l.dephase_b = get_or(doc, "/budget/laser/dephase_b", l.dephase_b);
    l.dephase_d = get_or(doc, "/budget/laser/dephase_d", l.dephase_d);
    l.dark_pump_fraction = get_or(doc, "/budget/laser/dark_pump_fraction", l.dark_pump_fraction);
    r.budget.laser = l;
  }

  r.grid.start = get_or(doc, "/grid/start", r.grid.start);
  r.grid.stop = get_or(doc, "/grid/stop", r.grid.stop);
  r.grid.points = get_or<std::size_t>(doc, "/grid/points", r.grid.points);

  r.noise_enabled = get_or(doc, "/noise/enabled", r.noise_enabled);
  r.dwell_s = get_or(doc, "/noise/dwell_s", r.dwell_s);

  r.fit.input = get_or<std::string>(doc, "/fit/input", "");
  r.fit.family = get_or<std::string>(doc, "/fit/family",
                                     e.b_parallel != 0.0 ? "multi_lorentzian" : "dressed_dip") ==
                         "multi_lorentzian"
                     ? FitFamily::MultiLorentzian
                     : FitFamily::DressedDip;
  r.fit.peaks = get_or(doc, "/fit/peaks", r.fit.peaks);
  r.fit.fit_sigma_ex = get_or(doc, "/fit/fit_sigma_ex", r.fit.fit_sigma_ex);
  r.fit.multi_start = get_or(doc, "/fit/multi_start", r.fit.multi_start);

  if (doc.contains(nlohmann::json::json_pointer("/sweep/axes"))) {
    for (const auto& a : doc.at(nlohmann::json::json_pointer("/sweep/axes"))) {
      r.sweep.axes.push_back({a.at("name").get<std::string>(), a.at("values").get<std::vector<double>>()});
    }
  }
  r.sweep.generator = generator_from_string(get_or<std::string>(doc, "/sweep/generator", "closed_form"));
  r.sweep.threads = get_or(doc, "/sweep/threads", r.sweep.threads);
  r.sweep.mw_rabi_at_0dbm = get_or(doc, "/sweep/mw_rabi_at_0dbm", r.sweep.mw_rabi_at_0dbm);
  r.sweep.rf_rabi_at_0dbm = get_or(doc, "/sweep/rf_rabi_at_0dbm", r.sweep.rf_rabi_at_0dbm);

  r.oracle.dephase_driven = get_or(doc, "/oracle/dephase_driven", r.oracle.dephase_driven);
  r.oracle.dephase_partner = get_or(doc, "/oracle/dephase_partner", r.oracle.dephase_partner);
  r.oracle.tolerance = get_or(doc, "/oracle/tolerance", r.oracle.tolerance);

  r.sensitivity.input = get_or<std::string>(doc, "/sensitivity/input", "");
  r.sensitivity.calibration_input = get_or<std::string>(doc, "/sensitivity/calibration_input", "");
  r.sensitivity.calibration_temperature =
      get_or(doc, "/sensitivity/calibration_temperature", r.sensitivity.calibration_temperature);

  r.output = get_or<std::string>(doc, "/output", "");
  r.notes = doc.contains("notes") ? doc["notes"] : nlohmann::json(nullptr);
  return r;
}

RunConfig load_config(std::string_view text, const std::vector<std::string>& overrides,
                      std::string_view mode) {
  nlohmann::json doc = parse_config_text(text);
  for (const auto& o : overrides) apply_override(doc, o);
  const auto diags = validate_config(doc, text, mode);
  if (!diags.empty()) {
    std::string msg = "invalid config (" + std::to_string(diags.size()) + " problem" +
                      (diags.size() == 1 ? "" : "s") + ")";
    for (const auto& dg : diags) msg += "; " + dg.to_string();
    throw Error(ErrorCode::Config, msg);
  }
  return build_config(doc, mode);
}

SweepConfig RunConfig::sweep_config() const {
  SweepConfig c;
  c.axes = sweep.axes;
  c.env = environment;
  c.drive = drive;
  c.decay = decay;
  c.strain = strain;
  c.budget = budget;
  c.grid = grid;
  c.generator = sweep.generator;
  c.oracle = {oracle.dephase_driven, oracle.dephase_partner};
  c.add_noise = noise_enabled;
  c.dwell_s = dwell_s;
  c.fit_sigma_ex = fit.fit_sigma_ex;
  c.multi_start = fit.multi_start;
  c.mw_rabi_at_0dbm = sweep.mw_rabi_at_0dbm;
  c.rf_rabi_at_0dbm = sweep.rf_rabi_at_0dbm;
  c.seed = seed;
  c.threads = sweep.threads;
  return c;
}

FitModel RunConfig::fit_model() const {
  if (fit.family == FitFamily::MultiLorentzian) return FitModel::multi_lorentzian(fit.peaks);
  const double ratio = drive.rabi_mw > 0.0 ? drive.rabi_mw_y / drive.rabi_mw : 0.0;
  FitModel m = FitModel::dressed_dip(drive.omega_rf, drive.rabi_mw, ratio, fit.fit_sigma_ex);
  m.strain_nodes = strain.nodes;
  return m;
}

}  // namespace odmr
