#include "odmr/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "odmr/error.hpp"
#include "odmr/spectrum_io.hpp"

namespace odmr {

std::string_view to_string(Generator g) {
  return g == Generator::ClosedForm ? "closed_form" : "lindblad";
}

Generator generator_from_string(std::string_view name) {
  if (name == "closed_form") return Generator::ClosedForm;
  if (name == "lindblad") return Generator::Lindblad;
  throw Error(ErrorCode::InvalidArgument,
              "unknown generator '" + std::string(name) + "' (closed_form, lindblad)");
}

std::vector<double> GridSpec::values() const { return linear_grid(start, stop, points); }

void SweepConfig::validate() const {
  if (axes.empty() || axes.size() > 2) {
    throw Error(ErrorCode::InvalidArgument, "sweep: need one or two axes");
  }
  for (const auto& axis : axes) {
    if (std::find(kSweepParameters.begin(), kSweepParameters.end(), axis.name) ==
        kSweepParameters.end()) {
      std::string allowed;
      for (auto p : kSweepParameters) allowed += (allowed.empty() ? "" : ", ") + std::string(p);
      throw Error(ErrorCode::InvalidArgument,
                  "sweep: axis '" + axis.name + "' is not sweepable (" + allowed + ")");
    }
    if (axis.values.empty()) {
      throw Error(ErrorCode::InvalidArgument, "sweep: axis '" + axis.name + "' is empty");
    }
    for (double v : axis.values) {
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::InvalidArgument,
                    "sweep: axis '" + axis.name + "' has a non-finite value");
      }
    }
    if (axis.name == "laser_power_mw" && !budget.laser) {
      throw Error(ErrorCode::InvalidArgument,
                  "sweep: laser_power_mw axis needs a budget.laser section");
    }
  }
  if (axes.size() == 2 && axes[0].name == axes[1].name) {
    throw Error(ErrorCode::InvalidArgument, "sweep: both axes vary " + axes[0].name);
  }
  field_mode(env);
  odmr::validate(drive);
  strain.validate();
  budget.validate();
  if (!(decay.gamma_b > 0.0) || !(decay.gamma_d > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "sweep: gamma_b and gamma_d must be > 0");
  }
  if (grid.points < 10 || !(grid.stop > grid.start)) {
    throw Error(ErrorCode::InvalidArgument, "sweep: grid needs >= 10 points and stop > start");
  }
  if (!(dwell_s > 0.0)) throw Error(ErrorCode::InvalidArgument, "sweep: dwell_s must be > 0");
  if (multi_start < 1) throw Error(ErrorCode::InvalidArgument, "sweep: multi_start must be >= 1");
  if (threads < 0) throw Error(ErrorCode::InvalidArgument, "sweep: threads must be >= 0");
}

std::uint64_t point_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void apply_axis(SweepConfig& c, std::string_view name, double value) {
  const double ratio = c.drive.rabi_mw > 0.0 ? c.drive.rabi_mw_y / c.drive.rabi_mw : 0.0;
  if (name == "rabi_rf") {
    c.drive.rabi_rf = value;
  } else if (name == "rabi_mw" || name == "mw_dbm") {
    c.drive.rabi_mw = name == "rabi_mw" ? value : rabi_from_dbm(value, c.mw_rabi_at_0dbm);
    c.drive.rabi_mw_y = ratio * c.drive.rabi_mw;
  } else if (name == "rf_dbm") {
    c.drive.rabi_rf = rabi_from_dbm(value, c.rf_rabi_at_0dbm);
  } else if (name == "laser_power_mw") {
    if (!c.budget.laser) {
      throw Error(ErrorCode::InvalidArgument, "laser_power_mw axis needs a laser model");
    }
    c.budget.laser->power_mw = value;
  } else if (name == "omega_rf") {
    c.drive.omega_rf = value;
  } else if (name == "sigma_ex") {
    c.strain.sigma_ex = value;
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown sweep axis '" + std::string(name) + "'");
  }
}

SweepRow run_point(const SweepConfig& c, std::uint64_t seed) {
  SweepRow row;
  try {
    odmr::validate(c.drive);
    c.strain.validate();
    const OperatingPoint op = operating_point(c.budget, c.decay);
    const std::vector<double> grid = c.grid.values();
    StrainDistribution strain = c.strain;
    strain.mean_ex = c.env.ex;
    const bool averaged = strain.sigma_ex > 0.0 && strain.nodes > 1;

    Spectrum clean;
    if (c.generator == Generator::Lindblad) {
      clean = oracle_spectrum(c.env, c.drive, grid, op.decay, op.alpha, c.oracle,
                              averaged ? &strain : nullptr);
    } else {
      clean = averaged ? ensemble_spectrum(c.env, c.drive, grid, op.decay, op.alpha, strain)
                       : spectrum(c.env, c.drive, grid, op.decay, op.alpha);
    }
    const Spectrum data =
        c.add_noise ? synthesize_measurement(clean, op.photon_rate, c.dwell_s, seed) : clean;

    FitModel model;
    if (field_mode(c.env) == FieldMode::Parallel) {
      model = FitModel::multi_lorentzian(2);
    } else {
      const double ratio = c.drive.rabi_mw > 0.0 ? c.drive.rabi_mw_y / c.drive.rabi_mw : 0.0;
      model = FitModel::dressed_dip(c.drive.omega_rf, c.drive.rabi_mw, ratio, c.fit_sigma_ex);
    }
    const std::vector<double> guess = initial_guess(data, model);
    FitOptions options;
    options.multi_start = c.multi_start;
    options.seed = seed;
    const FitResult result = fit(data, model, guess, options);
    row.residual_rms = result.residual_rms;
    row.d_fit = zero_field_estimate(result).first;
    if (!result.converged) {
      row.reason = "fit did not converge: " + result.message;
      return row;
    }
    NoiseBudget budget;
    budget.photon_rate = op.photon_rate;
    budget.alpha = op.alpha;
    const SensitivityReport rep = slope_sensitivity(result, budget, c.env.dd_dt);
    row.eta_slope = rep.eta_slope;
    row.eta_linewidth = rep.eta_linewidth;
    row.fwhm = rep.fwhm;
    row.contrast = rep.contrast;
    row.ok = true;
    if (!rep.fwhm) row.reason = "no resolved dip";
  } catch (const Error& e) {
    row.ok = false;
    row.reason = std::string(to_string(e.code())) + ": " + e.what();
  }
  return row;
}

SweepTable sweep(const SweepConfig& config) {
  config.validate();
  SweepTable table;
  std::vector<std::vector<double>> points;
  for (const auto& a : config.axes) table.axis_names.push_back(a.name);
  if (config.axes.size() == 1) {
    for (double v : config.axes[0].values) points.push_back({v});
  } else {
    for (double v0 : config.axes[0].values) {
      for (double v1 : config.axes[1].values) points.push_back({v0, v1});
    }
  }

  table.rows.resize(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      SweepConfig c = config;
      SweepRow row;
      try {
        for (std::size_t k = 0; k < points[i].size(); ++k) {
          apply_axis(c, config.axes[k].name, points[i][k]);
        }
        row = run_point(c, point_seed(config.seed, i));
      } catch (const Error& e) {
        row.reason = std::string(to_string(e.code())) + ": " + e.what();
      }
      row.axis_values = points[i];
      table.rows[i] = std::move(row);
    }
  };
  unsigned n = config.threads > 0 ? static_cast<unsigned>(config.threads)
                                  : std::max(1u, std::thread::hardware_concurrency());
  n = std::min<unsigned>(n, static_cast<unsigned>(points.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return table;
}

namespace {

std::string csv_field(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch == '\n' ? ' ' : ch;
  }
  return out + "\"";
}

nlohmann::json json_field(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

std::string sweep_to_csv(const SweepTable& table) {
  std::ostringstream os;
  for (const auto& name : table.axis_names) os << name << ',';
  os << "status,fwhm_mhz,contrast,eta_slope_k_per_rthz,eta_linewidth_k_per_rthz,"
        "residual_rms,d_fit_mhz,reason\n";
  for (const auto& r : table.rows) {
    for (double v : r.axis_values) os << format_double(v) << ',';
    os << (r.ok ? "ok" : "failed") << ',' << csv_field(r.fwhm) << ','
       << csv_field(r.contrast) << ',' << csv_field(r.eta_slope) << ','
       << csv_field(r.eta_linewidth) << ',' << csv_field(r.residual_rms) << ','
       << csv_field(r.d_fit) << ',' << csv_quote(r.reason) << '\n';
  }
  return os.str();
}

nlohmann::json sweep_to_json(const SweepTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : table.rows) {
    nlohmann::json axes = nlohmann::json::object();
    for (std::size_t k = 0; k < table.axis_names.size(); ++k) {
      axes[table.axis_names[k]] = r.axis_values[k];
    }
    rows.push_back({{"axes", axes},
                    {"status", r.ok ? "ok" : "failed"},
                    {"fwhm_mhz", json_field(r.fwhm)},
                    {"contrast", json_field(r.contrast)},
                    {"eta_slope_k_per_rthz", json_field(r.eta_slope)},
                    {"eta_linewidth_k_per_rthz", json_field(r.eta_linewidth)},
                    {"residual_rms", json_field(r.residual_rms)},
                    {"d_fit_mhz", json_field(r.d_fit)},
                    {"reason", r.reason}});
  }
  return {{"schema_version", kSchemaVersion},
          {"kind", "sweep"},
          {"axes", table.axis_names},
          {"rows", rows}};
}

}  // namespace odmr
