// odmr: simulate, fit and score CW-ODMR spectra from a JSON run config.
//
//   odmr simulate --config presets/fig2_dressed.json --out spectrum.csv
//   odmr fit --config presets/fig2_dressed.json --input spectrum.csv --out fit.json
//   odmr validate --config my_run.json
//
// Exit status: 0 success, 1 runtime failure, 2 bad usage or config. Failures
// print one line "error: <code>: <message>" to stderr.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "odmr/config.hpp"
#include "odmr/error.hpp"
#include "odmr/oracle.hpp"
#include "odmr/spectrum_io.hpp"

namespace fs = std::filesystem;
using namespace odmr;

namespace {

struct Args {
  std::string config;
  std::string out;
  std::string input;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::vector<std::string> overrides;
};

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

Spectrum load_spectrum(const std::string& path) {
  if (ends_with(path, ".json")) {
    return spectrum_from_json(nlohmann::json::parse(read_text_file(path)));
  }
  return load_spectrum_csv(path);
}

void save_spectrum(const Spectrum& s, const std::string& path) {
  if (ends_with(path, ".json")) write_text_file(path, dump(spectrum_to_json(s)));
  else save_spectrum_csv(s, path);
}

std::string pick_out(const Args& a, const RunConfig& c, const char* fallback) {
  if (!a.out.empty()) return a.out;
  if (!c.output.empty()) return c.output;
  return fallback;
}

std::string g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

RunConfig load(const Args& a, const std::string& mode) {
  std::vector<std::string> overrides = a.overrides;
  if (!a.input.empty()) {
    overrides.push_back((mode == "fit" ? "fit.input=" : "sensitivity.input=") +
                        nlohmann::json(a.input).dump());
  }
  RunConfig c = load_config(read_text_file(a.config), overrides, mode);
  if (a.seed_set) c.seed = a.seed;
  for (const auto& w : regime_warnings(c.environment)) std::cerr << "warning: " << w << "\n";
  return c;
}

Spectrum simulate_spectrum(const RunConfig& c) {
  const OperatingPoint op = operating_point(c.budget, c.decay);
  const std::vector<double> grid = c.grid.values();
  StrainDistribution strain = c.strain;
  strain.mean_ex = c.environment.ex;
  Spectrum s = strain.sigma_ex > 0.0 && strain.nodes > 1
                   ? ensemble_spectrum(c.environment, c.drive, grid, op.decay, op.alpha, strain)
                   : spectrum(c.environment, c.drive, grid, op.decay, op.alpha);
  if (c.noise_enabled) s = synthesize_measurement(s, op.photon_rate, c.dwell_s, c.seed);
  if (!c.notes.is_null()) s.metadata["notes"] = c.notes;
  return s;
}

FitResult fit_spectrum(const Spectrum& s, const RunConfig& c) {
  const FitModel model = c.fit_model();
  FitOptions options;
  options.multi_start = c.fit.multi_start;
  options.seed = c.seed;
  return fit(s, model, initial_guess(s, model), options);
}

std::string fwhm_summary(const FitResult& r) {
  std::string out;
  for (const auto& d : r.dips) {
    if (!out.empty()) out += ",";
    out += d.fwhm ? g(*d.fwhm) : "unresolved";
  }
  return out.empty() ? "none" : out;
}

int run_simulate(const Args& a) {
  const RunConfig c = load(a, "simulate");
  const Spectrum s = simulate_spectrum(c);
  const std::string out = pick_out(a, c, "spectrum.csv");
  save_spectrum(s, out);
  const double lo = *std::min_element(s.signal.begin(), s.signal.end());
  std::cout << "simulate: points=" << s.size() << " min_signal=" << g(lo) << " out=" << out << "\n";
  return 0;
}

int run_fit(const Args& a) {
  const RunConfig c = load(a, "fit");
  const Spectrum s = load_spectrum(c.fit.input);
  const FitResult r = fit_spectrum(s, c);
  const std::string out = pick_out(a, c, "fit.json");
  write_text_file(out, dump(fit_result_to_json(r)));
  std::cout << "fit: converged=" << (r.converged ? "true" : "false")
            << " D=" << g(zero_field_estimate(r).first) << " fwhm=" << fwhm_summary(r)
            << " rms=" << g(r.residual_rms) << " out=" << out << "\n";
  return r.converged ? 0 : 1;
}

int run_sensitivity(const Args& a) {
  const RunConfig c = load(a, "sensitivity");
  const Spectrum s = c.sensitivity.input.empty() ? simulate_spectrum(c)
                                                 : load_spectrum(c.sensitivity.input);
  const FitResult r = fit_spectrum(s, c);
  if (!r.converged) throw Error(ErrorCode::FitFailure, "fit did not converge: " + r.message);
  const OperatingPoint op = operating_point(c.budget, c.decay);
  NoiseBudget budget;
  budget.photon_rate = op.photon_rate;
  budget.alpha = op.alpha;
  const SensitivityReport rep = slope_sensitivity(r, budget, c.environment.dd_dt);
  nlohmann::json doc = report_to_json(rep);
  doc["fit"] = fit_result_to_json(r);
  std::string summary = "sensitivity: eta_slope=" + g(rep.eta_slope) + " K/rtHz";
  summary += " eta_linewidth=" + (rep.eta_linewidth ? g(*rep.eta_linewidth) + " K/rtHz" : "n/a");
  summary += " fwhm=" + (rep.fwhm ? g(*rep.fwhm) : "n/a");
  if (!c.sensitivity.calibration_input.empty()) {
    const FitResult cal = fit_spectrum(load_spectrum(c.sensitivity.calibration_input), c);
    const TemperatureEstimate t =
        estimate_temperature(r, cal, c.sensitivity.calibration_temperature, c.environment.dd_dt);
    doc["temperature"] = {{"temperature_k", t.temperature},
                          {"delta_t_k", t.delta_t},
                          {"sigma_k", t.sigma},
                          {"d_fit_mhz", t.d_fit},
                          {"d_calibration_mhz", t.d_calibration}};
    summary += " T=" + g(t.temperature) + "+-" + g(t.sigma) + " K";
  }
  const std::string out = pick_out(a, c, "sensitivity.json");
  write_text_file(out, dump(doc));
  std::cout << summary << " out=" << out << "\n";
  return 0;
}

int run_sweep(const Args& a) {
  const RunConfig c = load(a, "sweep");
  const SweepTable t = sweep(c.sweep_config());
  const std::string out = pick_out(a, c, "sweep.csv");
  if (ends_with(out, ".json")) write_text_file(out, dump(sweep_to_json(t)));
  else write_text_file(out, sweep_to_csv(t));
  std::size_t ok = 0;
  const SweepRow* best = nullptr;
  for (const auto& r : t.rows) {
    if (!r.ok) continue;
    ++ok;
    if (r.eta_slope && (!best || *r.eta_slope < *best->eta_slope)) best = &r;
  }
  std::cout << "sweep: rows=" << t.rows.size() << " ok=" << ok;
  if (best) {
    std::cout << " best_eta_slope=" << g(*best->eta_slope) << " K/rtHz at";
    for (std::size_t k = 0; k < t.axis_names.size(); ++k) {
      std::cout << " " << t.axis_names[k] << "=" << g(best->axis_values[k]);
    }
  }
  std::cout << " out=" << out << "\n";
  return 0;
}

int run_oracle_check(const Args& a) {
  const RunConfig c = load(a, "oracle-check");
  const OperatingPoint op = operating_point(c.budget, c.decay);
  const std::vector<double> grid = c.grid.values();
  StrainDistribution strain = c.strain;
  strain.mean_ex = c.environment.ex;
  const bool averaged = strain.sigma_ex > 0.0 && strain.nodes > 1;
  const Spectrum closed =
      averaged ? ensemble_spectrum(c.environment, c.drive, grid, op.decay, op.alpha, strain)
               : spectrum(c.environment, c.drive, grid, op.decay, op.alpha);
  const Spectrum oracle = oracle_spectrum(c.environment, c.drive, grid, op.decay, op.alpha,
                                          {c.oracle.dephase_driven, c.oracle.dephase_partner},
                                          averaged ? &strain : nullptr);
  double num = 0.0, den = 0.0, max_abs = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = 1.0 - closed.signal[i], y = 1.0 - oracle.signal[i];
    num += (x - y) * (x - y);
    den += y * y;
    max_abs = std::max(max_abs, std::abs(x - y));
    peak = std::max(peak, std::abs(y));
  }
  if (!(den > 0.0)) throw Error(ErrorCode::Numerical, "oracle-check: oracle spectrum is flat");
  const double rel_rms = std::sqrt(num / den);
  const double max_rel = max_abs / peak;
  const bool pass = rel_rms <= c.oracle.tolerance;
  const nlohmann::json doc = {{"schema_version", kSchemaVersion},
                              {"kind", "oracle_check"},
                              {"points", grid.size()},
                              {"relative_rms", rel_rms},
                              {"max_relative_deviation", max_rel},
                              {"tolerance", c.oracle.tolerance},
                              {"pass", pass}};
  const std::string out = pick_out(a, c, "oracle_check.json");
  write_text_file(out, dump(doc));
  std::cout << "oracle-check: relative_rms=" << g(rel_rms) << " max_relative_deviation="
            << g(max_rel) << " tolerance=" << g(c.oracle.tolerance)
            << (pass ? " pass" : " FAIL") << " out=" << out << "\n";
  if (!pass) {
    throw Error(ErrorCode::Numerical, "oracle-check: relative RMS " + g(rel_rms) +
                                          " exceeds tolerance " + g(c.oracle.tolerance));
  }
  return 0;
}

int run_validate(const Args& a) {
  const std::string text = read_text_file(a.config);
  nlohmann::json doc = parse_config_text(text);
  for (const auto& o : a.overrides) apply_override(doc, o);
  const auto diags = validate_config(doc, text);
  for (const auto& d : diags) std::cout << a.config << ": " << d.to_string() << "\n";
  if (diags.empty()) {
    std::cout << "validate: " << a.config << " ok\n";
    return 0;
  }
  std::cout << "validate: " << diags.size() << " problem" << (diags.size() == 1 ? "" : "s")
            << "\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CW-ODMR simulation and analysis with RF-dressed NV states"};
  app.require_subcommand(1);
  Args args;

  struct Command {
    const char* name;
    const char* help;
    int (*run)(const Args&);
  };
  const Command commands[] = {
      {"simulate", "synthesize a spectrum", run_simulate},
      {"fit", "fit a spectrum file", run_fit},
      {"sensitivity", "fit and compute temperature sensitivity", run_sensitivity},
      {"sweep", "sweep drive or laser parameters", run_sweep},
      {"oracle-check", "compare the closed form with the Lindblad steady state", run_oracle_check},
      {"validate", "check a config without running it", run_validate},
  };
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const auto& cmd : commands) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->add_option("--config", args.config, "run config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--set", args.overrides, "dotted-path override key=value")->take_all();
    if (std::string_view(cmd.name) != "validate") {
      sub->add_option("--out", args.out, "output path (.csv or .json)");
      sub->add_option("--seed", args.seed, "master seed")->each([&](const std::string&) {
        args.seed_set = true;
      });
    }
    if (std::string_view(cmd.name) == "fit" || std::string_view(cmd.name) == "sensitivity") {
      sub->add_option("--input", args.input, "spectrum file (.csv or .json)");
    }
    subs.emplace_back(sub, &cmd);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  for (const auto& [sub, cmd] : subs) {
    if (!sub->parsed()) continue;
    try {
      return cmd->run(args);
    } catch (const Error& e) {
      std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
      return e.code() == ErrorCode::Config ? 2 : 1;
    } catch (const std::exception& e) {
      std::cerr << "error: internal: " << e.what() << "\n";
      return 1;
    }
  }
  return 2;
}
