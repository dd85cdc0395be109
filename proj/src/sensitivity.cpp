#include "odmr/sensitivity.hpp"

#include <algorithm>
#include <cmath>

#include "odmr/error.hpp"
#include "odmr/spectrum_io.hpp"

namespace odmr {

void LaserModel::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::InvalidArgument, std::string("laser.") + name + " must be > 0");
    }
  };
  auto nonneg = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::InvalidArgument, std::string("laser.") + name + " must be >= 0");
    }
  };
  positive(power_mw, "power_mw");
  positive(rate_per_mw, "rate_per_mw");
  positive(pump_per_mw, "pump_per_mw");
  nonneg(gamma_sat, "gamma_sat");
  nonneg(dephase_b, "dephase_b");
  nonneg(dephase_d, "dephase_d");
  nonneg(dark_pump_fraction, "dark_pump_fraction");
  if (dephase_d == 0.0 && dark_pump_fraction == 0.0) {
    throw Error(ErrorCode::InvalidArgument,
                "laser: dephase_d and dark_pump_fraction cannot both be 0");
  }
}

void NoiseBudget::validate() const {
  if (!(photon_rate > 0.0) || !std::isfinite(photon_rate)) {
    throw Error(ErrorCode::InvalidArgument, "budget.photon_rate must be > 0");
  }
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw Error(ErrorCode::InvalidArgument, "budget.alpha must be >= 0");
  }
  if (laser) laser->validate();
}

OperatingPoint operating_point(const NoiseBudget& budget, const LineDecay& decay) {
  budget.validate();
  OperatingPoint op{budget.photon_rate, budget.alpha, decay};
  if (!budget.laser) return op;
  const LaserModel& l = *budget.laser;
  const double pump = l.pump_per_mw * l.power_mw;
  op.photon_rate = l.rate_per_mw * l.power_mw;
  op.decay.gamma_b = l.dephase_b + 0.5 * pump;
  op.decay.gamma_d = l.dephase_d + l.dark_pump_fraction * 0.5 * pump;
  op.alpha = budget.alpha * pump / (pump + l.gamma_sat);
  return op;
}

double rabi_from_dbm(double dbm, double rabi_at_0dbm) {
  return rabi_at_0dbm * std::pow(10.0, dbm / 20.0);
}

namespace {

double derivative(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace

SensitivityReport slope_sensitivity(const std::function<double(double)>& curve, double lo,
                                    double hi, double scale, double photon_rate,
                                    double dd_dt) {
  if (!(hi > lo) || !(scale > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "slope_sensitivity: need hi > lo and scale > 0");
  }
  if (!(photon_rate > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "slope_sensitivity: photon_rate must be > 0");
  }
  if (dd_dt == 0.0 || !std::isfinite(dd_dt)) {
    throw Error(ErrorCode::InvalidArgument, "slope_sensitivity: dd_dt must be nonzero");
  }
  const double h = 1e-3 * scale;
  const auto n = static_cast<std::size_t>(
      std::clamp((hi - lo) / (scale / 20.0), 2000.0, 400000.0));
  const double step = (hi - lo) / static_cast<double>(n);
  double best_x = lo, best_slope = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double x = std::clamp(lo + step * static_cast<double>(i), lo + h, hi - h);
    const double s = std::abs(derivative(curve, x, h));
    if (s > best_slope) {
      best_slope = s;
      best_x = x;
    }
  }
  // golden-section polish of |S'| around the grid maximum
  double a = std::max(lo + h, best_x - step), b = std::min(hi - h, best_x + step);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  auto neg = [&](double x) { return -std::abs(derivative(curve, x, h)); };
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = neg(c), fd = neg(d);
  for (int it = 0; it < 80; ++it) {
    if (fc < fd) {
      b = d; d = c; fd = fc;
      c = b - g * (b - a); fc = neg(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + g * (b - a); fd = neg(d);
    }
  }
  const double xr = 0.5 * (a + b);
  if (-neg(xr) > best_slope) best_x = xr;

  SensitivityReport r;
  r.best_frequency = best_x;
  r.slope = derivative(curve, best_x, h);
  r.signal = curve(best_x);
  r.photon_rate = photon_rate;
  r.dd_dt = dd_dt;
  const double tiny = 1e-12;
  if (!(std::abs(r.slope) > tiny) || !std::isfinite(r.slope)) {
    throw Error(ErrorCode::NoSensitivity, "no spectral sensitivity: curve is flat");
  }
  r.eta_slope = std::sqrt(std::max(r.signal, 0.0) / photon_rate) /
                (std::abs(r.slope) * std::abs(dd_dt));
  return r;
}

SensitivityReport slope_sensitivity(const FitResult& fit, const NoiseBudget& budget,
                                    double dd_dt) {
  if (!fit.converged) {
    throw Error(ErrorCode::FitFailure, "slope_sensitivity: fit did not converge");
  }
  const double rate = operating_point(budget, {}).photon_rate;
  const std::span<const double> p(fit.params.data(), static_cast<std::size_t>(fit.params.size()));
  const double baseline =
      fit.model.family == FitFamily::MultiLorentzian ? fit.params(0) : 1.0;
  const auto curve = [&](double nu) { return fit.model.evaluate(p, nu) / baseline; };
  // features narrower than the sampling were never observed
  const double spacing =
      (fit.span_hi - fit.span_lo) / static_cast<double>(std::max<std::size_t>(fit.points, 2) - 1);
  const double scale = std::max(fit.model.feature_scale(p), spacing);
  SensitivityReport r = slope_sensitivity(curve, fit.span_lo, fit.span_hi, scale, rate, dd_dt);
  const DipWidth* narrow = nullptr;
  for (const auto& dip : fit.dips) {
    if (dip.fwhm && dip.contrast > 0.0 && (!narrow || *dip.fwhm < *narrow->fwhm)) narrow = &dip;
  }
  if (narrow) {
    r.fwhm = *narrow->fwhm;
    r.contrast = narrow->contrast;
    r.eta_linewidth = linewidth_sensitivity(*r.fwhm, *r.contrast, rate, dd_dt);
  }
  return r;
}

double linewidth_sensitivity(double fwhm, double contrast, double photon_rate,
                             double dd_dt) {
  if (!(fwhm > 0.0) || !(contrast > 0.0) || !(photon_rate > 0.0) || dd_dt == 0.0) {
    throw Error(ErrorCode::InvalidArgument,
                "linewidth_sensitivity: fwhm, contrast, rate must be > 0 and dd_dt != 0");
  }
  const double k = 4.0 / (3.0 * std::sqrt(3.0));
  return k * fwhm / (contrast * std::sqrt(photon_rate) * std::abs(dd_dt));
}

std::pair<double, double> zero_field_estimate(const FitResult& fit) {
  if (fit.model.family == FitFamily::DressedDip) {
    const std::size_t i = fit.index_of("D");
    const auto k = static_cast<Eigen::Index>(i);
    return {fit.params(k), std::max(fit.covariance(k, k), 0.0)};
  }
  const int n = fit.model.peaks;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(fit.params.size());
  for (int k = 0; k < n; ++k) w(1 + 3 * k) = 1.0 / n;
  return {w.dot(fit.params), std::max(w.dot(fit.covariance * w), 0.0)};
}

TemperatureEstimate estimate_temperature(const FitResult& fit, const FitResult& calibration,
                                         double t0, double dd_dt) {
  if (fit.model.family != calibration.model.family ||
      (fit.model.family == FitFamily::MultiLorentzian &&
       fit.model.peaks != calibration.model.peaks)) {
    throw Error(ErrorCode::ModelMismatch,
                "estimate_temperature: fit and calibration use different models");
  }
  if (!fit.converged || !calibration.converged) {
    throw Error(ErrorCode::FitFailure, "estimate_temperature: both fits must converge");
  }
  if (dd_dt == 0.0) {
    throw Error(ErrorCode::InvalidArgument, "estimate_temperature: dd_dt must be nonzero");
  }
  const auto [d_fit, var_fit] = zero_field_estimate(fit);
  const auto [d_cal, var_cal] = zero_field_estimate(calibration);
  TemperatureEstimate t;
  t.d_fit = d_fit;
  t.d_calibration = d_cal;
  t.delta_t = (d_fit - d_cal) / dd_dt;
  t.temperature = t0 + t.delta_t;
  t.sigma = std::sqrt(var_fit + var_cal) / std::abs(dd_dt);
  return t;
}

nlohmann::json report_to_json(const SensitivityReport& r) {
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  return {{"schema_version", kSchemaVersion},
          {"kind", "sensitivity"},
          {"eta_slope_k_per_rthz", r.eta_slope},
          {"eta_linewidth_k_per_rthz", opt(r.eta_linewidth)},
          {"best_frequency_mhz", r.best_frequency},
          {"slope_per_mhz", r.slope},
          {"signal_at_best", r.signal},
          {"photon_rate", r.photon_rate},
          {"dd_dt", r.dd_dt},
          {"fwhm_mhz", opt(r.fwhm)},
          {"contrast", opt(r.contrast)}};
}

}  // namespace odmr
