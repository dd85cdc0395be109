#pragma once

// Shot-noise-limited temperature sensitivity and temperature readout from
// zero-field-splitting shifts.

#include <functional>
#include <optional>

#include "json.hpp"
#include "odmr/fitting.hpp"
#include "odmr/lineshape.hpp"

namespace odmr {

/// Phenomenological laser dependence. At power P (mW):
///   photon rate R = rate_per_mw * P
///   pump Gamma_p = pump_per_mw * P
///   gamma_b = dephase_b + Gamma_p / 2
///   gamma_d = dephase_d + dark_pump_fraction * Gamma_p / 2
///   contrast alpha_eff = alpha * Gamma_p / (Gamma_p + gamma_sat)
struct LaserModel {
  double power_mw = 0.7;
  double rate_per_mw = 1.0e6;
  double pump_per_mw = 1.0;
  double gamma_sat = 1.0;
  double dephase_b = 0.5;
  double dephase_d = 0.01;
  double dark_pump_fraction = 0.01;

  void validate() const;
};

struct NoiseBudget {
  double photon_rate = 1.0e6;  ///< detected counts/s at baseline
  double alpha = kDefaultContrast;
  std::optional<LaserModel> laser;

  void validate() const;
};

/// Budget and line decay after applying the laser model, if any.
struct OperatingPoint {
  double photon_rate = 0.0;
  double alpha = 0.0;
  LineDecay decay;
};

OperatingPoint operating_point(const NoiseBudget& budget, const LineDecay& decay);

/// Rabi frequency for a drive power in dBm, amplitude scaling as sqrt(power).
double rabi_from_dbm(double dbm, double rabi_at_0dbm);

struct SensitivityReport {
  double eta_slope = 0.0;                ///< K/sqrt(Hz)
  std::optional<double> eta_linewidth;   ///< K/sqrt(Hz), needs fwhm and contrast
  double best_frequency = 0.0;           ///< MHz, max-|slope| point
  double slope = 0.0;                    ///< dS/dnu at best_frequency, 1/MHz
  double signal = 0.0;                   ///< S at best_frequency
  double photon_rate = 0.0;
  double dd_dt = 0.0;
  std::optional<double> fwhm;
  std::optional<double> contrast;
};

/// Max-slope sensitivity of a normalized signal curve on [lo, hi]. `scale`
/// is the narrowest feature width and sets the search resolution.
/// Throws NoSensitivity when the curve is flat.
SensitivityReport slope_sensitivity(const std::function<double(double)>& curve, double lo,
                                    double hi, double scale, double photon_rate,
                                    double dd_dt);

/// Same, on the fitted curve over the fitted span. Fills the linewidth
/// figure from the narrowest resolved dip.
SensitivityReport slope_sensitivity(const FitResult& fit, const NoiseBudget& budget,
                                    double dd_dt);

/// (4 / (3 sqrt 3)) * fwhm / (contrast * sqrt(rate) * |dd_dt|).
double linewidth_sensitivity(double fwhm, double contrast, double photon_rate,
                             double dd_dt);

struct TemperatureEstimate {
  double temperature = 0.0;
  double delta_t = 0.0;
  double sigma = 0.0;
  double d_fit = 0.0;
  double d_calibration = 0.0;
};

/// D of a fit: the D parameter for DressedDip, the mean of the centers for
/// MultiLorentzian, with its variance from the covariance.
std::pair<double, double> zero_field_estimate(const FitResult& fit);

/// T = t0 + (D_fit - D_cal) / dd_dt with independent-fit error propagation.
/// Throws ModelMismatch for different families or peak counts.
TemperatureEstimate estimate_temperature(const FitResult& fit, const FitResult& calibration,
                                         double t0, double dd_dt);

nlohmann::json report_to_json(const SensitivityReport& report);

}  // namespace odmr
