#pragma once

// Weighted nonlinear least-squares fits of ODMR spectra to a sum of
// Lorentzian dips or to the RF-dressed closed-form model, plus linewidth and
// contrast extraction.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "odmr/least_squares.hpp"
#include "odmr/lineshape.hpp"

namespace odmr {

enum class FitFamily { MultiLorentzian, DressedDip };

std::string_view to_string(FitFamily family);

/// Model family and its known (non-fitted) settings.
///
/// MultiLorentzian layout: baseline, then (center, width, depth) per peak,
///   signal = baseline * (1 - sum depth_k L_k).
/// DressedDip layout: D, ex, rabi_rf, rabi_mw, gamma_b, gamma_d, alpha
///   [, sigma_ex]. rabi_mw is fixed by default: the depth only constrains
///   alpha * rabi_mw^2.
struct FitModel {
  FitFamily family = FitFamily::MultiLorentzian;
  int peaks = 1;
  double omega_rf = 0.0;
  double mw_y_ratio = 0.0;  ///< rabi_mw_y / rabi_mw
  double rabi_mw = 0.0;     ///< known drive, used by initial_guess
  bool fit_sigma_ex = false;
  int strain_nodes = 21;
  std::vector<bool> fixed;  ///< per parameter; empty selects the defaults

  static FitModel multi_lorentzian(int peaks);
  static FitModel dressed_dip(double omega_rf, double rabi_mw, double mw_y_ratio,
                              bool fit_sigma_ex = false);

  std::size_t parameter_count() const;
  std::vector<std::string> parameter_names() const;
  bool is_positive(std::size_t index) const;
  bool is_location(std::size_t index) const;
  bool is_fixed(std::size_t index) const;
  /// Number of dips the model produces when resolved.
  int expected_dips() const;

  double evaluate(std::span<const double> params, double nu) const;
  /// Narrowest spectral feature implied by params (MHz), for curve sampling.
  double feature_scale(std::span<const double> params) const;
  /// Nominal dip positions implied by params, ascending.
  std::vector<double> dip_positions(std::span<const double> params) const;

  void validate() const;
};

/// Width of a single dip; absent with a reason when it cannot be resolved.
struct DipWidth {
  double center = 0.0;
  double contrast = 0.0;
  std::optional<double> fwhm;
  std::string reason;
};

struct FitResult {
  FitModel model;
  std::vector<std::string> names;
  Eigen::VectorXd params;
  Eigen::MatrixXd covariance;
  double residual_rms = 0.0;  ///< unweighted
  double chi2 = 0.0;
  std::size_t points = 0;
  double span_lo = 0.0;
  double span_hi = 0.0;
  bool converged = false;
  int iterations = 0;
  std::string message;
  std::vector<DipWidth> dips;

  std::vector<std::optional<double>> fwhm_per_peak() const;
  std::vector<double> contrast_per_peak() const;
  std::vector<double> uncertainties() const;
  double value(std::string_view name) const;
  double sigma(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;
  double evaluate(double nu) const;
};

/// Heuristic starting point (full parameter vector, fixed entries included).
/// Throws ErrorCode::PeakDetection when fewer dips are found than needed.
std::vector<double> initial_guess(const Spectrum& spec, const FitModel& model);

struct FitOptions {
  LmOptions lm;
  int multi_start = 1;
  std::uint64_t seed = 0;
};

FitResult fit(const Spectrum& spec, const FitModel& model,
              std::span<const double> guess, const FitOptions& options = {});

/// Half-depth FWHM of the dip whose minimum lies within `search` of
/// `position`. `scale` is a typical feature width and sets the step used to
/// walk out to the half-depth crossings.
DipWidth measure_dip(const std::function<double(double)>& curve, double position,
                     double scale, double search, double baseline = 1.0);

/// Widths per dip: fitted widths for MultiLorentzian, half-depth crossings of
/// the fitted curve for DressedDip. Throws FitFailure for unconverged fits.
std::vector<DipWidth> extract_linewidth(const FitResult& result, const FitModel& model);

nlohmann::json fit_result_to_json(const FitResult& result);

}  // namespace odmr
