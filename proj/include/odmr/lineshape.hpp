#pragma once

// Closed-form CW-ODMR lineshape of the RF-dressed bosonic model, spectra
// over MW sweeps, strain-ensemble averaging, the Lorentzian baseline model
// and shot-noise synthesis.

#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"
#include "odmr/spin_model.hpp"

namespace odmr {

/// Parameters of the two-mode bosonic model. omega_b/gamma_b always belong
/// to the MW-driven mode and omega_d/gamma_d to its RF partner.
struct BosonicModelParams {
  double omega_b = 0.0;
  double omega_d = 0.0;
  double j = 0.0;
  double lambda_b = 0.0;
  double gamma_b = 1.0;
  double gamma_d = 0.1;
};

struct LineDecay {
  double gamma_b = 1.0;  ///< MHz
  double gamma_d = 0.1;  ///< MHz
};

inline constexpr double kDefaultContrast = 0.05;

struct StrainDistribution {
  double mean_ex = 0.0;
  double sigma_ex = 0.0;
  int nodes = 21;

  void validate() const;
};

struct Spectrum {
  std::vector<double> frequencies;  ///< MHz, strictly ascending
  std::vector<double> signal;
  std::vector<double> sigma;        ///< per-point noise std, >= 0
  nlohmann::json metadata = nlohmann::json::object();

  std::size_t size() const { return frequencies.size(); }
  /// Throws InvalidArgument on any violated invariant.
  void validate() const;
  /// True when every sigma is strictly positive.
  bool has_weights() const;
};

std::vector<double> linear_grid(double start, double stop, std::size_t points);

BosonicModelParams map_drive_to_model(const PhysicalEnvironment& env,
                                      const DriveConfig& drive, double omega_mw,
                                      double gamma_b, double gamma_d,
                                      Channel channel = Channel::Bright);

/// Ground-state population of the driven bosonic model.
double p0(const BosonicModelParams& model);

/// Everything needed to evaluate the signal at one MW frequency. In
/// transverse or zero field this is the dressed closed form; the mirror
/// channel contributes only when drive.rabi_mw_y > 0. With a parallel field
/// the RF is ignored and each Zeeman line is a Lorentzian of half width
/// gamma_b.
struct DressedLineModel {
  PhysicalEnvironment env;
  DriveConfig drive;
  LineDecay decay;
  double alpha = kDefaultContrast;
  StrainDistribution strain;  ///< sigma_ex == 0 disables averaging

  /// Summed 1 - p0 over active channels for a single strain value.
  double depletion(double omega_mw) const;
  /// 1 - alpha * <depletion>, averaged over the strain distribution.
  double signal(double omega_mw) const;
};

Spectrum spectrum(const PhysicalEnvironment& env, const DriveConfig& drive,
                  std::span<const double> grid, const LineDecay& decay,
                  double alpha);

Spectrum ensemble_spectrum(const PhysicalEnvironment& env,
                           const DriveConfig& drive,
                           std::span<const double> grid, const LineDecay& decay,
                           double alpha, const StrainDistribution& strain);

double lorentzian_signal(std::span<const double> centers,
                         std::span<const double> widths,
                         std::span<const double> depths, double nu);

Spectrum lorentzian_spectrum(std::span<const double> centers,
                             std::span<const double> widths,
                             std::span<const double> depths,
                             std::span<const double> grid);

/// Adds Gaussian-approximated shot noise for photon_rate * dwell baseline
/// counts per point. Deterministic for a given seed.
Spectrum synthesize_measurement(const Spectrum& clean, double photon_rate,
                                double dwell, std::uint64_t seed);

}  // namespace odmr
