#pragma once

// 1-D and 2-D drive/laser parameter sweeps: generate, add noise, fit and
// score every grid point. Points run in parallel; rows come back in grid
// order with per-point seeds derived from the master seed.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "odmr/fitting.hpp"
#include "odmr/oracle.hpp"
#include "odmr/sensitivity.hpp"

namespace odmr {

enum class Generator { ClosedForm, Lindblad };

std::string_view to_string(Generator g);
Generator generator_from_string(std::string_view name);

/// Parameters a sweep axis may vary.
inline constexpr std::array<std::string_view, 7> kSweepParameters = {
    "rabi_rf", "rabi_mw", "mw_dbm", "rf_dbm", "laser_power_mw", "omega_rf", "sigma_ex"};

struct SweepAxis {
  std::string name;
  std::vector<double> values;
};

struct GridSpec {
  double start = 2866.0;
  double stop = 2905.0;
  std::size_t points = 1001;

  std::vector<double> values() const;
};

struct SweepConfig {
  std::vector<SweepAxis> axes;  ///< one or two
  PhysicalEnvironment env;
  DriveConfig drive;
  LineDecay decay;
  StrainDistribution strain;  ///< mean_ex is taken from env.ex
  NoiseBudget budget;
  GridSpec grid;
  Generator generator = Generator::ClosedForm;
  OracleOptions oracle;
  bool add_noise = true;
  double dwell_s = 1.0;
  bool fit_sigma_ex = false;
  int multi_start = 1;
  double mw_rabi_at_0dbm = 1.0;  ///< MHz, for the mw_dbm axis
  double rf_rabi_at_0dbm = 10.0; ///< MHz, for the rf_dbm axis
  std::uint64_t seed = 0;
  int threads = 0;  ///< 0 selects hardware concurrency

  void validate() const;
};

struct SweepRow {
  std::vector<double> axis_values;
  bool ok = false;
  std::string reason;
  std::optional<double> fwhm;
  std::optional<double> contrast;
  std::optional<double> eta_slope;
  std::optional<double> eta_linewidth;
  std::optional<double> residual_rms;
  std::optional<double> d_fit;
};

struct SweepTable {
  std::vector<std::string> axis_names;
  std::vector<SweepRow> rows;
};

/// splitmix64 of (seed, index): independent per-point noise streams.
std::uint64_t point_seed(std::uint64_t master, std::uint64_t index);

/// Applies one axis value to a copy of the configuration.
void apply_axis(SweepConfig& config, std::string_view name, double value);

/// Runs one grid point (axis values already applied).
SweepRow run_point(const SweepConfig& point, std::uint64_t seed);

SweepTable sweep(const SweepConfig& config);

std::string sweep_to_csv(const SweepTable& table);
nlohmann::json sweep_to_json(const SweepTable& table);

}  // namespace odmr
