#pragma once

// Run configuration: strict JSON documents (comments allowed), validation
// that reports every problem at once, and dotted-path overrides.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "odmr/fitting.hpp"
#include "odmr/sensitivity.hpp"
#include "odmr/sweep.hpp"

namespace odmr {

inline constexpr std::array<std::string_view, 5> kRunModes = {
    "simulate", "fit", "sensitivity", "sweep", "oracle-check"};

struct Diagnostic {
  std::string path;  ///< dotted key path, empty for document-level problems
  int line = 0;      ///< 1-based line in the source text, 0 when unknown
  std::string message;

  std::string to_string() const;
};

struct FitSpec {
  std::string input;
  FitFamily family = FitFamily::DressedDip;
  int peaks = 2;
  bool fit_sigma_ex = false;
  int multi_start = 1;
};

struct SweepSpec {
  std::vector<SweepAxis> axes;
  Generator generator = Generator::ClosedForm;
  int threads = 0;
  double mw_rabi_at_0dbm = 1.0;
  double rf_rabi_at_0dbm = 10.0;
};

struct OracleSpec {
  double dephase_driven = 0.0;
  double dephase_partner = 0.0;
  double tolerance = 0.01;  ///< relative RMS of (1 - signal)
};

struct SensitivitySpec {
  std::string input;
  std::string calibration_input;
  double calibration_temperature = 300.0;
};

struct RunConfig {
  std::string mode = "simulate";
  std::uint64_t seed = 0;
  PhysicalEnvironment environment;
  DriveConfig drive;
  LineDecay decay;
  StrainDistribution strain;
  NoiseBudget budget;
  GridSpec grid;
  bool noise_enabled = false;
  double dwell_s = 1.0;
  FitSpec fit;
  SweepSpec sweep;
  OracleSpec oracle;
  SensitivitySpec sensitivity;
  std::string output;
  nlohmann::json notes;  ///< free-form, carried into artifacts

  SweepConfig sweep_config() const;
  /// Fit model implied by the fit section and the drive.
  FitModel fit_model() const;
};

/// Every problem in the document. `text` is the source used for line
/// numbers; `mode` (if nonempty) overrides the document's mode field.
std::vector<Diagnostic> validate_config(const nlohmann::json& doc, std::string_view text,
                                        std::string_view mode = {});

/// Parses JSON (comments allowed). Throws Config with the line of a syntax
/// error.
nlohmann::json parse_config_text(std::string_view text);

/// Applies "a.b.c=value"; value is parsed as JSON, falling back to a string.
void apply_override(nlohmann::json& doc, std::string_view assignment);

/// Builds a RunConfig from a document that passed validation.
RunConfig build_config(const nlohmann::json& doc, std::string_view mode = {});

/// Parse, override, validate and build. Throws Config listing every
/// diagnostic.
RunConfig load_config(std::string_view text, const std::vector<std::string>& overrides,
                      std::string_view mode = {});

std::size_t edit_distance(std::string_view a, std::string_view b);

}  // namespace odmr
