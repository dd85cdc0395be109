#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "json.hpp"
#include "odmr/lineshape.hpp"

namespace odmr {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kSpectrumCsvHeader = "frequency_mhz,signal,sigma";

/// Decimal form with 17 significant digits; parses back bit-exactly with
/// strtod.
std::string format_double(double value);

void write_spectrum_csv(const Spectrum& spec, std::ostream& out);
Spectrum read_spectrum_csv(std::istream& in);

nlohmann::json spectrum_to_json(const Spectrum& spec);
Spectrum spectrum_from_json(const nlohmann::json& doc);

void save_spectrum_csv(const Spectrum& spec, const std::filesystem::path& path);
Spectrum load_spectrum_csv(const std::filesystem::path& path);

/// Throws Io on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace odmr
