#include "odmr/spectrum_io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "odmr/error.hpp"

namespace odmr {

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void write_spectrum_csv(const Spectrum& spec, std::ostream& out) {
  spec.validate();
  out << kSpectrumCsvHeader << '\n';
  for (std::size_t i = 0; i < spec.size(); ++i) {
    out << format_double(spec.frequencies[i]) << ',' << format_double(spec.signal[i])
        << ',' << format_double(spec.sigma[i]) << '\n';
  }
}

namespace {

double parse_field(const std::string& text, std::size_t line) {
  const char* begin = text.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || errno == ERANGE) {
    throw Error(ErrorCode::Io, "csv line " + std::to_string(line) +
                                   ": cannot parse number '" + text + "'");
  }
  return v;
}

}  // namespace

Spectrum read_spectrum_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::Io, "csv: empty input");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kSpectrumCsvHeader) {
    throw Error(ErrorCode::Io, std::string("csv: expected header '") +
                                   kSpectrumCsvHeader + "', got '" + line + "'");
  }
  Spectrum spec;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string a, b, c, extra;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') ||
        !std::getline(ss, c, ',') || std::getline(ss, extra, ',')) {
      throw Error(ErrorCode::Io,
                  "csv line " + std::to_string(lineno) + ": expected 3 columns");
    }
    spec.frequencies.push_back(parse_field(a, lineno));
    spec.signal.push_back(parse_field(b, lineno));
    spec.sigma.push_back(parse_field(c, lineno));
  }
  spec.validate();
  return spec;
}

nlohmann::json spectrum_to_json(const Spectrum& spec) {
  spec.validate();
  return {{"schema_version", kSchemaVersion},
          {"kind", "spectrum"},
          {"metadata", spec.metadata},
          {"frequency_mhz", spec.frequencies},
          {"signal", spec.signal},
          {"sigma", spec.sigma}};
}

Spectrum spectrum_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("schema_version").get<int>() != kSchemaVersion ||
        doc.at("kind").get<std::string>() != "spectrum") {
      throw Error(ErrorCode::Io, "json: not a spectrum document of a known schema");
    }
    Spectrum spec;
    spec.frequencies = doc.at("frequency_mhz").get<std::vector<double>>();
    spec.signal = doc.at("signal").get<std::vector<double>>();
    spec.sigma = doc.at("sigma").get<std::vector<double>>();
    spec.metadata = doc.value("metadata", nlohmann::json::object());
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Io, std::string("json: ") + e.what());
  }
}

void save_spectrum_csv(const Spectrum& spec, const std::filesystem::path& path) {
  std::ostringstream os;
  write_spectrum_csv(spec, os);
  write_text_file(path, os.str());
}

Spectrum load_spectrum_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return read_spectrum_csv(in);
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace odmr
