#include "doctest.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <random>
#include <sstream>

#include "odmr/error.hpp"
#include "odmr/spectrum_io.hpp"

using namespace odmr;

namespace {

Spectrum random_spectrum(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> e(-200, 200);
  Spectrum s;
  double f = 2800.0;
  for (std::size_t i = 0; i < n; ++i) {
    f += 1e-3 + u(rng);
    s.frequencies.push_back(f);
    s.signal.push_back((u(rng) - 0.3) * std::ldexp(1.0, e(rng) / 10));
    s.sigma.push_back(u(rng) < 0.2 ? 0.0 : std::ldexp(u(rng), e(rng)));
  }
  return s;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("property: CSV round trip is bit-exact") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Spectrum s = random_spectrum(seed, 200);
    std::stringstream io;
    write_spectrum_csv(s, io);
    const Spectrum back = read_spectrum_csv(io);
    CHECK(bit_equal(s.frequencies, back.frequencies));
    CHECK(bit_equal(s.signal, back.signal));
    CHECK(bit_equal(s.sigma, back.sigma));
  }
}

TEST_CASE("property: JSON round trip is bit-exact and keeps metadata") {
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    Spectrum s = random_spectrum(seed, 100);
    s.metadata = {{"generator", "test"}, {"seed", seed}};
    const std::string text = spectrum_to_json(s).dump();
    const Spectrum back = spectrum_from_json(nlohmann::json::parse(text));
    CHECK(bit_equal(s.frequencies, back.frequencies));
    CHECK(bit_equal(s.signal, back.signal));
    CHECK(bit_equal(s.sigma, back.sigma));
    CHECK(back.metadata == s.metadata);
  }
}

TEST_CASE("CSV reader rejects malformed input") {
  auto read = [](const std::string& text) {
    std::istringstream in(text);
    return read_spectrum_csv(in);
  };
  CHECK_THROWS_AS(read(""), Error);
  CHECK_THROWS_AS(read("freq,signal,sigma\n1,1,0\n"), Error);
  CHECK_THROWS_AS(read("frequency_mhz,signal,sigma\n1,1\n"), Error);
  CHECK_THROWS_AS(read("frequency_mhz,signal,sigma\n1,1,0,4\n"), Error);
  CHECK_THROWS_AS(read("frequency_mhz,signal,sigma\n1,abc,0\n"), Error);
  CHECK_THROWS_AS(read("frequency_mhz,signal,sigma\n2,1,0\n1,1,0\n"), Error);
  try {
    read("frequency_mhz,signal,sigma\n1,1,0\n2,x,0\n");
    FAIL("expected an io error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Io);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  const Spectrum crlf = read("frequency_mhz,signal,sigma\r\n1,0.5,0\r\n2,0.25,0\r\n");
  CHECK(crlf.size() == 2);
}

TEST_CASE("JSON reader checks schema and kind") {
  nlohmann::json doc = spectrum_to_json(random_spectrum(1, 5));
  doc["kind"] = "fit_result";
  CHECK_THROWS_AS(spectrum_from_json(doc), Error);
  doc["kind"] = "spectrum";
  doc["schema_version"] = 99;
  CHECK_THROWS_AS(spectrum_from_json(doc), Error);
  doc["schema_version"] = kSchemaVersion;
  doc.erase("signal");
  CHECK_THROWS_AS(spectrum_from_json(doc), Error);
}

TEST_CASE("file helpers") {
  const auto dir = std::filesystem::temp_directory_path() / "odmr_io_test";
  std::filesystem::create_directories(dir);
  const Spectrum s = random_spectrum(3, 20);
  save_spectrum_csv(s, dir / "s.csv");
  const Spectrum back = load_spectrum_csv(dir / "s.csv");
  CHECK(bit_equal(s.signal, back.signal));
  write_text_file(dir / "t.txt", "hello\n");
  CHECK(read_text_file(dir / "t.txt") == "hello\n");
  CHECK_THROWS_AS(load_spectrum_csv(dir / "missing.csv"), Error);
  CHECK_THROWS_AS(write_text_file(dir / "no" / "such" / "dir.txt", "x"), Error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("format_double keeps 17 significant digits") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(std::strtod(format_double(2870.123456789).c_str(), nullptr) == 2870.123456789);
}
