#include "doctest.h"

#include <filesystem>

#include "odmr/config.hpp"
#include "odmr/error.hpp"
#include "odmr/spectrum_io.hpp"

using namespace odmr;
using doctest::Approx;

namespace {

const char* kMinimal = R"({
  // closed-form simulation
  "mode": "simulate",
  "environment": { "ex": 5.0, "b_transverse": 100.0 },
  "drive": { "rabi_mw": 0.5, "omega_rf": 10.0, "rabi_rf": 2.0 },
  "decay": { "gamma_b": 1.0, "gamma_d": 0.1 },
  "grid": { "start": 2850.0, "stop": 2890.0, "points": 401 }
})";

std::vector<Diagnostic> diagnose(const std::string& text) {
  return validate_config(parse_config_text(text), text);
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto pos = s.find(from);
  REQUIRE(pos != std::string::npos);
  return s.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("every shipped preset validates") {
  int seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(ODMR_PRESET_DIR)) {
    if (entry.path().extension() != ".json") continue;
    ++seen;
    const std::string text = read_text_file(entry.path());
    const auto diags = diagnose(text);
    INFO(entry.path().filename().string());
    for (const auto& d : diags) INFO(d.to_string());
    CHECK(diags.empty());
    CHECK_NOTHROW(load_config(text, {}));
  }
  CHECK(seen >= 5);
}

TEST_CASE("minimal document builds the expected run") {
  CHECK(diagnose(kMinimal).empty());
  const RunConfig c = load_config(kMinimal, {});
  CHECK(c.mode == "simulate");
  CHECK(c.environment.ex == 5.0);
  CHECK(c.drive.rabi_rf == 2.0);
  CHECK(c.decay.gamma_d == 0.1);
  CHECK(c.grid.points == 401);
  CHECK(c.strain.nodes == 21);
}

TEST_CASE("negative gamma_b gives one diagnostic naming the field and line") {
  const std::string text = replace(kMinimal, "\"gamma_b\": 1.0", "\"gamma_b\": -1.0");
  const auto diags = diagnose(text);
  REQUIRE(diags.size() == 1);
  CHECK(diags[0].path == "decay.gamma_b");
  CHECK(diags[0].line == 6);
  CHECK(diags[0].to_string().find("decay.gamma_b") != std::string::npos);
  CHECK(diags[0].to_string().find("line 6") == 0);
}

TEST_CASE("unknown keys get a suggestion") {
  const std::string text = replace(kMinimal, "\"gamma_b\"", "\"gamma_c\"");
  const auto diags = diagnose(text);
  REQUIRE(!diags.empty());
  bool suggested = false;
  for (const auto& d : diags) {
    if (d.path == "decay.gamma_c") {
      suggested = d.message.find("did you mean 'gamma_b'") != std::string::npos ||
                  d.message.find("did you mean 'gamma_d'") != std::string::npos;
    }
  }
  CHECK(suggested);
}

TEST_CASE("all violations are reported at once") {
  std::string text = replace(kMinimal, "\"gamma_b\": 1.0", "\"gamma_b\": 0.0");
  text = replace(text, "\"points\": 401", "\"points\": 3");
  text = replace(text, "\"stop\": 2890.0", "\"stop\": 2800.0");
  const auto diags = diagnose(text);
  CHECK(diags.size() == 3);
  try {
    load_config(text, {});
    FAIL("expected a config error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Config);
    const std::string msg = e.what();
    CHECK(msg.find("decay.gamma_b") != std::string::npos);
    CHECK(msg.find("grid.points") != std::string::npos);
    CHECK(msg.find("grid.stop") != std::string::npos);
  }
}

TEST_CASE("cross-field rules") {
  CHECK(diagnose(replace(kMinimal, "\"b_transverse\": 100.0",
                         "\"b_transverse\": 100.0, \"b_parallel\": 5.0"))
            .size() == 1);
  const auto fit_diags = validate_config(parse_config_text(kMinimal), kMinimal, "fit");
  REQUIRE(!fit_diags.empty());
  CHECK(fit_diags[0].path.find("fit.input") == 0);
  const auto sweep_diags = validate_config(parse_config_text(kMinimal), kMinimal, "sweep");
  REQUIRE(!sweep_diags.empty());
  CHECK(sweep_diags[0].path.find("sweep") == 0);
  const std::string empty_axis =
      replace(kMinimal, "\"mode\": \"simulate\"",
              "\"mode\": \"sweep\", \"sweep\": { \"axes\": [ { \"name\": \"rabi_rf\", \"values\": [] } ] }");
  CHECK(diagnose(empty_axis).size() == 1);
  const std::string bad_axis = replace(empty_axis, "\"rabi_rf\", \"values\": []",
                                       "\"gamma_b\", \"values\": [1.0]");
  CHECK(diagnose(bad_axis).size() == 1);
  CHECK(diagnose(replace(kMinimal, "\"simulate\"", "\"simulat\"")).size() == 1);
}

TEST_CASE("syntax errors carry the line") {
  const std::string text = replace(kMinimal, "\"gamma_d\": 0.1 }", "\"gamma_d\": 0.1, }");
  try {
    parse_config_text(text);
    FAIL("expected a syntax error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Config);
    CHECK(std::string(e.what()).find("line 6") != std::string::npos);
  }
}

TEST_CASE("dotted overrides") {
  nlohmann::json doc = parse_config_text(kMinimal);
  apply_override(doc, "drive.rabi_rf=4.5");
  CHECK(doc["drive"]["rabi_rf"] == 4.5);
  apply_override(doc, "strain.sigma_ex=0.2");
  CHECK(doc["strain"]["sigma_ex"] == 0.2);
  apply_override(doc, "output=out.csv");
  CHECK(doc["output"] == "out.csv");
  apply_override(doc, "noise.enabled=true");
  CHECK(doc["noise"]["enabled"] == true);
  CHECK_THROWS_AS(apply_override(doc, "drive.rabi_rf"), Error);
  CHECK_THROWS_AS(apply_override(doc, "=3"), Error);
  CHECK_THROWS_AS(apply_override(doc, "output.x=3"), Error);

  const RunConfig c = load_config(kMinimal, {"drive.rabi_rf=4.5", "decay.gamma_b=2"});
  CHECK(c.drive.rabi_rf == 4.5);
  CHECK(c.decay.gamma_b == 2.0);
  CHECK_THROWS_AS(load_config(kMinimal, {"decay.gamma_b=-2"}), Error);
}

TEST_CASE("edit distance") {
  CHECK(edit_distance("gamma_c", "gamma_b") == 1);
  CHECK(edit_distance("", "abc") == 3);
  CHECK(edit_distance("kitten", "sitting") == 3);
  CHECK(edit_distance("same", "same") == 0);
}
