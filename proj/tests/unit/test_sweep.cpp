#include "doctest.h"

#include <algorithm>
#include <set>
#include <sstream>

#include "odmr/config.hpp"
#include "odmr/error.hpp"
#include "odmr/spectrum_io.hpp"
#include "odmr/sweep.hpp"

using namespace odmr;
using doctest::Approx;

namespace {

SweepConfig preset(const std::string& name, const std::vector<std::string>& overrides = {}) {
  const std::string text = read_text_file(std::string(ODMR_PRESET_DIR) + "/" + name);
  return load_config(text, overrides).sweep_config();
}

SweepConfig small_dressed() {
  SweepConfig c;
  c.env.ex = 7.0;
  c.env.b_transverse = 150.0;
  c.drive = {0, 1.0, 14.0, 4.0, 1.0};
  c.decay = {1.0, 0.1};
  c.grid = {2851.0, 2889.0, 401};
  c.axes = {{"rabi_rf", {2.0, 4.0, 6.0}}};
  c.seed = 3;
  return c;
}

}  // namespace

TEST_CASE("point seeds are distinct and depend on the master seed") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(point_seed(7, i));
  CHECK(seen.size() == 1000);
  CHECK(point_seed(7, 3) == point_seed(7, 3));
  CHECK(point_seed(7, 3) != point_seed(8, 3));
}

TEST_CASE("axis whitelist and shape checks") {
  SweepConfig c = small_dressed();
  CHECK_NOTHROW(c.validate());

  c.axes = {{"gamma_b", {1.0}}};
  try {
    c.validate();
    FAIL("expected a whitelist violation");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("gamma_b") != std::string::npos);
  }
  c.axes = {{"rabi_rf", {}}};
  CHECK_THROWS_AS(c.validate(), Error);
  c.axes = {};
  CHECK_THROWS_AS(c.validate(), Error);
  c.axes = {{"rabi_rf", {1.0}}, {"rabi_rf", {2.0}}};
  CHECK_THROWS_AS(c.validate(), Error);
  c.axes = {{"rabi_rf", {1.0}}, {"rabi_mw", {2.0}}, {"omega_rf", {3.0}}};
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("apply_axis maps every whitelisted parameter") {
  SweepConfig c = small_dressed();
  apply_axis(c, "rabi_rf", 3.0);
  CHECK(c.drive.rabi_rf == 3.0);
  apply_axis(c, "rabi_mw", 2.0);
  CHECK(c.drive.rabi_mw == 2.0);
  CHECK(c.drive.rabi_mw_y == 2.0);  // y/x ratio kept
  apply_axis(c, "omega_rf", 12.0);
  CHECK(c.drive.omega_rf == 12.0);
  apply_axis(c, "sigma_ex", 0.3);
  CHECK(c.strain.sigma_ex == 0.3);
  apply_axis(c, "mw_dbm", -20.0);
  CHECK(c.drive.rabi_mw == Approx(0.1 * c.mw_rabi_at_0dbm));
  apply_axis(c, "rf_dbm", 0.0);
  CHECK(c.drive.rabi_rf == Approx(c.rf_rabi_at_0dbm));
  c.budget.laser = LaserModel{};
  apply_axis(c, "laser_power_mw", 1.5);
  CHECK(c.budget.laser->power_mw == 1.5);
  CHECK_THROWS_AS(apply_axis(c, "bogus", 1.0), Error);
}

TEST_CASE("rows come back in grid order, identical across thread counts") {
  SweepConfig c = small_dressed();
  c.axes = {{"rabi_rf", {4.0, 6.0}}, {"rabi_mw", {0.5, 0.75, 1.0}}};
  c.threads = 1;
  const SweepTable a = sweep(c);
  c.threads = 4;
  const SweepTable b = sweep(c);
  REQUIRE(a.rows.size() == 6);
  CHECK(sweep_to_csv(a) == sweep_to_csv(b));
  CHECK(a.rows[0].axis_values == std::vector<double>{4.0, 0.5});
  CHECK(a.rows[1].axis_values == std::vector<double>{4.0, 0.75});
  CHECK(a.rows[5].axis_values == std::vector<double>{6.0, 1.0});
  for (const auto& r : a.rows) {
    INFO(r.reason);
    CHECK(r.ok);
  }
}

TEST_CASE("failed points are kept with a reason") {
  SweepConfig c = small_dressed();
  c.axes = {{"rabi_mw", {1.0, 1e-6}}};  // second point is below the noise
  const SweepTable t = sweep(c);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0].ok);
  CHECK_FALSE(t.rows[1].ok);
  CHECK_FALSE(t.rows[1].reason.empty());
  const std::string csv = sweep_to_csv(t);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("CSV and JSON layout") {
  SweepConfig c = small_dressed();
  c.axes = {{"rabi_rf", {4.0}}};
  const SweepTable t = sweep(c);
  const std::string csv = sweep_to_csv(t);
  std::istringstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "rabi_rf,status,fwhm_mhz,contrast,eta_slope_k_per_rthz,eta_linewidth_k_per_rthz,"
        "residual_rms,d_fit_mhz,reason");
  const nlohmann::json j = sweep_to_json(t);
  CHECK(j["rows"].size() == 1);
  CHECK(j["axes"][0] == "rabi_rf");
}

TEST_CASE("RF sweep over a strain ensemble narrows the dips") {
  const SweepTable t = sweep(preset("fig5_narrowing.json"));
  REQUIRE(t.rows.size() == 4);
  for (const auto& r : t.rows) REQUIRE(r.fwhm);
  for (std::size_t i = 1; i < t.rows.size(); ++i) {
    CHECK(*t.rows[i].fwhm < *t.rows[i - 1].fwhm);
  }
  // homogeneous floor: gamma_b + gamma_d = 0.07 MHz
  CHECK(*t.rows.back().fwhm > 0.07);
  CHECK(*t.rows.back().fwhm < 0.075);
}

TEST_CASE("drive map has an interior optimum") {
  const SweepTable t = sweep(preset("sensitivity_map.json"));
  REQUIRE(t.axis_names.size() == 2);
  const auto rf = std::set<double>{0.1, 0.25, 0.5, 1.0, 2.0};
  const auto mw = std::set<double>{0.125, 0.25, 0.5, 1.0, 2.0, 4.0};
  REQUIRE(t.rows.size() == rf.size() * mw.size());
  const SweepRow* best = nullptr;
  for (const auto& r : t.rows) {
    if (r.eta_slope && (!best || *r.eta_slope < *best->eta_slope)) best = &r;
  }
  REQUIRE(best);
  CHECK(best->axis_values[0] != *rf.begin());
  CHECK(best->axis_values[0] != *rf.rbegin());
  CHECK(best->axis_values[1] != *mw.begin());
  CHECK(best->axis_values[1] != *mw.rbegin());
}
