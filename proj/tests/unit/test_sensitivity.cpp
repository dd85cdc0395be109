#include "doctest.h"

#include <cmath>

#include "odmr/error.hpp"
#include "odmr/fitting.hpp"
#include "odmr/sensitivity.hpp"

using namespace odmr;
using doctest::Approx;

namespace {

FitResult lorentzian_fit(double width, double depth) {
  const auto grid = linear_grid(2830, 2910, 1601);
  const std::vector<double> c{2870.0}, w{width}, d{depth};
  const Spectrum s = lorentzian_spectrum(c, w, d, grid);
  const FitModel model = FitModel::multi_lorentzian(1);
  return fit(s, model, initial_guess(s, model));
}

Spectrum dressed_at(double temperature, const std::vector<double>& grid) {
  PhysicalEnvironment env;
  env.ex = 7.0;
  env.b_transverse = 150.0;
  env.temperature = temperature;
  return spectrum(env, {0, 1.0, 14.0, 4.0, 1.0}, grid, {1.0, 0.1}, 0.05);
}

}  // namespace

TEST_CASE("linewidth sensitivity fixture") {
  const double k = 4.0 / (3.0 * std::sqrt(3.0));
  const double want = k * 1.0 / (0.01 * 1000.0 * 0.0742);
  CHECK(linewidth_sensitivity(1.0, 0.01, 1e6, -0.0742) == Approx(want).epsilon(1e-14));
  CHECK(linewidth_sensitivity(1.0, 0.01, 1e6, -0.0742) == Approx(1.037).epsilon(1e-3));
  CHECK(linewidth_sensitivity(1.0, 0.02, 1e6, -0.0742) ==
        Approx(0.5 * linewidth_sensitivity(1.0, 0.01, 1e6, -0.0742)).epsilon(1e-14));
  CHECK_THROWS_AS(linewidth_sensitivity(0.0, 0.01, 1e6, -0.0742), Error);
  CHECK_THROWS_AS(linewidth_sensitivity(1.0, -0.01, 1e6, -0.0742), Error);
  CHECK_THROWS_AS(linewidth_sensitivity(1.0, 0.01, 0.0, -0.0742), Error);
  CHECK_THROWS_AS(linewidth_sensitivity(1.0, 0.01, 1e6, 0.0), Error);
}

TEST_CASE("linewidth ratio between the two schemes") {
  const double a = linewidth_sensitivity(7.92, 0.02, 1e6, -0.0742);
  const double b = linewidth_sensitivity(1.91, 0.02, 1e6, -0.0742);
  CHECK(a / b == Approx(7.92 / 1.91).epsilon(1e-14));
  CHECK(a / b == Approx(4.147).epsilon(1e-3));
}

TEST_CASE("shot-noise scaling of both figures") {
  const FitResult r = lorentzian_fit(5.0, 0.05);
  REQUIRE(r.converged);
  NoiseBudget budget;
  budget.photon_rate = 1e6;
  const SensitivityReport a = slope_sensitivity(r, budget, -0.0742);
  for (double k : {2.0, 10.0, 0.3}) {
    budget.photon_rate = 1e6 * k;
    const SensitivityReport b = slope_sensitivity(r, budget, -0.0742);
    CHECK(b.eta_slope == Approx(a.eta_slope / std::sqrt(k)).epsilon(1e-12));
    REQUIRE(a.eta_linewidth);
    REQUIRE(b.eta_linewidth);
    CHECK(*b.eta_linewidth == Approx(*a.eta_linewidth / std::sqrt(k)).epsilon(1e-12));
  }
  budget.photon_rate = 1e6;
  const SensitivityReport half = slope_sensitivity(r, budget, -0.0371);
  CHECK(half.eta_slope == Approx(2.0 * a.eta_slope).epsilon(1e-12));
}

TEST_CASE("slope and linewidth methods agree for one Lorentzian") {
  for (double width : {1.0, 1.91, 7.92}) {
    const FitResult r = lorentzian_fit(width, 0.03);
    REQUIRE(r.converged);
    const SensitivityReport rep = slope_sensitivity(r, NoiseBudget{}, -0.0742);
    REQUIRE(rep.eta_linewidth);
    CHECK(std::abs(rep.eta_slope / *rep.eta_linewidth - 1.0) < 0.05);
    // max-slope point of a Lorentzian is half a HWHM/sqrt(3) from centre
    CHECK(std::abs(std::abs(rep.best_frequency - 2870.0) - 0.5 * width / std::sqrt(3.0)) <
          1e-3 * width);
  }
}

TEST_CASE("narrowing transfers to the linewidth figure exactly") {
  const FitResult wide = lorentzian_fit(7.92, 0.03);
  const FitResult narrow = lorentzian_fit(1.91, 0.03);
  const auto a = slope_sensitivity(wide, NoiseBudget{}, -0.0742);
  const auto b = slope_sensitivity(narrow, NoiseBudget{}, -0.0742);
  REQUIRE(a.fwhm);
  REQUIRE(b.fwhm);
  CHECK(*a.eta_linewidth / *b.eta_linewidth == Approx(*a.fwhm / *b.fwhm).epsilon(1e-12));
}

TEST_CASE("flat curve has no sensitivity") {
  try {
    slope_sensitivity([](double) { return 1.0; }, 2860, 2880, 1.0, 1e6, -0.0742);
    FAIL("expected NoSensitivity");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoSensitivity);
    CHECK(std::string(e.what()).find("no spectral sensitivity") != std::string::npos);
  }
  CHECK_THROWS_AS(slope_sensitivity([](double x) { return x; }, 2860, 2880, 1.0, 1e6, 0.0),
                  Error);
}

TEST_CASE("temperature inversion examples") {
  const auto grid = linear_grid(2851, 2889, 1001);
  const FitModel model = FitModel::dressed_dip(14.0, 1.0, 1.0);
  const Spectrum cal_spec = dressed_at(300.0, grid);
  const FitResult cal = fit(cal_spec, model, initial_guess(cal_spec, model));
  REQUIRE(cal.converged);

  // hand-built fit shifted by exactly -0.0742 MHz
  FitResult shifted = cal;
  shifted.params(0) -= 0.0742;
  const TemperatureEstimate one = estimate_temperature(shifted, cal, 300.0, -0.0742);
  CHECK(one.delta_t == Approx(1.0).epsilon(1e-9));
  CHECK(one.temperature == Approx(301.0).epsilon(1e-12));

  // zero shift: sigma is the combined D uncertainty over |dd_dt|
  FitResult noisy = cal;
  noisy.covariance(0, 0) = 4e-6;
  FitResult noisy_cal = cal;
  noisy_cal.covariance(0, 0) = 5e-6;
  const TemperatureEstimate zero = estimate_temperature(noisy, noisy_cal, 300.0, -0.0742);
  CHECK(zero.delta_t == 0.0);
  CHECK(zero.sigma == Approx(std::sqrt(9e-6) / 0.0742).epsilon(1e-12));

  const FitResult lor = lorentzian_fit(5.0, 0.05);
  try {
    estimate_temperature(lor, cal, 300.0, -0.0742);
    FAIL("expected ModelMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ModelMismatch);
  }
}

TEST_CASE("noiseless temperature round trip is exact to fit precision") {
  const auto grid = linear_grid(2848, 2892, 1101);
  const FitModel model = FitModel::dressed_dip(14.0, 1.0, 1.0);
  const Spectrum cal_spec = dressed_at(300.0, grid);
  const FitResult cal = fit(cal_spec, model, initial_guess(cal_spec, model));
  REQUIRE(cal.converged);
  for (double dt : {-10.0, -1.0, 0.0, 1.0, 10.0}) {
    const Spectrum s = dressed_at(300.0 + dt, grid);
    const FitResult r = fit(s, model, initial_guess(s, model));
    REQUIRE(r.converged);
    const TemperatureEstimate t = estimate_temperature(r, cal, 300.0, kDefaultDdDt);
    CHECK(std::abs(t.delta_t - dt) < 1e-5);
  }
}

TEST_CASE("Lorentzian temperature estimate uses the mean centre") {
  const auto grid = linear_grid(2830, 2910, 801);
  const FitModel model = FitModel::multi_lorentzian(2);
  auto two = [&](double shift) {
    const std::vector<double> c{2855.0 + shift, 2885.0 + shift}, w{4.0, 4.0}, d{0.03, 0.03};
    const Spectrum s = lorentzian_spectrum(c, w, d, grid);
    return fit(s, model, initial_guess(s, model));
  };
  const FitResult cal = two(0.0);
  const FitResult hot = two(-0.742);
  const TemperatureEstimate t = estimate_temperature(hot, cal, 300.0, -0.0742);
  CHECK(t.delta_t == Approx(10.0).epsilon(1e-6));
  const FitResult other = fit(lorentzian_spectrum(std::vector<double>{2870.0}, std::vector<double>{4.0},
                                                  std::vector<double>{0.03}, grid),
                              FitModel::multi_lorentzian(1),
                              std::vector<double>{1.0, 2870.0, 4.0, 0.03});
  CHECK_THROWS_AS(estimate_temperature(other, cal, 300.0, -0.0742), Error);
}

TEST_CASE("laser operating point") {
  NoiseBudget budget;
  budget.alpha = 0.3;
  CHECK(operating_point(budget, {1.0, 0.1}).photon_rate == budget.photon_rate);
  CHECK(operating_point(budget, {1.0, 0.1}).decay.gamma_b == 1.0);
  LaserModel laser;
  laser.power_mw = 0.5;
  laser.rate_per_mw = 2e6;
  laser.pump_per_mw = 2.0;
  laser.gamma_sat = 3.0;
  laser.dephase_b = 0.3;
  laser.dephase_d = 0.01;
  laser.dark_pump_fraction = 0.05;
  budget.laser = laser;
  const OperatingPoint op = operating_point(budget, {1.0, 0.1});
  CHECK(op.photon_rate == Approx(1e6));
  CHECK(op.decay.gamma_b == Approx(0.3 + 0.5));
  CHECK(op.decay.gamma_d == Approx(0.01 + 0.05 * 0.5));
  CHECK(op.alpha == Approx(0.3 * 1.0 / 4.0));
  budget.laser->power_mw = -1.0;
  CHECK_THROWS_AS(operating_point(budget, {}), Error);
  budget.laser->power_mw = 1.0;
  budget.laser->dephase_d = 0.0;
  budget.laser->dark_pump_fraction = 0.0;
  CHECK_THROWS_AS(operating_point(budget, {}), Error);
}

TEST_CASE("dBm to Rabi conversion") {
  CHECK(rabi_from_dbm(0.0, 2.0) == 2.0);
  CHECK(rabi_from_dbm(-20.0, 2.0) == Approx(0.2).epsilon(1e-14));
  CHECK(rabi_from_dbm(20.0 * std::log10(2.0), 1.0) == Approx(2.0).epsilon(1e-14));
}

TEST_CASE("report JSON") {
  const FitResult r = lorentzian_fit(5.0, 0.05);
  const nlohmann::json j = report_to_json(slope_sensitivity(r, NoiseBudget{}, -0.0742));
  CHECK(j["kind"] == "sensitivity");
  CHECK(j["eta_slope_k_per_rthz"].get<double>() > 0.0);
  CHECK(j["fwhm_mhz"].get<double>() == Approx(5.0).epsilon(1e-6));
}
