#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "odmr/error.hpp"
#include "odmr/fitting.hpp"
#include "odmr/lineshape.hpp"

using namespace odmr;
using doctest::Approx;

namespace {

// Dressed test system: both channels driven, resolved pairs.
struct Dressed {
  double d = 2870.0, ex = 7.0, omega_rf = 14.0, rabi_rf = 4.0, rabi_mw = 1.0;
  double gamma_b = 1.0, gamma_d = 0.1, alpha = 0.05;

  Spectrum clean(const std::vector<double>& grid) const {
    PhysicalEnvironment env;
    env.d0 = d;
    env.ex = ex;
    env.b_transverse = 150.0;
    return spectrum(env, {0, rabi_mw, omega_rf, rabi_rf, rabi_mw}, grid, {gamma_b, gamma_d}, alpha);
  }
  FitModel model() const { return FitModel::dressed_dip(omega_rf, rabi_mw, 1.0); }
  std::vector<double> truth() const { return {d, ex, rabi_rf, rabi_mw, gamma_b, gamma_d, alpha}; }
};

Spectrum single_lorentzian(double c, double w, double depth, const std::vector<double>& grid) {
  const std::vector<double> cs{c}, ws{w}, ds{depth};
  return lorentzian_spectrum(cs, ws, ds, grid);
}

}  // namespace

TEST_CASE("initial guess for a clean Lorentzian is within 20%") {
  const auto grid = linear_grid(2840, 2900, 601);
  const Spectrum s = single_lorentzian(2870.0, 5.0, 0.05, grid);
  const auto g = initial_guess(s, FitModel::multi_lorentzian(1));
  REQUIRE(g.size() == 4);
  CHECK(g[0] == Approx(1.0).epsilon(0.2));
  CHECK(g[1] == Approx(2870.0).epsilon(0.2));
  CHECK(std::abs(g[1] - 2870.0) < 0.2 * 5.0);
  CHECK(g[2] == Approx(5.0).epsilon(0.2));
  CHECK(g[3] == Approx(0.05).epsilon(0.2));
}

TEST_CASE("flat spectrum has no peaks to detect") {
  Spectrum s;
  s.frequencies = linear_grid(2840, 2900, 101);
  s.signal.assign(101, 1.0);
  s.sigma.assign(101, 0.0);
  try {
    initial_guess(s, FitModel::multi_lorentzian(1));
    FAIL("expected a peak-detection error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PeakDetection);
  }
}

TEST_CASE("too few peaks names the counts") {
  const auto grid = linear_grid(2840, 2900, 601);
  const Spectrum s = single_lorentzian(2870.0, 5.0, 0.05, grid);
  try {
    initial_guess(s, FitModel::multi_lorentzian(3));
    FAIL("expected a peak-detection error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PeakDetection);
    const std::string msg = e.what();
    CHECK(msg.find('1') != std::string::npos);
    CHECK(msg.find('3') != std::string::npos);
  }
}

TEST_CASE("four dressed dips are detected in order") {
  const Dressed sys;
  const Spectrum s = sys.clean(linear_grid(2850, 2890, 2001));
  const auto g = initial_guess(s, FitModel::multi_lorentzian(4));
  const auto want = dressed_resonances(sys.d, sys.ex, sys.omega_rf, sys.rabi_rf);
  for (int k = 0; k < 4; ++k) {
    CHECK(std::abs(g[static_cast<std::size_t>(1 + 3 * k)] - want[static_cast<std::size_t>(k)]) < 0.3);
  }
  for (int k = 0; k < 3; ++k) CHECK(g[static_cast<std::size_t>(1 + 3 * k)] < g[static_cast<std::size_t>(4 + 3 * k)]);
}

TEST_CASE("noiseless Lorentzian parameters are recovered exactly") {
  const auto grid = linear_grid(2840, 2900, 601);
  const std::vector<double> c{2860.0, 2878.0}, w{4.0, 6.5}, d{0.04, 0.02};
  const Spectrum s = lorentzian_spectrum(c, w, d, grid);
  const FitModel model = FitModel::multi_lorentzian(2);
  const FitResult r = fit(s, model, initial_guess(s, model));
  REQUIRE(r.converged);
  const std::vector<double> truth{1.0, 2860.0, 4.0, 0.04, 2878.0, 6.5, 0.02};
  for (std::size_t i = 0; i < truth.size(); ++i) {
    CHECK(r.params(static_cast<Eigen::Index>(i)) == Approx(truth[i]).epsilon(1e-6));
  }
  CHECK(r.residual_rms >= 0.0);
  CHECK(r.residual_rms < 1e-9);
}

TEST_CASE("dressed fit recovers rabi_rf under shot noise") {
  const Dressed sys;
  const auto grid = linear_grid(2851, 2889, 1001);
  const Spectrum clean = sys.clean(grid);
  int within = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Spectrum s = synthesize_measurement(clean, 1e6, 1.0, seed);
    const FitResult r = fit(s, sys.model(), initial_guess(s, sys.model()));
    CHECK(r.converged);
    within += std::abs(r.value("rabi_rf") / sys.rabi_rf - 1.0) < 0.02;
  }
  CHECK(within == 20);
}

TEST_CASE("wrong peak count is visible in the fit") {
  Dressed sys;
  sys.alpha = 0.3;
  const auto grid = linear_grid(2851, 2889, 1001);
  const Spectrum s = synthesize_measurement(sys.clean(grid), 1e6, 1.0, 7);
  const FitModel model = FitModel::multi_lorentzian(2);
  const FitResult r = fit(s, model, initial_guess(s, model));
  const double noise = 1e-3;
  CHECK((!r.converged || r.residual_rms > 5.0 * noise));
}

TEST_CASE("Lorentzian linewidth is the fitted width") {
  const auto grid = linear_grid(2830, 2910, 801);
  const Spectrum s = single_lorentzian(2870.0, 7.92, 0.03, grid);
  const FitModel model = FitModel::multi_lorentzian(1);
  const FitResult r = fit(s, model, initial_guess(s, model));
  const auto w = extract_linewidth(r, model);
  REQUIRE(w.size() == 1);
  REQUIRE(w[0].fwhm);
  CHECK(*w[0].fwhm == Approx(7.92).epsilon(1e-6));
  CHECK(w[0].contrast == Approx(0.03).epsilon(1e-6));
}

TEST_CASE("dressed linewidth at the 1.91 MHz target") {
  // resolved pair at w_RF = 2 Ex: each dressed mode decays at (G_b + G_d)/2
  // pairs 10 MHz apart so neighbouring tails barely touch the widths
  Dressed sys;
  sys.ex = 15.0;
  sys.omega_rf = 30.0;
  sys.rabi_rf = 10.0;
  sys.gamma_b = 1.91 / 1.1;
  sys.gamma_d = 0.1 * sys.gamma_b;
  const auto grid = linear_grid(2835, 2905, 3501);
  const Spectrum s = synthesize_measurement(sys.clean(grid), 1e7, 1.0, 3);
  const FitResult r = fit(s, sys.model(), initial_guess(s, sys.model()));
  REQUIRE(r.converged);
  REQUIRE(r.dips.size() == 4);
  for (const auto& d : r.dips) {
    REQUIRE(d.fwhm);
    CHECK(*d.fwhm == Approx(1.91).epsilon(0.03));
  }
}

TEST_CASE("merged dips are reported unresolved") {
  Dressed sys;
  sys.rabi_rf = 0.5;
  sys.gamma_d = 1.0;
  sys.rabi_mw = 0.5;
  const auto grid = linear_grid(2850, 2890, 1001);
  const Spectrum s = sys.clean(grid);
  const FitModel model = FitModel::dressed_dip(sys.omega_rf, sys.rabi_mw, 1.0);
  const FitResult r = fit(s, model, sys.truth());
  REQUIRE(r.converged);
  int unresolved = 0;
  for (const auto& d : extract_linewidth(r, model)) {
    if (!d.fwhm) {
      ++unresolved;
      CHECK(d.reason.find("unresolved") == 0);
    }
  }
  CHECK(unresolved >= 2);
}

TEST_CASE("refit from a converged solution is idempotent") {
  const Dressed sys;
  const auto grid = linear_grid(2851, 2889, 1001);
  const Spectrum s = synthesize_measurement(sys.clean(grid), 1e6, 1.0, 11);
  const FitResult a = fit(s, sys.model(), initial_guess(s, sys.model()));
  REQUIRE(a.converged);
  const std::vector<double> start(a.params.data(), a.params.data() + a.params.size());
  const FitResult b = fit(s, sys.model(), start);
  REQUIRE(b.converged);
  CHECK(std::abs(b.chi2 - a.chi2) <= 1e-12 * a.chi2);
}

TEST_CASE("scaling every sigma leaves the estimate and scales the covariance") {
  const auto grid = linear_grid(2840, 2900, 601);
  const Spectrum clean = single_lorentzian(2870.0, 5.0, 0.05, grid);
  const Spectrum s = synthesize_measurement(clean, 1e6, 1.0, 5);
  Spectrum scaled = s;
  for (double& v : scaled.sigma) v *= 3.0;
  const FitModel model = FitModel::multi_lorentzian(1);
  const auto g = initial_guess(s, model);
  const FitResult a = fit(s, model, g);
  const FitResult b = fit(scaled, model, g);
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  for (Eigen::Index i = 0; i < a.params.size(); ++i) {
    CHECK(b.params(i) == Approx(a.params(i)).epsilon(1e-7));
    for (Eigen::Index j = 0; j < a.params.size(); ++j) {
      CHECK(b.covariance(i, j) == Approx(9.0 * a.covariance(i, j)).epsilon(1e-4).scale(1e-12));
    }
  }
}

TEST_CASE("covariance is symmetric positive semidefinite") {
  const Dressed sys;
  const auto grid = linear_grid(2851, 2889, 1001);
  const Spectrum s = synthesize_measurement(sys.clean(grid), 1e6, 1.0, 2);
  const FitResult r = fit(s, sys.model(), initial_guess(s, sys.model()));
  REQUIRE(r.converged);
  CHECK((r.covariance - r.covariance.transpose()).cwiseAbs().maxCoeff() <=
        1e-12 * r.covariance.cwiseAbs().maxCoeff());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r.covariance);
  CHECK(es.eigenvalues().minCoeff() >= -1e-12 * es.eigenvalues().maxCoeff());
  // rabi_mw is fixed: zero variance
  CHECK(r.sigma("rabi_mw") == 0.0);
  for (const auto& d : r.dips) {
    if (d.fwhm) CHECK(*d.fwhm > 0.0);
  }
}

TEST_CASE("fit result JSON carries names, values and uncertainties") {
  const auto grid = linear_grid(2840, 2900, 601);
  const Spectrum s = synthesize_measurement(single_lorentzian(2870.0, 5.0, 0.05, grid), 1e6, 1.0, 1);
  const FitModel model = FitModel::multi_lorentzian(1);
  const FitResult r = fit(s, model, initial_guess(s, model));
  const nlohmann::json j = fit_result_to_json(r);
  CHECK(j["kind"] == "fit_result");
  CHECK(j["parameters"].size() == 4);
  CHECK(j["parameters"][1]["name"] == "center_0");
  CHECK(j["parameters"][1]["value"].get<double>() == r.value("center_0"));
  CHECK(j["parameters"][1]["sigma"].get<double>() > 0.0);
  CHECK(j["dips"].size() == 1);
  CHECK(j.contains("converged"));
}

TEST_CASE("guess validation") {
  const auto grid = linear_grid(2840, 2900, 601);
  const Spectrum s = single_lorentzian(2870.0, 5.0, 0.05, grid);
  const FitModel model = FitModel::multi_lorentzian(1);
  const std::vector<double> short_guess{1.0, 2870.0};
  CHECK_THROWS_AS(fit(s, model, short_guess), Error);
  const std::vector<double> negative{1.0, 2870.0, -5.0, 0.05};
  CHECK_THROWS_AS(fit(s, model, negative), Error);
  CHECK_THROWS_AS(FitModel::multi_lorentzian(0).validate(), Error);
}
