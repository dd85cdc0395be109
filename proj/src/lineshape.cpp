#include "odmr/lineshape.hpp"

#include <cmath>
#include <complex>
#include <random>

#include "odmr/error.hpp"
#include "odmr/quadrature.hpp"

namespace odmr {

void StrainDistribution::validate() const {
  if (!(sigma_ex >= 0.0) || !std::isfinite(sigma_ex)) {
    throw Error(ErrorCode::InvalidArgument, "strain.sigma_ex must be >= 0");
  }
  if (nodes < 1 || nodes % 2 == 0) {
    throw Error(ErrorCode::InvalidArgument, "strain.nodes must be odd and >= 1");
  }
}

void Spectrum::validate() const {
  const std::size_t n = frequencies.size();
  if (signal.size() != n || sigma.size() != n) {
    throw Error(ErrorCode::InvalidArgument,
                "spectrum: frequencies, signal and sigma differ in length");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(frequencies[i]) || !std::isfinite(signal[i]) ||
        !std::isfinite(sigma[i])) {
      throw Error(ErrorCode::InvalidArgument, "spectrum: non-finite value");
    }
    if (i > 0 && !(frequencies[i] > frequencies[i - 1])) {
      throw Error(ErrorCode::InvalidArgument,
                  "spectrum: frequencies must be strictly ascending");
    }
    if (sigma[i] < 0.0) {
      throw Error(ErrorCode::InvalidArgument, "spectrum: negative sigma");
    }
  }
}

bool Spectrum::has_weights() const {
  if (sigma.empty()) return false;
  for (double s : sigma) {
    if (!(s > 0.0)) return false;
  }
  return true;
}

std::vector<double> linear_grid(double start, double stop, std::size_t points) {
  if (points < 2 || !(stop > start)) {
    throw Error(ErrorCode::InvalidArgument,
                "linear_grid: need points >= 2 and stop > start");
  }
  std::vector<double> grid(points);
  const double step = (stop - start) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    grid[i] = start + step * static_cast<double>(i);
  }
  grid.back() = stop;
  return grid;
}

BosonicModelParams map_drive_to_model(const PhysicalEnvironment& env,
                                      const DriveConfig& drive, double omega_mw,
                                      double gamma_b, double gamma_d,
                                      Channel channel) {
  const ModeDetunings det = mode_detunings(env, omega_mw, drive.omega_rf, channel);
  BosonicModelParams m;
  m.omega_b = det.driven;
  m.omega_d = det.partner;
  m.j = 0.5 * drive.rabi_rf;
  m.lambda_b = 0.5 * (channel == Channel::Bright ? drive.rabi_mw : drive.rabi_mw_y);
  m.gamma_b = gamma_b;
  m.gamma_d = gamma_d;
  return m;
}

double p0(const BosonicModelParams& m) {
  if (!(m.gamma_b > 0.0) || !(m.gamma_d > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "p0: gamma_b and gamma_d must be > 0");
  }
  using cd = std::complex<double>;
  const cd bright(m.omega_b, -m.gamma_b);
  const cd dark(m.omega_d, -m.gamma_d);
  const cd delta = bright * dark - m.j * m.j;
  const cd amp_b = -m.lambda_b * dark / delta;
  const cd amp_d = m.lambda_b * m.j / delta;
  return 1.0 - std::norm(amp_b) - std::norm(amp_d);
}

namespace {

// Conventional scheme: |+1> and |-1> split by the parallel field and mixed by
// Ex, each an undressed two-level line of half width gamma_b.
double parallel_depletion(const DressedLineModel& m, double omega_mw) {
  const double d = zero_field_splitting(m.env);
  const double bz = m.env.b_parallel;
  const double ex = m.env.ex;
  const double split = std::hypot(bz, ex);
  const double lb = 0.5 * m.drive.rabi_mw;
  const double ld = 0.5 * m.drive.rabi_mw_y;
  const double g2 = m.decay.gamma_b * m.decay.gamma_b;
  double out = 0.0;
  for (int sign : {-1, 1}) {
    // eigenvector of [[bz, ex], [ex, -bz]] in {|+1>, |-1>}
    const double lambda = sign * split;
    double u = ex, v = lambda - bz;
    if (u == 0.0 && v == 0.0) {
      // first row vanished; use the second
      u = bz + lambda;
      v = ex;
    }
    const double norm = std::hypot(u, v);
    u /= norm;
    v /= norm;
    const double cb = (u + v) / std::sqrt(2.0);
    const double cd = (u - v) / std::sqrt(2.0);
    const double lam2 = lb * lb * cb * cb + ld * ld * cd * cd;
    const double det = d + sign * split - omega_mw;
    out += lam2 / (det * det + g2);
  }
  return out;
}

}  // namespace

double DressedLineModel::depletion(double omega_mw) const {
  if (env.b_parallel != 0.0) return parallel_depletion(*this, omega_mw);
  double out = 1.0 - p0(map_drive_to_model(env, drive, omega_mw, decay.gamma_b,
                                           decay.gamma_d, Channel::Bright));
  if (drive.rabi_mw_y > 0.0) {
    out += 1.0 - p0(map_drive_to_model(env, drive, omega_mw, decay.gamma_b,
                                       decay.gamma_d, Channel::Mirror));
  }
  return out;
}

double DressedLineModel::signal(double omega_mw) const {
  if (strain.sigma_ex == 0.0 || strain.nodes == 1) {
    return 1.0 - alpha * depletion(omega_mw);
  }
  const QuadratureRule& rule = gauss_hermite_normal(strain.nodes);
  DressedLineModel member = *this;
  double avg = 0.0;
  // fixed node order keeps the sum bit-reproducible
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    member.env.ex = strain.mean_ex + strain.sigma_ex * rule.nodes[k];
    avg += rule.weights[k] * member.depletion(omega_mw);
  }
  return 1.0 - alpha * avg;
}

namespace {

void check_grid(std::span<const double> grid) {
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "grid must be strictly ascending");
    }
  }
}

Spectrum evaluate(const DressedLineModel& model, std::span<const double> grid) {
  check_grid(grid);
  Spectrum out;
  out.frequencies.assign(grid.begin(), grid.end());
  out.signal.resize(grid.size());
  out.sigma.assign(grid.size(), 0.0);
  if (model.strain.sigma_ex > 0.0 && model.strain.nodes > 1) {
    // hoist the quadrature rule out of the per-point loop
    const QuadratureRule& rule = gauss_hermite_normal(model.strain.nodes);
    DressedLineModel member = model;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      double avg = 0.0;
      for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        member.env.ex = model.strain.mean_ex + model.strain.sigma_ex * rule.nodes[k];
        avg += rule.weights[k] * member.depletion(grid[i]);
      }
      out.signal[i] = 1.0 - model.alpha * avg;
    }
  } else {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      out.signal[i] = 1.0 - model.alpha * model.depletion(grid[i]);
    }
  }
  const PhysicalEnvironment& env = model.env;
  const DriveConfig& d = model.drive;
  out.metadata = {
      {"generator", "closed_form"},
      {"environment",
       {{"d0", env.d0}, {"t0", env.t0}, {"dd_dt", env.dd_dt}, {"ex", env.ex},
        {"ey", env.ey}, {"b_transverse", env.b_transverse},
        {"b_parallel", env.b_parallel}, {"temperature", env.temperature}}},
      {"drive",
       {{"rabi_mw", d.rabi_mw}, {"rabi_mw_y", d.rabi_mw_y},
        {"omega_rf", d.omega_rf}, {"rabi_rf", d.rabi_rf}}},
      {"gamma_b", model.decay.gamma_b},
      {"gamma_d", model.decay.gamma_d},
      {"alpha", model.alpha},
      {"strain",
       {{"mean_ex", model.strain.mean_ex}, {"sigma_ex", model.strain.sigma_ex},
        {"nodes", model.strain.nodes}}}};
  return out;
}

}  // namespace

Spectrum spectrum(const PhysicalEnvironment& env, const DriveConfig& drive,
                  std::span<const double> grid, const LineDecay& decay,
                  double alpha) {
  validate(drive);
  DressedLineModel model{env, drive, decay, alpha, {env.ex, 0.0, 1}};
  return evaluate(model, grid);
}

Spectrum ensemble_spectrum(const PhysicalEnvironment& env,
                           const DriveConfig& drive,
                           std::span<const double> grid, const LineDecay& decay,
                           double alpha, const StrainDistribution& strain) {
  validate(drive);
  strain.validate();
  DressedLineModel model{env, drive, decay, alpha, strain};
  model.env.ex = strain.mean_ex;
  return evaluate(model, grid);
}

double lorentzian_signal(std::span<const double> centers,
                         std::span<const double> widths,
                         std::span<const double> depths, double nu) {
  double s = 1.0;
  for (std::size_t k = 0; k < centers.size(); ++k) {
    const double h = 0.5 * widths[k];
    const double x = nu - centers[k];
    s -= depths[k] * h * h / (x * x + h * h);
  }
  return s;
}

Spectrum lorentzian_spectrum(std::span<const double> centers,
                             std::span<const double> widths,
                             std::span<const double> depths,
                             std::span<const double> grid) {
  if (centers.size() != widths.size() || centers.size() != depths.size()) {
    throw Error(ErrorCode::InvalidArgument,
                "lorentzian_spectrum: parameter lists differ in length");
  }
  for (double w : widths) {
    if (!(w > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "lorentzian_spectrum: width must be > 0");
    }
  }
  check_grid(grid);
  Spectrum out;
  out.frequencies.assign(grid.begin(), grid.end());
  out.signal.resize(grid.size());
  out.sigma.assign(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out.signal[i] = lorentzian_signal(centers, widths, depths, grid[i]);
  }
  out.metadata = {{"generator", "lorentzian"},
                  {"centers", std::vector<double>(centers.begin(), centers.end())},
                  {"widths", std::vector<double>(widths.begin(), widths.end())},
                  {"depths", std::vector<double>(depths.begin(), depths.end())}};
  return out;
}

Spectrum synthesize_measurement(const Spectrum& clean, double photon_rate,
                                double dwell, std::uint64_t seed) {
  if (!(photon_rate > 0.0) || !(dwell > 0.0)) {
    throw Error(ErrorCode::InvalidArgument,
                "synthesize_measurement: photon_rate and dwell must be > 0");
  }
  clean.validate();
  const double counts = photon_rate * dwell;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Spectrum out = clean;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    // Var of (counts*s)/counts for Poisson counts*s is s/counts
    const double s = std::max(clean.signal[i], 0.0);
    const double sigma = std::sqrt(s / counts);
    out.sigma[i] = sigma;
    out.signal[i] = clean.signal[i] + sigma * normal(rng);
  }
  out.metadata["noise"] = {{"photon_rate", photon_rate},
                           {"dwell_s", dwell},
                           {"seed", seed}};
  return out;
}

}  // namespace odmr
