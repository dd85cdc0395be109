#include "odmr/spin_model.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "odmr/error.hpp"

namespace odmr {

namespace {

using cd = std::complex<double>;
constexpr cd kI{0.0, 1.0};

}  // namespace

FieldMode field_mode(const PhysicalEnvironment& env) {
  if (!(env.d0 > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "environment.d0 must be > 0");
  }
  const bool transverse = env.b_transverse != 0.0;
  const bool parallel = env.b_parallel != 0.0;
  if (transverse && parallel) {
    throw Error(ErrorCode::InvalidArgument,
                "environment: b_transverse and b_parallel are mutually "
                "exclusive; set one of them to 0");
  }
  if (transverse) return FieldMode::Transverse;
  if (parallel) return FieldMode::Parallel;
  return FieldMode::ZeroField;
}

std::vector<std::string> regime_warnings(const PhysicalEnvironment& env) {
  std::vector<std::string> out;
  const double d = zero_field_splitting(env);
  const double bx = std::abs(env.b_transverse);
  const double ey = std::abs(env.ey);
  // "much greater" taken as a factor of ten
  if (bx != 0.0 && !(d >= 10.0 * bx)) {
    std::ostringstream os;
    os << "regime: D=" << d << " MHz is not >> b_transverse=" << bx << " MHz";
    out.push_back(os.str());
  }
  if (bx != 0.0 && ey != 0.0 && !(bx >= 10.0 * ey)) {
    std::ostringstream os;
    os << "regime: b_transverse=" << bx << " MHz is not >> ey=" << ey << " MHz";
    out.push_back(os.str());
  }
  return out;
}

void validate(const DriveConfig& drive) {
  auto check = [](double v, const char* name) {
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(ErrorCode::InvalidArgument,
                  std::string("drive.") + name + " must be finite and >= 0");
    }
  };
  check(drive.rabi_mw, "rabi_mw");
  check(drive.rabi_mw_y, "rabi_mw_y");
  check(drive.rabi_rf, "rabi_rf");
  check(drive.omega_rf, "omega_rf");
  if (!std::isfinite(drive.omega_mw)) {
    throw Error(ErrorCode::InvalidArgument, "drive.omega_mw must be finite");
  }
}

bool SpinMatrix::is_hermitian(double tol) const {
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

Eigen::Vector3d SpinMatrix::eigenvalues() const {
  const Eigen::Matrix3cd h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

Eigen::Matrix3cd spin_x() {
  const double s = std::numbers::sqrt2 / 2.0;
  Eigen::Matrix3cd m = Eigen::Matrix3cd::Zero();
  m(0, 1) = m(1, 0) = s;
  m(1, 2) = m(2, 1) = s;
  return m;
}

Eigen::Matrix3cd spin_y() {
  const double s = std::numbers::sqrt2 / 2.0;
  Eigen::Matrix3cd m = Eigen::Matrix3cd::Zero();
  m(0, 1) = -kI * s;
  m(1, 0) = kI * s;
  m(1, 2) = -kI * s;
  m(2, 1) = kI * s;
  return m;
}

Eigen::Matrix3cd spin_z() {
  Eigen::Matrix3cd m = Eigen::Matrix3cd::Zero();
  m(0, 0) = 1.0;
  m(2, 2) = -1.0;
  return m;
}

Eigen::Matrix3cd zeeman_to_bright_dark() {
  const double s = std::numbers::sqrt2 / 2.0;
  Eigen::Matrix3cd u = Eigen::Matrix3cd::Zero();
  u(0, 1) = 1.0;          // |0>
  u(1, 0) = u(1, 2) = s;  // |B> = (|+1> + |-1>)/sqrt2
  u(2, 0) = s;            // |D> = (|+1> - |-1>)/sqrt2
  u(2, 2) = -s;
  return u;
}

double zero_field_splitting(const PhysicalEnvironment& env, double temperature) {
  return env.d0 + env.dd_dt * (temperature - env.t0);
}

SpinMatrix build_lab_hamiltonian(const PhysicalEnvironment& env,
                                 const DriveConfig& drive, double t_us) {
  const Eigen::Matrix3cd sx = spin_x();
  const Eigen::Matrix3cd sy = spin_y();
  const Eigen::Matrix3cd sz = spin_z();
  const double d = zero_field_splitting(env);

  Eigen::Matrix3cd h = d * sz * sz;
  h += env.ex * (sx * sx - sy * sy);
  h += env.ey * (sx * sy + sy * sx);
  h += env.b_transverse * sx;
  h += env.b_parallel * sz;

  const double two_pi = 2.0 * std::numbers::pi;
  const double c_mw = std::cos(two_pi * drive.omega_mw * t_us);
  const double c_rf = std::cos(two_pi * drive.omega_rf * t_us);
  h += drive.rabi_mw * c_mw * sx;
  h += drive.rabi_mw_y * c_mw * sy;
  h += drive.rabi_rf * c_rf * sz;

  // products of Hermitian factors leave ~1 ulp of skew
  SpinMatrix out;
  out.m = 0.5 * (h + h.adjoint());
  out.basis = SpinBasis::Zeeman;
  return out;
}

ModeDetunings mode_detunings(const PhysicalEnvironment& env, double omega_mw,
                             double omega_rf, Channel channel) {
  const double d = zero_field_splitting(env);
  if (channel == Channel::Bright) {
    return {d + env.ex - omega_mw, d - env.ex - omega_mw + omega_rf};
  }
  return {d - env.ex - omega_mw, d + env.ex - omega_mw - omega_rf};
}

SpinMatrix build_rotating_hamiltonian(const PhysicalEnvironment& env,
                                      const DriveConfig& drive,
                                      Channel channel) {
  if (field_mode(env) == FieldMode::Parallel) {
    throw Error(ErrorCode::InvalidArgument,
                "rotating-frame reduction requires transverse or zero field");
  }
  const ModeDetunings det =
      mode_detunings(env, drive.omega_mw, drive.omega_rf, channel);
  const double j = 0.5 * drive.rabi_rf;

  SpinMatrix out;
  out.basis = SpinBasis::BrightDark;
  Eigen::Matrix3cd& h = out.m;
  constexpr int kZero = 0, kB = 1, kD = 2;
  h(kB, kD) = h(kD, kB) = j;
  if (channel == Channel::Bright) {
    h(kB, kB) = det.driven;
    h(kD, kD) = det.partner;
    h(kZero, kB) = h(kB, kZero) = 0.5 * drive.rabi_mw;
  } else {
    h(kD, kD) = det.driven;
    h(kB, kB) = det.partner;
    h(kZero, kD) = h(kD, kZero) = 0.5 * drive.rabi_mw_y;
  }
  return out;
}

std::array<double, 4> dressed_resonances(double d, double ex, double omega_rf,
                                         double rabi_rf) {
  if (rabi_rf < 0.0) {
    // enters squared; accept the sign but keep the documented precondition
    rabi_rf = -rabi_rf;
  }
  const double detuning = 2.0 * ex - omega_rf;
  const double root = std::hypot(detuning, rabi_rf);
  std::array<double, 4> out = {
      0.5 * (2.0 * d - omega_rf - root), 0.5 * (2.0 * d - omega_rf + root),
      0.5 * (2.0 * d + omega_rf - root), 0.5 * (2.0 * d + omega_rf + root)};
  std::sort(out.begin(), out.end());
  return out;
}

double residual_broadening(double delta_ex, double rabi_rf, bool exact) {
  if (delta_ex < 0.0 || rabi_rf < 0.0) {
    throw Error(ErrorCode::InvalidArgument,
                "residual_broadening: delta_ex and rabi_rf must be >= 0");
  }
  if (delta_ex == 0.0) return 0.0;
  if (exact) {
    // sqrt(a^2+b^2) - b written to avoid cancellation at large b
    const double root = std::hypot(delta_ex, rabi_rf);
    return 0.5 * delta_ex * delta_ex / (root + rabi_rf);
  }
  if (rabi_rf == 0.0) {
    throw Error(ErrorCode::Domain,
                "residual_broadening: Taylor regime violated (rabi_rf == 0)");
  }
  return 0.25 * delta_ex * delta_ex / rabi_rf;
}

}  // namespace odmr
