#include "odmr/oracle.hpp"

#include <cmath>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

#include "odmr/error.hpp"
#include "odmr/quadrature.hpp"

namespace odmr {

namespace {

using Matrix3cd = Eigen::Matrix3cd;
constexpr int kZero = 0, kB = 1, kD = 2;

Matrix3cd projector(int from, int to) {
  Matrix3cd m = Matrix3cd::Zero();
  m(to, from) = 1.0;
  return m;
}

void add_dissipator(Matrix9cd& l, const Matrix3cd& jump, double rate) {
  if (rate == 0.0) return;
  const Matrix3cd op = std::sqrt(rate) * jump;
  const Matrix3cd id = Matrix3cd::Identity();
  const Matrix3cd n = op.adjoint() * op;
  l += Eigen::kroneckerProduct(op.conjugate(), op).eval();
  l -= 0.5 * Eigen::kroneckerProduct(id, n).eval();
  l -= 0.5 * Eigen::kroneckerProduct(n.transpose(), id).eval();
}

}  // namespace

void LindbladModel::validate() const {
  if (hamiltonian.basis != SpinBasis::BrightDark) {
    throw Error(ErrorCode::InvalidArgument,
                "lindblad: hamiltonian must be in the {|0>,|B>,|D>} basis");
  }
  for (double r : {pump_rate_b, pump_rate_d, dephase_b, dephase_d}) {
    if (!(r >= 0.0) || !std::isfinite(r)) {
      throw Error(ErrorCode::InvalidArgument, "lindblad: rates must be >= 0");
    }
  }
}

LindbladModel lindblad_from_decay(const SpinMatrix& hamiltonian, Channel channel,
                                  const LineDecay& decay, double dephase_driven,
                                  double dephase_partner) {
  if (dephase_driven > decay.gamma_b || dephase_partner > decay.gamma_d) {
    throw Error(ErrorCode::InvalidArgument,
                "lindblad: dephasing exceeds the total decay constant");
  }
  const double pump_driven = 2.0 * (decay.gamma_b - dephase_driven);
  const double pump_partner = 2.0 * (decay.gamma_d - dephase_partner);
  LindbladModel m;
  m.hamiltonian = hamiltonian;
  if (channel == Channel::Bright) {
    m.pump_rate_b = pump_driven;
    m.dephase_b = dephase_driven;
    m.pump_rate_d = pump_partner;
    m.dephase_d = dephase_partner;
  } else {
    m.pump_rate_d = pump_driven;
    m.dephase_d = dephase_driven;
    m.pump_rate_b = pump_partner;
    m.dephase_b = dephase_partner;
  }
  return m;
}

Matrix9cd build_liouvillian(const LindbladModel& model) {
  model.validate();
  const Matrix3cd& h = model.hamiltonian.m;
  const Matrix3cd id = Matrix3cd::Identity();
  const std::complex<double> i(0.0, 1.0);
  Matrix9cd l = -i * (Eigen::kroneckerProduct(id, h).eval() -
                      Eigen::kroneckerProduct(h.transpose(), id).eval());
  add_dissipator(l, projector(kB, kZero), model.pump_rate_b);
  add_dissipator(l, projector(kD, kZero), model.pump_rate_d);
  // L = sqrt(2 g)|k><k| damps the 0-k coherence at g
  add_dissipator(l, projector(kB, kB), 2.0 * model.dephase_b);
  add_dissipator(l, projector(kD, kD), 2.0 * model.dephase_d);
  return l;
}

Eigen::Matrix3cd steady_state(const LindbladModel& model) {
  const Matrix9cd l = build_liouvillian(model);
  Eigen::FullPivLU<Matrix9cd> lu(l);
  lu.setThreshold(1e-10);
  const int kernel = 9 - static_cast<int>(lu.rank());
  if (kernel != 1) {
    throw Error(ErrorCode::DegenerateSteadyState,
                "steady_state: zero eigenvalue has multiplicity " +
                    std::to_string(kernel) + " (expected 1)");
  }
  // the trace row is a combination of the others; swap one out for tr(rho)=1
  Matrix9cd a = l;
  a.row(0).setZero();
  a(0, 0) = a(0, 4) = a(0, 8) = 1.0;
  Eigen::Matrix<std::complex<double>, 9, 1> rhs =
      Eigen::Matrix<std::complex<double>, 9, 1>::Zero();
  rhs(0) = 1.0;
  const auto vec = a.fullPivLu().solve(rhs).eval();
  Matrix3cd rho;
  for (int col = 0; col < 3; ++col) {
    for (int row = 0; row < 3; ++row) rho(row, col) = vec(3 * col + row);
  }
  rho = 0.5 * (rho + rho.adjoint()).eval();
  rho /= rho.trace().real();
  return rho;
}

Spectrum oracle_spectrum(const PhysicalEnvironment& env, const DriveConfig& drive,
                         std::span<const double> grid, const LineDecay& decay,
                         double alpha, const OracleOptions& options,
                         const StrainDistribution* strain) {
  validate(drive);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "grid must be strictly ascending");
    }
  }
  QuadratureRule rule{{0.0}, {1.0}};
  double mean_ex = env.ex, sigma_ex = 0.0;
  if (strain != nullptr) {
    strain->validate();
    mean_ex = strain->mean_ex;
    sigma_ex = strain->sigma_ex;
    if (sigma_ex > 0.0) rule = gauss_hermite_normal(strain->nodes);
  }

  auto depletion = [&](const PhysicalEnvironment& e, double nu) {
    DriveConfig d = drive;
    d.omega_mw = nu;
    double out = 0.0;
    for (Channel ch : {Channel::Bright, Channel::Mirror}) {
      if (ch == Channel::Mirror && drive.rabi_mw_y <= 0.0) continue;
      const SpinMatrix h = build_rotating_hamiltonian(e, d, ch);
      const LindbladModel m = lindblad_from_decay(h, ch, decay, options.dephase_driven,
                                                  options.dephase_partner);
      out += 1.0 - steady_state(m)(kZero, kZero).real();
    }
    return out;
  };

  Spectrum out;
  out.frequencies.assign(grid.begin(), grid.end());
  out.signal.resize(grid.size());
  out.sigma.assign(grid.size(), 0.0);
  PhysicalEnvironment member = env;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double avg = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      member.ex = mean_ex + sigma_ex * rule.nodes[k];
      avg += rule.weights[k] * depletion(member, grid[i]);
    }
    out.signal[i] = 1.0 - alpha * avg;
  }
  out.metadata = {{"generator", "lindblad"},
                  {"gamma_b", decay.gamma_b},
                  {"gamma_d", decay.gamma_d},
                  {"alpha", alpha},
                  {"dephase_driven", options.dephase_driven},
                  {"dephase_partner", options.dephase_partner}};
  return out;
}

}  // namespace odmr
