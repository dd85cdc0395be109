#pragma once

// Brute-force reference for the closed-form lineshape: steady state of the
// driven three-level {|0>,|B>,|D>} system under a Lindblad master equation.

#include <span>

#include <Eigen/Dense>

#include "odmr/lineshape.hpp"
#include "odmr/spin_model.hpp"

namespace odmr {

using Matrix9cd = Eigen::Matrix<std::complex<double>, 9, 9>;

/// Dissipation: optical repolarisation |0><B| at pump_rate_b and |0><D| at
/// pump_rate_d, plus pure dephasing of |B> and |D>. Coherence decay of
/// rho_{0B} is pump_rate_b/2 + dephase_b (likewise for D).
struct LindbladModel {
  SpinMatrix hamiltonian;
  double pump_rate_b = 0.0;
  double pump_rate_d = 0.0;
  double dephase_b = 0.0;
  double dephase_d = 0.0;

  void validate() const;
};

/// Rates that reproduce decay constants (gamma_b of the MW-driven mode,
/// gamma_d of its RF partner) with the requested pure-dephasing share.
LindbladModel lindblad_from_decay(const SpinMatrix& hamiltonian, Channel channel,
                                  const LineDecay& decay, double dephase_driven = 0.0,
                                  double dephase_partner = 0.0);

/// Column-stacked Liouvillian: vec(drho/dt) = L vec(rho).
Matrix9cd build_liouvillian(const LindbladModel& model);

/// Unique steady state, Hermitian with unit trace. Throws
/// ErrorCode::DegenerateSteadyState naming the kernel dimension otherwise.
Eigen::Matrix3cd steady_state(const LindbladModel& model);

struct OracleOptions {
  double dephase_driven = 0.0;
  double dephase_partner = 0.0;
};

/// Spectrum from <0|rho_ss|0> of each active channel, same signal mapping
/// (and optional strain averaging) as the closed-form generator.
Spectrum oracle_spectrum(const PhysicalEnvironment& env, const DriveConfig& drive,
                         std::span<const double> grid, const LineDecay& decay,
                         double alpha, const OracleOptions& options = {},
                         const StrainDistribution* strain = nullptr);

}  // namespace odmr
