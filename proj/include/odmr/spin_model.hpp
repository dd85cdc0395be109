#pragma once

// NV ground-state spin model: lab-frame Hamiltonian, rotating-frame
// reduction onto {|0>, |B>, |D>}, dressed resonances and the strain
// suppression law.
//
// Every energy is a linear frequency in MHz and every drive amplitude is
// stored as a Rabi frequency (gyromagnetic ratio already applied).

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace odmr {

/// Electron gyromagnetic ratio, MHz/mT. Only used to convert field inputs.
inline constexpr double kGammaE = 28.025;

/// Literature temperature slope of the zero-field splitting, MHz/K.
inline constexpr double kDefaultDdDt = -0.0742;

struct PhysicalEnvironment {
  double d0 = 2870.0;          ///< zero-field splitting at t0, MHz
  double t0 = 300.0;           ///< reference temperature, K
  double dd_dt = kDefaultDdDt; ///< MHz/K
  double ex = 0.0;             ///< strain splitting along x, MHz
  double ey = 0.0;             ///< strain along y, MHz
  double b_transverse = 0.0;   ///< g mu_B B_x, MHz
  double b_parallel = 0.0;     ///< gamma_e B_z, MHz
  double temperature = 300.0;  ///< K
};

enum class FieldMode { ZeroField, Transverse, Parallel };

/// Throws InvalidArgument when both field components are set or d0 <= 0.
FieldMode field_mode(const PhysicalEnvironment& env);

/// Non-fatal checks of D >> gmuB Bx >> Ey for the dressed-state reduction.
std::vector<std::string> regime_warnings(const PhysicalEnvironment& env);

struct DriveConfig {
  double omega_mw = 0.0;  ///< MW frequency, MHz
  double rabi_mw = 0.0;   ///< gamma_e B_MW^(x), couples |0> <-> |B>
  double omega_rf = 0.0;  ///< RF frequency, MHz
  double rabi_rf = 0.0;   ///< gamma_e B_RF^(z), couples |B> <-> |D>
  double rabi_mw_y = 0.0; ///< gamma_e B_MW^(y), couples |0> <-> |D>
};

void validate(const DriveConfig& drive);

enum class SpinBasis {
  Zeeman,     ///< {|+1>, |0>, |-1>}
  BrightDark, ///< {|0>, |B>, |D>}
};

struct SpinMatrix {
  Eigen::Matrix3cd m = Eigen::Matrix3cd::Zero();
  SpinBasis basis = SpinBasis::Zeeman;

  bool is_hermitian(double tol = 1e-12) const;
  /// Ascending eigenvalues of the Hermitian part.
  Eigen::Vector3d eigenvalues() const;
};

/// Spin-1 operators in the {|+1>, |0>, |-1>} basis.
Eigen::Matrix3cd spin_x();
Eigen::Matrix3cd spin_y();
Eigen::Matrix3cd spin_z();

/// Unitary taking {|+1>,|0>,|-1>} amplitudes to {|0>,|B>,|D>} amplitudes.
Eigen::Matrix3cd zeeman_to_bright_dark();

double zero_field_splitting(const PhysicalEnvironment& env, double temperature);

inline double zero_field_splitting(const PhysicalEnvironment& env) {
  return zero_field_splitting(env, env.temperature);
}

/// Instantaneous lab-frame Hamiltonian at time t (microseconds).
SpinMatrix build_lab_hamiltonian(const PhysicalEnvironment& env,
                                 const DriveConfig& drive, double t_us);

/// Which RF-dressed pair the MW probes.
///
/// Bright: MW drives |0>-|B> and the RF dresses |B> with |D> by absorption;
/// resonances at D + w_RF/2 +- root/2.
/// Mirror: the y-polarised MW drives |0>-|D> and the RF dresses |D> with |B>
/// by emission; resonances at D - w_RF/2 +- root/2.
enum class Channel { Bright, Mirror };

/// Rotating-frame detunings of the MW-driven mode and its RF partner.
struct ModeDetunings {
  double driven = 0.0;
  double partner = 0.0;
};

/// Bright: driven = D(T)+Ex-w_MW, partner = D(T)-Ex-w_MW+w_RF.
/// Mirror: driven = D(T)-Ex-w_MW, partner = D(T)+Ex-w_MW-w_RF.
ModeDetunings mode_detunings(const PhysicalEnvironment& env, double omega_mw,
                             double omega_rf, Channel channel);

/// Static single-excitation rotating-frame Hamiltonian in {|0>,|B>,|D>}.
SpinMatrix build_rotating_hamiltonian(const PhysicalEnvironment& env,
                                      const DriveConfig& drive,
                                      Channel channel = Channel::Bright);

/// The four MW resonances of the RF-dressed system, ascending.
std::array<double, 4> dressed_resonances(double d, double ex, double omega_rf,
                                         double rabi_rf);

/// Residual resonance spread left by a strain spread delta_ex under RF
/// dressing of strength rabi_rf. exact=false uses the leading Taylor term,
/// which is undefined for rabi_rf == 0 (throws ErrorCode::Domain).
double residual_broadening(double delta_ex, double rabi_rf, bool exact);

}  // namespace odmr
