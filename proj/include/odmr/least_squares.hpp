#pragma once

// Damped Gauss-Newton (Levenberg-Marquardt) minimiser of 0.5*|r(x)|^2 with a
// central-difference Jacobian.

#include <functional>
#include <string>

#include <Eigen/Dense>

namespace odmr {

using ResidualFn = std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& r)>;

struct LmOptions {
  int max_iterations = 500;
  double rel_cost_tol = 1e-10;
  double step_tol = 1e-12;
  double jacobian_rel_step = 1e-6;
  double initial_damping = 1e-3;
  double max_damping = 1e12;
};

struct LmResult {
  Eigen::VectorXd x;
  Eigen::VectorXd residual;
  Eigen::MatrixXd jacobian;  ///< at x
  double cost = 0.0;         ///< 0.5*|r|^2
  int iterations = 0;
  bool converged = false;
  std::string message;
};

/// Central differences with step rel_step*max(|x_i|, 1).
Eigen::MatrixXd numeric_jacobian(const ResidualFn& f, const Eigen::VectorXd& x,
                                 Eigen::Index m, double rel_step);

/// Throws ErrorCode::FitFailure when the normal equations stay singular past
/// max_damping; running out of iterations only clears `converged`.
LmResult levenberg_marquardt(const ResidualFn& f, const Eigen::VectorXd& x0,
                             Eigen::Index m, const LmOptions& options = {});

}  // namespace odmr
