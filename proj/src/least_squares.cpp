#include "odmr/least_squares.hpp"

#include <cmath>
#include <limits>

#include "odmr/error.hpp"

namespace odmr {

Eigen::MatrixXd numeric_jacobian(const ResidualFn& f, const Eigen::VectorXd& x,
                                 Eigen::Index m, double rel_step) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd jac(m, n);
  Eigen::VectorXd xp = x, xm = x, rp(m), rm(m);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double h = rel_step * std::max(std::abs(x(k)), 1.0);
    xp(k) = x(k) + h;
    xm(k) = x(k) - h;
    f(xp, rp);
    f(xm, rm);
    jac.col(k) = (rp - rm) / (xp(k) - xm(k));
    xp(k) = xm(k) = x(k);
  }
  return jac;
}

namespace {

double half_sq_norm(const Eigen::VectorXd& r) {
  if (!r.allFinite()) return std::numeric_limits<double>::infinity();
  return 0.5 * r.squaredNorm();
}

}  // namespace

LmResult levenberg_marquardt(const ResidualFn& f, const Eigen::VectorXd& x0,
                             Eigen::Index m, const LmOptions& opt) {
  LmResult out;
  out.x = x0;
  out.residual.resize(m);
  f(out.x, out.residual);
  out.cost = half_sq_norm(out.residual);
  if (!std::isfinite(out.cost)) {
    throw Error(ErrorCode::FitFailure, "least squares: residual not finite at start");
  }
  const Eigen::Index n = x0.size();
  if (n == 0) {
    out.converged = true;
    out.message = "no free parameters";
    out.jacobian.resize(m, 0);
    return out;
  }

  double mu = opt.initial_damping;
  Eigen::VectorXd trial(n), r_trial(m);
  for (out.iterations = 1; out.iterations <= opt.max_iterations; ++out.iterations) {
    out.jacobian = numeric_jacobian(f, out.x, m, opt.jacobian_rel_step);
    const Eigen::MatrixXd a = out.jacobian.transpose() * out.jacobian;
    const Eigen::VectorXd g = out.jacobian.transpose() * out.residual;
    const double diag_floor = 1e-12 * std::max(a.diagonal().maxCoeff(), 1e-300);

    bool accepted = false;
    bool singular_only = true;
    Eigen::VectorXd step;
    double new_cost = out.cost;
    while (mu <= opt.max_damping) {
      Eigen::MatrixXd damped = a;
      for (Eigen::Index k = 0; k < n; ++k) {
        damped(k, k) += mu * std::max(a(k, k), diag_floor);
      }
      Eigen::LDLT<Eigen::MatrixXd> ldlt(damped);
      step = ldlt.solve(-g);
      if (ldlt.info() != Eigen::Success || !step.allFinite()) {
        mu *= 10.0;
        continue;
      }
      singular_only = false;
      trial = out.x + step;
      f(trial, r_trial);
      new_cost = half_sq_norm(r_trial);
      if (new_cost < out.cost) {
        accepted = true;
        break;
      }
      mu *= 4.0;
    }

    if (!accepted) {
      if (singular_only) {
        throw Error(ErrorCode::FitFailure,
                    "least squares: normal equations singular beyond damping 1e12");
      }
      // no descent at any damping: stationary to working precision
      out.converged = true;
      out.message = "stationary point (damping limit)";
      return out;
    }

    const double old_cost = out.cost;
    out.x = trial;
    out.residual = r_trial;
    out.cost = new_cost;
    mu = std::max(mu / 3.0, 1e-15);

    const double rel_change = (old_cost - new_cost) / std::max(old_cost, 1e-300);
    if (rel_change < opt.rel_cost_tol) {
      out.converged = true;
      out.message = "relative cost change below tolerance";
      break;
    }
    if (step.norm() < opt.step_tol * (1.0 + out.x.norm())) {
      out.converged = true;
      out.message = "step norm below tolerance";
      break;
    }
    if (out.cost < 1e-300) {
      out.converged = true;
      out.message = "zero residual";
      break;
    }
  }
  if (!out.converged) {
    out.iterations = opt.max_iterations;
    out.message = "iteration limit reached";
  }
  out.jacobian = numeric_jacobian(f, out.x, m, opt.jacobian_rel_step);
  return out;
}

}  // namespace odmr
