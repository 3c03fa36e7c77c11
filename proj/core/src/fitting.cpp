#include "cavsim/fitting.hpp"

#include <cmath>

namespace cavsim {

LmResult levenberg_marquardt(const LmModel& model, Eigen::VectorXd initial,
                             int n_residuals, const LmOptions& opt) {
  const int np = int(initial.size());
  Eigen::VectorXd p = std::move(initial);
  Eigen::VectorXd r(n_residuals);
  Eigen::MatrixXd J(n_residuals, np);
  model(p, r, J);
  double cost = r.squaredNorm();
  double lambda = opt.lambda0;

  LmResult res;
  for (int it = 0; it < opt.max_iterations; ++it) {
    res.iterations = it + 1;
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * r;
    Eigen::MatrixXd A = JtJ;
    for (int i = 0; i < np; ++i) A(i, i) += lambda * std::max(JtJ(i, i), 1e-30);
    const Eigen::VectorXd step = A.ldlt().solve(-g);
    if (!step.allFinite()) break;

    Eigen::VectorXd p_try = p + step;
    Eigen::VectorXd r_try(n_residuals);
    Eigen::MatrixXd J_try(n_residuals, np);
    model(p_try, r_try, J_try);
    const double cost_try = r_try.squaredNorm();
    if (cost_try < cost) {
      const double rel = (cost - cost_try) / std::max(cost, 1e-300);
      p = p_try;
      r = r_try;
      J = J_try;
      cost = cost_try;
      lambda = std::max(lambda * 0.3, 1e-12);
      if (rel < opt.tolerance) {
        res.converged = true;
        break;
      }
    } else {
      lambda *= 10.0;
      if (lambda > 1e12) break;
    }
  }
  // Accept a stuck-at-minimum fit (gradient already tiny) as converged.
  if (!res.converged) {
    const double gnorm = (J.transpose() * r).norm();
    if (gnorm < 1e-8 * std::max(1.0, cost)) res.converged = true;
  }

  res.parameters = p;
  res.residual_norm = std::sqrt(cost);
  // Covariance estimate: s^2 (J^T J)^-1 with s^2 = cost / dof.
  res.uncertainties = Eigen::VectorXd::Zero(np);
  const int dof = n_residuals - np;
  if (dof > 0) {
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    const Eigen::MatrixXd cov = JtJ.completeOrthogonalDecomposition().pseudoInverse() *
                                (cost / dof);
    for (int i = 0; i < np; ++i)
      res.uncertainties[i] = std::sqrt(std::max(cov(i, i), 0.0));
  }
  return res;
}

}  // namespace cavsim
