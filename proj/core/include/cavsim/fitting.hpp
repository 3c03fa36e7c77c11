#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace cavsim {

// Damped least-squares (Levenberg-Marquardt) with analytic Jacobians.
// The model callback fills residuals r_i = model(x_i; p) - y_i and the
// Jacobian dr_i/dp_j for the current parameter vector.
struct LmOptions {
  int max_iterations = 200;
  double tolerance = 1e-12;     // relative change in cost
  double lambda0 = 1e-3;
};

struct LmResult {
  Eigen::VectorXd parameters;
  Eigen::VectorXd uncertainties;  // 1-sigma, from the covariance estimate
  double residual_norm = 0.0;
  bool converged = false;
  int iterations = 0;
};

using LmModel = std::function<void(const Eigen::VectorXd& params,
                                   Eigen::VectorXd& residuals,
                                   Eigen::MatrixXd& jacobian)>;

LmResult levenberg_marquardt(const LmModel& model, Eigen::VectorXd initial,
                             int n_residuals, const LmOptions& opt = {});

}  // namespace cavsim
