#pragma once

#include <Eigen/Dense>
#include <vector>

namespace radf {

/// Low-rank + sparse split of an observation matrix.
struct RpcaResult {
  Eigen::MatrixXd low_rank;
  Eigen::MatrixXd sparse;
  bool converged = false;
  int iterations = 0;
  /// Nuclear norm of L plus lambda * l1 norm of S, one entry per iteration.
  std::vector<double> objective;
};

/// Principal Component Pursuit via the inexact augmented Lagrangian method:
/// singular-value thresholding for the low-rank term, elementwise
/// soft-thresholding for the sparse term. Stops when
/// ||X - L - S||_F / ||X||_F <= tol. On hitting max_iters the best iterate
/// is returned with converged == false.
RpcaResult rpca_decompose(const Eigen::MatrixXd& X, double lambda, double tol = 1e-7,
                          int max_iters = 500);

/// Standard PCP weight 1/sqrt(max(n, m)).
double rpca_default_lambda(const Eigen::MatrixXd& X);

}  // namespace radf
