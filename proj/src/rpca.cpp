#include "radf/rpca.hpp"

#include <algorithm>
#include <cmath>

#include "radf/errors.hpp"

namespace radf {

namespace {

Eigen::MatrixXd soft_threshold(const Eigen::MatrixXd& M, double t) {
  return M.unaryExpr([t](double v) {
    double a = std::abs(v) - t;
    return a > 0.0 ? (v > 0.0 ? a : -a) : 0.0;
  });
}

}  // namespace

double rpca_default_lambda(const Eigen::MatrixXd& X) {
  return 1.0 / std::sqrt(static_cast<double>(std::max(X.rows(), X.cols())));
}

RpcaResult rpca_decompose(const Eigen::MatrixXd& X, double lambda, double tol, int max_iters) {
  if (!(lambda > 0.0)) throw InvalidParams("lambda must be > 0");
  if (max_iters < 1) throw InvalidParams("max_iters must be >= 1");
  if (!X.allFinite()) throw InvalidParams("X must be finite");

  RpcaResult res;
  const double x_norm = X.norm();
  if (x_norm == 0.0) {
    res.low_rank = Eigen::MatrixXd::Zero(X.rows(), X.cols());
    res.sparse = Eigen::MatrixXd::Zero(X.rows(), X.cols());
    res.converged = true;
    return res;
  }

  Eigen::BDCSVD<Eigen::MatrixXd> svd0(X);
  const double norm_two = svd0.singularValues()(0);
  const double norm_inf = X.cwiseAbs().maxCoeff() / lambda;
  Eigen::MatrixXd Y = X / std::max(norm_two, norm_inf);
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(X.rows(), X.cols());
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(X.rows(), X.cols());

  double mu = 1.25 / norm_two;
  const double mu_bar = mu * 1e7;
  const double rho = 1.5;

  for (int it = 0; it < max_iters; ++it) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(X - S + Y / mu,
                                       Eigen::ComputeThinU | Eigen::ComputeThinV);
    Eigen::VectorXd sv = svd.singularValues();
    double nuclear = 0.0;
    for (int i = 0; i < sv.size(); ++i) {
      sv(i) = std::max(0.0, sv(i) - 1.0 / mu);
      nuclear += sv(i);
    }
    L = svd.matrixU() * sv.asDiagonal() * svd.matrixV().transpose();
    S = soft_threshold(X - L + Y / mu, lambda / mu);

    res.objective.push_back(nuclear + lambda * S.cwiseAbs().sum());
    res.iterations = it + 1;

    Eigen::MatrixXd Z = X - L - S;
    if (Z.norm() / x_norm <= tol) {
      res.converged = true;
      break;
    }
    Y += mu * Z;
    mu = std::min(mu * rho, mu_bar);
  }

  res.low_rank = std::move(L);
  res.sparse = std::move(S);
  return res;
}

}  // namespace radf
