#include "gtlproco/spectral.hpp"

#include "gtlproco/graph.hpp"

#include <algorithm>
#include <complex>
#include <vector>

namespace gtlproco {

bool is_scrambling(const Eigen::MatrixXi &adj) {
  if (adj.rows() != adj.cols())
    throw input_error("scrambling test needs a square adjacency matrix");
  const int n = static_cast<int>(adj.rows());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      bool share = false;
      for (int k = 0; k < n; ++k) {
        if (adj(i, k) != 0 && adj(j, k) != 0) {
          share = true;
          break;
        }
      }
      if (!share) return false;
    }
  }
  return true;
}

double ergodicity_coefficient(const Eigen::MatrixXd &M) {
  if (!is_column_stochastic(M, 1e-9))
    throw input_error("ergodicity coefficient needs a column-stochastic matrix");
  const int n = static_cast<int>(M.cols());
  double best = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      best = std::max(best, (M.col(i) - M.col(j)).cwiseAbs().sum());
  return 0.5 * best;
}

double second_eigenvalue_modulus(const Eigen::MatrixXd &M) {
  if (M.rows() != M.cols())
    throw input_error("second eigenvalue needs a square matrix");
  if (M.rows() < 2) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
  std::vector<double> mods(M.rows());
  for (int i = 0; i < M.rows(); ++i) mods[i] = std::abs(es.eigenvalues()(i));
  std::sort(mods.begin(), mods.end(), std::greater<>());
  return mods[1];
}

Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd &M) {
  if (!is_column_stochastic(M, 1e-9))
    throw input_error("stationary distribution needs a column-stochastic matrix");
  Eigen::EigenSolver<Eigen::MatrixXd> es(M, true);
  int best = 0;
  double best_dist = 1e30;
  for (int i = 0; i < M.rows(); ++i) {
    double d = std::abs(es.eigenvalues()(i) - std::complex<double>(1.0, 0.0));
    if (d < best_dist) {
      best_dist = d;
      best = i;
    }
  }
  if (best_dist > 1e-6)
    throw input_error("matrix has no eigenvalue at 1");
  Eigen::VectorXd v = es.eigenvectors().col(best).real();
  if (v.sum() < 0) v = -v;
  double s = v.sum();
  if (std::abs(s) < 1e-12)
    throw input_error("degenerate stationary eigenvector");
  v /= s;
  return v;
}

ReversibilizationRate reversibilization_rate(const Eigen::MatrixXd &M,
                                             const Eigen::VectorXd &nu) {
  if (M.rows() != M.cols() || nu.size() != M.rows())
    throw input_error("reversibilization rate: dimension mismatch");
  if ((nu.array() <= 0.0).any())
    throw input_error("reversibilization rate needs nu > 0");
  if ((M * nu - nu).cwiseAbs().maxCoeff() > 1e-8)
    throw input_error("nu is not stationary for M");

  const Eigen::VectorXd r = nu.array().sqrt().matrix();
  const Eigen::MatrixXd A =
      r.cwiseInverse().asDiagonal() * M * r.asDiagonal();
  const Eigen::MatrixXd F = A - r * r.transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(F);
  const double sigma = svd.singularValues().size() > 0
                           ? svd.singularValues()(0)
                           : 0.0;

  /* multiplicative reversibilization M diag(nu) M^T diag(nu)^-1 */
  const Eigen::MatrixXd R = M * nu.asDiagonal() * M.transpose() *
                            nu.cwiseInverse().asDiagonal();
  Eigen::EigenSolver<Eigen::MatrixXd> es(R, false);
  std::vector<double> mods(R.rows());
  for (int i = 0; i < R.rows(); ++i) mods[i] = std::abs(es.eigenvalues()(i));
  std::sort(mods.begin(), mods.end(), std::greater<>());
  const double lambda2 = R.rows() >= 2 ? mods[1] : 0.0;

  return ReversibilizationRate{sigma * sigma, lambda2};
}

} // namespace gtlproco
