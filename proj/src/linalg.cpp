#include "homsteer/linalg.hpp"

#include <algorithm>

#include <Eigen/SVD>

namespace homsteer {

namespace {

int rank_from_singular_values(const Vector& sv, double rel_cutoff) {
  if (sv.size() == 0) return 0;
  const double top = std::max(sv.maxCoeff(), 1.0);
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) r += sv(i) > rel_cutoff * top;
  return r;
}

}  // namespace

void sign_fix_columns(Matrix& basis) {
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    for (Eigen::Index i = 0; i < basis.rows(); ++i) {
      if (std::abs(basis(i, j)) > 1e-12) {
        if (basis(i, j) < 0) basis.col(j) *= -1.0;
        break;
      }
    }
  }
}

Matrix nullspace(const Matrix& a, double rel_cutoff) {
  const auto n = a.cols();
  if (a.rows() == 0 || n == 0) {
    Matrix eye = Matrix::Identity(n, n);
    return eye;
  }
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeFullV);
  const int r = rank_from_singular_values(svd.singularValues(), rel_cutoff);
  Matrix basis = svd.matrixV().rightCols(n - r);
  sign_fix_columns(basis);
  return basis;
}

int numerical_rank(const Matrix& a, double rel_cutoff) {
  if (a.size() == 0) return 0;
  Eigen::BDCSVD<Matrix> svd(a);
  return rank_from_singular_values(svd.singularValues(), rel_cutoff);
}

Matrix random_uniform(int rows, int cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Matrix m(rows, cols);
  // Column-major fill keeps the draw order fixed.
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = unit(rng);
  return m;
}

}  // namespace homsteer
