#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace superres::numerics {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct Svd {
  Matrix U;  ///< thin, rows x r
  Vector S;  ///< non-negative, descending
  Matrix V;  ///< cols x r
};

/// Thin SVD with singular values sorted descending. Throws NumericError on
/// non-finite input.
Svd svd(const Matrix& M);

double sigma_min(const Matrix& M);
double sigma_max(const Matrix& M);

/// argmin_x ||A x - b||_2 for rows >= cols. Throws IllConditioned when
/// sigma_min(A) < 1e-12 sigma_max(A).
Vector least_squares(const Matrix& A, const Vector& b);

/// Euclidean projection of `point` onto {x : A x <= b, |x_j| <= box}.
/// Least-distance dual solved by Lawson-Hanson NNLS, then working-set
/// refinement on exact equality projections until KKT holds. Rows are
/// normalised; a result whose violation exceeds 1e-7 (|b_i| + max(1, |point|_inf))
/// throws Infeasible.
Vector qp_project(const Vector& point, const Matrix& A, const Vector& b, double box);

struct QpDiagnostics {
  int iterations = 0;
  std::size_t active = 0;
  double max_violation = 0.0;
  double stationarity = 0.0;  ///< ||x - point + A_W^T u||_inf
};
Vector qp_project(const Vector& point, const Matrix& A, const Vector& b, double box,
                  QpDiagnostics* diag);

/// Basis of the dual simplex tableau, reusable across calls when rows are
/// only appended to the LP.
struct LpWarmStart {
  std::vector<Eigen::Index> basis;
};

struct LpResult {
  double value;     ///< dual objective of the final basis: a certified lower bound
  Vector argmin;    ///< primal minimiser, clipped to the box
  double primal;    ///< max_i (offsets_i + slopes_i . argmin)
  int pivots;
};

/// min over |x|_inf <= box of max_i (offsets_i + slopes.row(i) . x).
/// Solved as the equality-form dual with a revised simplex; slopes has one
/// row per affine piece.
LpResult lp_min(const Matrix& slopes, const Vector& offsets, double box,
                LpWarmStart* warm = nullptr);

}  // namespace superres::numerics
