#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"

#include "superres/errors.hpp"
#include "superres/numerics.hpp"

using namespace superres;
using namespace superres::numerics;

TEST_CASE("svd of simple matrices") {
  CHECK(svd(Matrix::Identity(3, 3)).S.isApprox(Vector::Ones(3)));
  Matrix D = Matrix::Zero(3, 3);
  D.diagonal() << 1.0, 3.0, 2.0;
  const Vector S = svd(D).S;
  CHECK(S[0] == 3.0);
  CHECK(S[1] == 2.0);
  CHECK(S[2] == 1.0);
  CHECK(sigma_max(D) == 3.0);
  CHECK(sigma_min(D) == 1.0);
}

TEST_CASE("svd reconstructs random 21x3 matrices") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix M = oracle::random_mat(rng, 21, 3);
    const Svd d = svd(M);
    const Matrix R = d.U * d.S.asDiagonal() * d.V.transpose();
    CHECK((R - M).norm() <= 1e-10 * M.norm());
    CHECK((d.S - oracle::singular_values(M)).norm() <= 1e-12 * d.S[0]);
  }
  Matrix bad = Matrix::Ones(2, 2);
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(svd(bad), NumericError);
}

TEST_CASE("least squares") {
  std::mt19937_64 rng(2);
  const Vector b = oracle::random_vec(rng, 4, -1, 1);
  CHECK(least_squares(Matrix::Identity(4, 4), b).isApprox(b, 1e-15));

  const Matrix A = oracle::random_mat(rng, 21, 3);
  const Vector x = oracle::random_vec(rng, 3, -1, 1);
  CHECK((least_squares(A, A * x) - x).norm() <= 1e-10 * x.norm());

  for (int trial = 0; trial < 20; ++trial) {
    const Matrix M = oracle::random_mat(rng, 21, 3);
    const Vector r = oracle::random_vec(rng, 21, -1, 1);
    const Vector ref = M.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(r);
    CHECK((least_squares(M, r) - ref).norm() <= 1e-8 * std::max(1.0, ref.norm()));
  }

  Matrix rank1(5, 2);
  rank1.col(0).setOnes();
  rank1.col(1).setOnes();
  CHECK_THROWS_AS(least_squares(rank1, Vector::Ones(5)), IllConditioned);
}

TEST_CASE("projection onto halfspaces and a box") {
  SUBCASE("no constraints, point inside the box") {
    const Vector p = Vector::LinSpaced(3, -0.5, 0.5);
    CHECK(qp_project(p, Matrix(0, 3), Vector(0), 1.0) == p);
  }
  SUBCASE("outside the box only") {
    Vector p(2);
    p << 3.0, -0.2;
    const Vector x = qp_project(p, Matrix(0, 2), Vector(0), 1.0);
    CHECK(x[0] == 1.0);
    CHECK(x[1] == -0.2);
  }
  SUBCASE("single violated halfspace") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
      const Vector a = oracle::random_vec(rng, 4, -1, 1);
      const Vector p = oracle::random_vec(rng, 4, -1, 1);
      const double b = a.dot(p) - 0.3;
      const Vector expect = p - (a.dot(p) - b) / a.squaredNorm() * a;
      if (expect.cwiseAbs().maxCoeff() > 100.0) continue;
      const Vector x = qp_project(p, a.transpose(), Vector::Constant(1, b), 100.0);
      CHECK((x - expect).norm() <= 1e-12);
    }
  }
  SUBCASE("empty set") {
    Matrix A(2, 1);
    A << 1.0, -1.0;
    Vector b(2);
    b << -1.0, -1.0;
    CHECK_THROWS_AS(qp_project(Vector::Zero(1), A, b, 10.0), Infeasible);
  }
}

TEST_CASE("projection against the penalty-continuation oracle") {
  std::mt19937_64 rng(4);
  int compared = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const Eigen::Index dim = 2 + trial % 4, r = 1 + (trial / 4) % 9;
    const Matrix A = oracle::random_mat(rng, r, dim);
    const Vector b = oracle::random_vec(rng, r, -0.5, 0.5);
    const Vector p = oracle::random_vec(rng, dim, -3, 3);
    Vector x;
    QpDiagnostics d;
    try {
      x = qp_project(p, A, b, 1.0, &d);
    } catch (const Infeasible&) {
      CHECK(oracle::lp_vertex_enum(A, -b, 1.0) > 0.0);
      continue;
    }
    const Vector ref = oracle::penalty_projection(p, A, b, 1.0);
    CHECK((x - ref).norm() <= 1e-5);
    CHECK(d.max_violation <= 1e-10);
    CHECK(d.stationarity <= 1e-10);
    ++compared;
  }
  CHECK(compared > 200);
}

TEST_CASE("projection properties") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix A = oracle::random_mat(rng, 6, 4);
    const Vector b = oracle::random_vec(rng, 6, 0.1, 1.0);
    const Vector p = oracle::random_vec(rng, 4, -5, 5);
    const Vector q = oracle::random_vec(rng, 4, -5, 5);
    const Vector x = qp_project(p, A, b, 2.0);
    const Vector y = qp_project(q, A, b, 2.0);
    CHECK((qp_project(x, A, b, 2.0) - x).norm() <= 1e-10);
    CHECK((x - y).norm() <= (p - q).norm() + 1e-12);
    CHECK((x - y).squaredNorm() <= (x - y).dot(p - q) + 1e-10);
    CHECK((A * x - b).maxCoeff() <= 1e-10);
    CHECK(x.cwiseAbs().maxCoeff() <= 2.0);
  }
}

TEST_CASE("piecewise-linear minimisation over a box") {
  SUBCASE("single affine piece") {
    std::mt19937_64 rng(6);
    const Vector g = oracle::random_vec(rng, 4, -1, 1);
    const double v = 0.7, tau = 3.0;
    const auto r = lp_min(g.transpose(), Vector::Constant(1, v), tau);
    CHECK(r.value == doctest::Approx(v - tau * g.lpNorm<1>()).epsilon(1e-12));
    for (Eigen::Index j = 0; j < 4; ++j) CHECK(r.argmin[j] == doctest::Approx(g[j] > 0 ? -tau : tau));
  }
  SUBCASE("duplicated pieces") {
    Vector g(2);
    g << 0.5, -2.0;
    Matrix S(3, 2);
    S << g.transpose(), g.transpose(), g.transpose();
    const auto one = lp_min(g.transpose(), Vector::Constant(1, 1.0), 2.0);
    const auto three = lp_min(S, Vector::Constant(3, 1.0), 2.0);
    CHECK(three.value == doctest::Approx(one.value).epsilon(1e-12));
    CHECK((three.argmin - one.argmin).norm() <= 1e-12);
  }
  SUBCASE("vertex enumeration") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 60; ++trial) {
      const auto d = 1 + trial % 3;
      const auto n = 2 + trial % 6;
      const Matrix S = oracle::random_mat(rng, n, d);
      const Vector o = oracle::random_vec(rng, n, -1, 1);
      const double ref = oracle::lp_vertex_enum(S, o, 1.5);
      const auto r = lp_min(S, o, 1.5);
      CHECK(std::abs(r.value - ref) <= 1e-10 * std::max(1.0, std::abs(ref)));
      CHECK(std::abs(r.primal - ref) <= 1e-10 * std::max(1.0, std::abs(ref)));
    }
  }
  SUBCASE("lower bound of the model at random feasible points") {
    std::mt19937_64 rng(8);
    const Matrix S = oracle::random_mat(rng, 12, 5);
    const Vector o = oracle::random_vec(rng, 12, -1, 1);
    const auto r = lp_min(S, o, 1.0);
    for (int i = 0; i < 100; ++i) {
      const Vector x = oracle::random_vec(rng, 5, -1, 1);
      CHECK(r.value <= (S * x + o).maxCoeff() + 1e-12);
    }
  }
  SUBCASE("warm start after appending pieces") {
    std::mt19937_64 rng(9);
    Matrix S = oracle::random_mat(rng, 4, 3);
    Vector o = oracle::random_vec(rng, 4, -1, 1);
    LpWarmStart warm;
    (void)lp_min(S, o, 1.0, &warm);
    Matrix S2(6, 3);
    S2 << S, oracle::random_mat(rng, 2, 3);
    Vector o2(6);
    o2 << o, oracle::random_vec(rng, 2, -1, 1);
    const auto warm_r = lp_min(S2, o2, 1.0, &warm);
    CHECK(warm_r.value == doctest::Approx(oracle::lp_vertex_enum(S2, o2, 1.0)).epsilon(1e-10));
  }
}
