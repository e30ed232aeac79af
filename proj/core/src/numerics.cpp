#include "superres/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "superres/errors.hpp"

namespace superres::numerics {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_finite(const Matrix& M, const char* what) {
  if (!M.allFinite()) throw NumericError(std::string(what) + ": non-finite entries");
}

}  // namespace

Svd svd(const Matrix& M) {
  require_finite(M, "svd");
  if (M.size() == 0) return {Matrix(M.rows(), 0), Vector(0), Matrix(M.cols(), 0)};
  Eigen::JacobiSVD<Matrix> dec(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (dec.info() != Eigen::Success) throw NumericError("svd did not converge");
  return {dec.matrixU(), dec.singularValues(), dec.matrixV()};
}

double sigma_min(const Matrix& M) {
  require_finite(M, "sigma_min");
  if (M.size() == 0) return 0.0;
  const Vector s = Eigen::JacobiSVD<Matrix>(M).singularValues();
  // A wide matrix has min(rows, cols) singular values; a square or tall one
  // reports all of them.
  return s[s.size() - 1];
}

double sigma_max(const Matrix& M) {
  require_finite(M, "sigma_max");
  if (M.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(M).singularValues()[0];
}

Vector least_squares(const Matrix& A, const Vector& b) {
  if (A.rows() < A.cols()) throw InvalidArgument("least_squares needs rows >= cols");
  if (A.rows() != b.size()) throw InvalidArgument("least_squares: dimension mismatch");
  const Svd d = svd(A);
  if (d.S.size() == 0) return Vector(0);
  const double smax = d.S[0];
  const double smin = d.S[d.S.size() - 1];
  if (!(smin >= 1e-12 * smax) || smax == 0.0) {
    throw IllConditioned("least-squares matrix is rank deficient", smin);
  }
  const Vector ub = d.U.transpose() * b;
  return d.V * ub.cwiseQuotient(d.S);
}

// ---------------------------------------------------------------------------
// Projection QP.
//
// min ||x - p|| s.t. A x <= b, |x_j| <= box, as a least-distance program
// min ||z|| s.t. G z >= h with unit-norm rows G = -A_hat, h = A_hat p - b_hat,
// solved through NNLS on E = [G^T; h^T], f = e_{m+1} (Lawson & Hanson, ch. 23).
// The NNLS passive set names the active constraints; the answer is then
// polished by an exact projection onto their intersection.

namespace {

struct Nnls {
  Vector u;
  std::vector<Eigen::Index> passive;
  int iterations = 0;
};

Nnls nnls(const Matrix& E, const Vector& f, int cap) {
  const Eigen::Index n = E.cols();
  Nnls out;
  out.u = Vector::Zero(n);
  std::vector<char> in_p(static_cast<std::size_t>(n), 0);
  const Matrix Eabs = E.cwiseAbs();

  auto solve_passive = [&](Vector& z) {
    const auto k = static_cast<Eigen::Index>(out.passive.size());
    Matrix Ep(E.rows(), k);
    for (Eigen::Index c = 0; c < k; ++c) Ep.col(c) = E.col(out.passive[static_cast<std::size_t>(c)]);
    Eigen::ColPivHouseholderQR<Matrix> qr(Ep);
    qr.setThreshold(1e-13);
    z = qr.solve(f);
  };

  for (;;) {
    const Vector w = E.transpose() * (f - E * out.u);
    const double tol = 1e-14 * std::max(1.0, (Eabs * out.u).maxCoeff());
    Eigen::Index t = -1;
    double wmax = tol;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (in_p[static_cast<std::size_t>(j)]) continue;
      if (w[j] > wmax) {
        wmax = w[j];
        t = j;
      }
    }
    if (t < 0) break;
    if (++out.iterations > cap) throw NumericError("qp_project: NNLS iteration cap reached");

    out.passive.push_back(t);
    in_p[static_cast<std::size_t>(t)] = 1;
    for (;;) {
      Vector z;
      solve_passive(z);
      bool positive = true;
      for (Eigen::Index c = 0; c < z.size(); ++c) positive = positive && z[c] > 0.0;
      if (positive) {
        for (std::size_t c = 0; c < out.passive.size(); ++c) {
          out.u[out.passive[c]] = z[static_cast<Eigen::Index>(c)];
        }
        break;
      }
      double alpha = 1.0;
      Eigen::Index block = -1;
      for (std::size_t c = 0; c < out.passive.size(); ++c) {
        const double zc = z[static_cast<Eigen::Index>(c)];
        if (zc <= 0.0) {
          const double uc = out.u[out.passive[c]];
          const double a = uc / (uc - zc);
          if (a < alpha || block < 0) {
            alpha = std::min(alpha, a);
            block = out.passive[c];
          }
        }
      }
      for (std::size_t c = 0; c < out.passive.size(); ++c) {
        const Eigen::Index j = out.passive[c];
        out.u[j] += alpha * (z[static_cast<Eigen::Index>(c)] - out.u[j]);
      }
      if (block >= 0) out.u[block] = 0.0;
      std::vector<Eigen::Index> keep;
      for (auto j : out.passive) {
        if (out.u[j] > 0.0) {
          keep.push_back(j);
        } else {
          out.u[j] = 0.0;
          in_p[static_cast<std::size_t>(j)] = 0;
        }
      }
      out.passive.swap(keep);
      if (out.passive.empty()) break;
    }
  }
  return out;
}

}  // namespace

Vector qp_project(const Vector& point, const Matrix& A, const Vector& b, double box,
                  QpDiagnostics* diag) {
  constexpr double kFeasTol = 1e-7;
  const Eigen::Index m = point.size();
  if (A.cols() != m || A.rows() != b.size()) throw InvalidArgument("qp_project: dimension mismatch");
  if (!(box > 0.0)) throw InvalidArgument("qp_project: box must be positive");
  require_finite(A, "qp_project");
  require_finite(point, "qp_project");

  // Stack cuts and box rows with unit normals.
  const Eigen::Index n = A.rows() + 2 * m;
  Matrix N(n, m);
  Vector rhs(n);
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    const double nrm = A.row(i).norm();
    if (nrm == 0.0) {
      if (b[i] < 0.0) throw Infeasible("qp_project: constraint 0 <= b_i with b_i < 0");
      N.row(i).setZero();
      rhs[i] = 0.0;
      continue;
    }
    N.row(i) = A.row(i) / nrm;
    rhs[i] = b[i] / nrm;
  }
  N.bottomRows(2 * m).setZero();
  for (Eigen::Index j = 0; j < m; ++j) {
    N(A.rows() + j, j) = 1.0;
    N(A.rows() + m + j, j) = -1.0;
  }
  rhs.tail(2 * m).setConstant(box);

  const double xscale = std::max(1.0, point.lpNorm<Eigen::Infinity>());
  auto violation = [&](const Vector& x) {
    return ((N * x - rhs).array() / (rhs.cwiseAbs().array() + xscale)).maxCoeff();
  };

  Vector x = point;
  int iters = 0;
  std::vector<Eigen::Index> active;
  Vector mult;
  if (violation(point) > 1e-15) {
    Matrix E(m + 1, n);
    E.topRows(m) = -N.transpose();
    // Distances far above one would cancel in r_m = h^T u - 1; solve for z / s.
    const Vector h = N * point - rhs;
    const double s = std::max(1.0, h.maxCoeff());
    E.row(m) = (h / s).transpose();
    Vector f = Vector::Zero(m + 1);
    f[m] = 1.0;
    const Nnls sol = nnls(E, f, static_cast<int>(10 * n + 100));
    iters = sol.iterations;
    const Vector r = E * sol.u - f;
    if (!(r[m] < -1e-14)) throw Infeasible("qp_project: constraint set is empty");
    x = point - s * (r.head(m) / r[m]);
    active = sol.passive;

    // Refine the working set on exact equality projections until KKT holds.
    std::vector<Eigen::Index> work;
    for (auto a : active) {
      if (N.row(a).squaredNorm() > 0.0) work.push_back(a);
    }
    const int passes = static_cast<int>(4 * n + 20);
    Vector best = x;
    double best_viol = violation(x);
    bool kkt = false;
    for (int pass = 0; pass < passes; ++pass) {
      Vector mu(static_cast<Eigen::Index>(work.size()));
      Vector xp = point;
      if (!work.empty()) {
        Matrix Na(static_cast<Eigen::Index>(work.size()), m);
        Vector ba(Na.rows());
        for (Eigen::Index k = 0; k < Na.rows(); ++k) {
          Na.row(k) = N.row(work[static_cast<std::size_t>(k)]);
          ba[k] = rhs[work[static_cast<std::size_t>(k)]];
        }
        const Vector d = Na.completeOrthogonalDecomposition().solve(Na * point - ba);
        xp = point - d;
        mu = Matrix(Na.transpose()).completeOrthogonalDecomposition().solve(d);
      }
      if (!xp.allFinite()) break;
      const double v = violation(xp);
      if (v < best_viol) {
        best_viol = v;
        best = xp;
      }
      Eigen::Index drop = -1;
      const double mtol = -1e-12 * std::max(1.0, mu.size() ? mu.cwiseAbs().maxCoeff() : 0.0);
      for (Eigen::Index k = 0; k < mu.size(); ++k) {
        if (mu[k] < mtol && (drop < 0 || mu[k] < mu[drop])) drop = k;
      }
      if (drop >= 0) {
        work.erase(work.begin() + drop);
        continue;
      }
      const Vector rel = (N * xp - rhs).array() / (rhs.cwiseAbs().array() + xscale);
      Eigen::Index add = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (rel[i] > 1e-13 && std::find(work.begin(), work.end(), i) == work.end() &&
            (add < 0 || rel[i] > rel[add])) {
          add = i;
        }
      }
      if (add >= 0) {
        work.push_back(add);
        continue;
      }
      x = xp;
      mult = mu;
      active = work;
      kkt = true;
      break;
    }
    // Ill-conditioned working sets can cycle; fall back to the least infeasible candidate.
    if (!kkt) x = best;
  }
  // Clip box rounding.
  x = x.cwiseMax(-box).cwiseMin(box);
  if (!x.allFinite() || violation(x) > kFeasTol) throw Infeasible("qp_project: constraint set is empty");

  if (diag) {
    diag->iterations = iters;
    diag->active = active.size();
    diag->max_violation = std::max(0.0, (A * x - b).maxCoeff());
    if (mult.size() == static_cast<Eigen::Index>(active.size()) && !active.empty()) {
      Vector stat = x - point;
      for (std::size_t k = 0; k < active.size(); ++k) {
        stat += mult[static_cast<Eigen::Index>(k)] * N.row(active[k]).transpose();
      }
      diag->stationarity = stat.lpNorm<Eigen::Infinity>();
    } else {
      diag->stationarity = 0.0;
    }
  }
  return x;
}

Vector qp_project(const Vector& point, const Matrix& A, const Vector& b, double box) {
  return qp_project(point, A, b, box, nullptr);
}

// ---------------------------------------------------------------------------
// Cutting-plane LP.
//
// Primal: min r  s.t. r >= c_i + g_i . x,  |x_j| <= box.
// Dual (solved): min -c.theta + box * sum(u + v)
//                s.t. sum theta = 1,  G^T theta - u + v = 0,  theta, u, v >= 0.
// Variable order u_0..u_{m-1}, v_0..v_{m-1}, theta_0..theta_{n-1} keeps
// indices stable when cuts are appended. The simplex multipliers of the
// optimal basis are (-r, x).

namespace {

class DualLp {
 public:
  DualLp(const Matrix& G, const Vector& c, double box)
      : G_(G), c_(c), box_(box), m_(G.cols()), n_(G.rows()) {}

  Eigen::Index rows() const { return m_ + 1; }
  Eigen::Index vars() const { return 2 * m_ + n_; }

  Vector column(Eigen::Index k) const {
    Vector a = Vector::Zero(m_ + 1);
    if (k < m_) {
      a[1 + k] = -1.0;
    } else if (k < 2 * m_) {
      a[1 + k - m_] = 1.0;
    } else {
      a[0] = 1.0;
      a.tail(m_) = G_.row(k - 2 * m_).transpose();
    }
    return a;
  }

  double cost(Eigen::Index k) const { return k < 2 * m_ ? box_ : -c_[k - 2 * m_]; }

  std::vector<Eigen::Index> cold_basis() const {
    Eigen::Index best = 0;
    double best_val = -kInf;
    for (Eigen::Index i = 0; i < n_; ++i) {
      const double v = c_[i] - box_ * G_.row(i).lpNorm<1>();
      if (v > best_val) {
        best_val = v;
        best = i;
      }
    }
    std::vector<Eigen::Index> basis{2 * m_ + best};
    for (Eigen::Index j = 0; j < m_; ++j) basis.push_back(G_(best, j) >= 0.0 ? j : m_ + j);
    return basis;
  }

  const Matrix& G() const { return G_; }
  const Vector& c() const { return c_; }
  double box() const { return box_; }
  Eigen::Index m() const { return m_; }
  Eigen::Index n() const { return n_; }

 private:
  const Matrix& G_;
  const Vector& c_;
  double box_;
  Eigen::Index m_;
  Eigen::Index n_;
};

}  // namespace

LpResult lp_min(const Matrix& slopes, const Vector& offsets, double box, LpWarmStart* warm) {
  if (slopes.rows() == 0) throw InvalidArgument("lp_min needs at least one affine piece");
  if (slopes.rows() != offsets.size()) throw InvalidArgument("lp_min: dimension mismatch");
  if (!(box > 0.0)) throw InvalidArgument("lp_min: box must be positive");
  require_finite(slopes, "lp_min");

  const DualLp lp(slopes, offsets, box);
  const Eigen::Index R = lp.rows();
  Vector rhs = Vector::Zero(R);
  rhs[0] = 1.0;

  auto factor = [&](const std::vector<Eigen::Index>& basis, Eigen::PartialPivLU<Matrix>& lu) {
    Matrix B(R, R);
    for (Eigen::Index k = 0; k < R; ++k) B.col(k) = lp.column(basis[static_cast<std::size_t>(k)]);
    lu.compute(B);
    return std::abs(lu.determinant()) > 1e-300;
  };

  std::vector<Eigen::Index> basis;
  Eigen::PartialPivLU<Matrix> lu;
  Vector xb;
  bool have = false;
  if (warm && static_cast<Eigen::Index>(warm->basis.size()) == R) {
    basis = warm->basis;
    bool in_range = true;
    for (auto k : basis) in_range = in_range && k >= 0 && k < lp.vars();
    if (in_range && factor(basis, lu)) {
      xb = lu.solve(rhs);
      have = xb.allFinite() && xb.minCoeff() >= -1e-9;
    }
  }
  if (!have) {
    basis = lp.cold_basis();
    factor(basis, lu);
    xb = lu.solve(rhs);
  }

  const int cap = static_cast<int>(50 * lp.vars() + 1000);
  int pivots = 0;
  int degenerate_run = 0;
  std::vector<char> is_basic(static_cast<std::size_t>(lp.vars()), 0);
  for (auto k : basis) is_basic[static_cast<std::size_t>(k)] = 1;

  Vector pi(R);
  for (;;) {
    Vector cb(R);
    for (Eigen::Index k = 0; k < R; ++k) cb[k] = lp.cost(basis[static_cast<std::size_t>(k)]);
    pi = lu.transpose().solve(cb);

    // Pricing. theta columns vectorised; u, v closed form.
    const Vector gpi = lp.G() * pi.tail(lp.m());
    const bool bland = degenerate_run > 30;
    Eigen::Index enter = -1;
    double best = 0.0;
    for (Eigen::Index k = 0; k < lp.vars(); ++k) {
      if (is_basic[static_cast<std::size_t>(k)]) continue;
      double d;
      double scale;
      if (k < lp.m()) {
        d = box + pi[1 + k];
        scale = box + std::abs(pi[1 + k]);
      } else if (k < 2 * lp.m()) {
        d = box - pi[1 + k - lp.m()];
        scale = box + std::abs(pi[1 + k - lp.m()]);
      } else {
        const Eigen::Index i = k - 2 * lp.m();
        d = -lp.c()[i] - pi[0] - gpi[i];
        scale = std::abs(lp.c()[i]) + std::abs(pi[0]) +
                lp.G().row(i).cwiseAbs().dot(pi.tail(lp.m()).cwiseAbs());
      }
      if (d >= -1e-14 * std::max(1.0, scale)) continue;
      if (bland) {
        enter = k;
        break;
      }
      const double score = d / std::max(1.0, scale);
      if (score < best) {
        best = score;
        enter = k;
      }
    }
    if (enter < 0) break;

    if (++pivots > cap) throw NumericError("lp_min: pivot cap reached");
    const Vector dir = lu.solve(lp.column(enter));
    Eigen::Index leave = -1;
    double ratio = kInf;
    for (Eigen::Index k = 0; k < R; ++k) {
      if (dir[k] <= 1e-11) continue;
      const double rk = std::max(0.0, xb[k]) / dir[k];
      const bool better = rk < ratio - 1e-15 ||
          (rk <= ratio + 1e-15 && leave >= 0 &&
           (bland ? basis[static_cast<std::size_t>(k)] < basis[static_cast<std::size_t>(leave)]
                  : dir[k] > dir[leave]));
      if (leave < 0 || better) {
        ratio = rk;
        leave = k;
      }
    }
    if (leave < 0) throw NumericError("lp_min: dual unbounded (primal infeasible)");
    degenerate_run = ratio <= 1e-14 ? degenerate_run + 1 : 0;

    is_basic[static_cast<std::size_t>(basis[static_cast<std::size_t>(leave)])] = 0;
    basis[static_cast<std::size_t>(leave)] = enter;
    is_basic[static_cast<std::size_t>(enter)] = 1;
    if (!factor(basis, lu)) throw NumericError("lp_min: singular basis");
    xb = lu.solve(rhs);
  }

  // Dual objective at the (cleaned) theta is a valid lower bound.
  Vector theta = Vector::Zero(lp.n());
  for (Eigen::Index k = 0; k < R; ++k) {
    const Eigen::Index v = basis[static_cast<std::size_t>(k)];
    if (v >= 2 * lp.m()) theta[v - 2 * lp.m()] = std::max(0.0, xb[k]);
  }
  theta /= theta.sum();
  const double lower = theta.dot(offsets) - box * (slopes.transpose() * theta).lpNorm<1>();

  Vector x = pi.tail(lp.m()).cwiseMax(-box).cwiseMin(box);
  const double upper = (offsets + slopes * x).maxCoeff();

  if (warm) warm->basis = basis;
  return {std::min(lower, upper), x, upper, pivots};
}

}  // namespace superres::numerics
