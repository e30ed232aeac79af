#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"

#include "superres/certificate.hpp"
#include "superres/errors.hpp"
#include "superres/solver.hpp"

using namespace superres;

namespace {

PenaltyProblem two_sources(double Pi = 3.0) {
  const SourceModel src({0.3, 0.7}, {1.0, 0.6});
  const Kernel k(0.1);
  return PenaltyProblem(synthesize(src, SampleGrid::equispaced(5), k), k, Pi, 10.0);
}

double brute_psi(const PenaltyProblem& p, const Vector& l) {
  const Certificate c = p.certificate(l);
  const double sup = oracle::grid_max([&](double t) { return c.eval(t); }, 1'000'000).value;
  return -p.y().dot(l) + p.Pi() * std::max(sup - 1.0, 0.0);
}

Cut make_cut(const Vector& anchor, double value, const Vector& slope) { return Cut{anchor, value, slope}; }

}  // namespace

TEST_CASE("objective") {
  std::mt19937_64 rng(1);
  const PenaltyProblem p = two_sources();
  CHECK(psi(p, Vector::Zero(5)) == 0.0);

  const Kernel k(0.07);
  const PenaltyProblem one(synthesize(SourceModel({0.5}, {1.0}), SampleGrid({0.5}), k), k, 4.0, 10.0);
  CHECK(psi(one, Vector::Ones(1)) == doctest::Approx(-1.0).epsilon(1e-14));

  for (int trial = 0; trial < 5; ++trial) {
    const Vector l = oracle::random_vec(rng, 5, -3, 3);
    CHECK(std::abs(psi(p, l) - brute_psi(p, l)) <= 1e-6);
  }
}

TEST_CASE("subgradient") {
  std::mt19937_64 rng(2);
  const PenaltyProblem p = two_sources();

  SUBCASE("inactive penalty") {
    const auto sg = subgradient(p, Vector::Zero(5));
    CHECK(sg.g == -p.y());
    CHECK_FALSE(sg.t_active.has_value());
  }
  SUBCASE("active penalty") {
    Vector l = Vector::Zero(5);
    l[2] = 1.0;
    const double s0 = sup_q(p.certificate(l)).value;
    l *= 2.0 / s0;
    const auto sg = subgradient(p, l);
    REQUIRE(sg.t_active.has_value());
    CHECK(sg.sup_value == doctest::Approx(2.0).epsilon(1e-12));
    const Vector expect = -p.y() + p.Pi() * feature_vector(p.grid(), p.kernel(), *sg.t_active);
    CHECK((sg.g - expect).norm() <= 1e-12);
    CHECK(*sg.t_active == doctest::Approx(0.5).epsilon(1e-9));
  }
  SUBCASE("subgradient inequality") {
    for (int trial = 0; trial < 5; ++trial) {
      const Vector l = oracle::random_vec(rng, 5, -3, 3);
      const auto sg = subgradient(p, l);
      CHECK(sg.psi_value == doctest::Approx(psi(p, l)).epsilon(1e-14));
      for (int i = 0; i < 100; ++i) {
        const Vector l2 = oracle::random_vec(rng, 5, -10, 10);
        CHECK(psi(p, l2) >= sg.psi_value + sg.g.dot(l2 - l) - 1e-9);
      }
    }
  }
}

TEST_CASE("model minimum") {
  std::mt19937_64 rng(3);
  SUBCASE("single cut") {
    const Vector g = oracle::random_vec(rng, 4, -1, 1);
    const auto r = model_min({make_cut(Vector::Zero(4), 0.4, g)}, 2.0);
    CHECK(r.nu == doctest::Approx(0.4 - 2.0 * g.lpNorm<1>()).epsilon(1e-12));
    for (Eigen::Index j = 0; j < 4; ++j) CHECK(r.argmin[j] == doctest::Approx(g[j] > 0 ? -2.0 : 2.0));
  }
  SUBCASE("identical cuts") {
    const Vector g = oracle::random_vec(rng, 3, -1, 1);
    const Cut c = make_cut(oracle::random_vec(rng, 3, -1, 1), 0.1, g);
    CHECK(model_min({c, c, c}, 1.0).nu == doctest::Approx(model_min({c}, 1.0).nu).epsilon(1e-12));
  }
  SUBCASE("ten random cuts against a box grid") {
    std::vector<Cut> cuts;
    double lip = 0.0;
    for (int i = 0; i < 10; ++i) {
      cuts.push_back(make_cut(oracle::random_vec(rng, 3, -1, 1), oracle::random_vec(rng, 1, -1, 1)[0],
                              oracle::random_vec(rng, 3, -1, 1)));
      lip = std::max(lip, cuts.back().slope.lpNorm<1>());
    }
    double brute = std::numeric_limits<double>::infinity();
    Vector x(3);
    for (int a = 0; a <= 100; ++a)
      for (int b = 0; b <= 100; ++b)
        for (int c = 0; c <= 100; ++c) {
          x << -1 + 0.02 * a, -1 + 0.02 * b, -1 + 0.02 * c;
          brute = std::min(brute, model_value(cuts, x));
        }
    const auto r = model_min(cuts, 1.0);
    CHECK(r.nu <= brute + 1e-12);
    CHECK(brute - r.nu <= lip * 0.01 + 1e-12);
    CHECK(model_value(cuts, r.argmin) == doctest::Approx(r.nu).epsilon(1e-10));
  }
}

TEST_CASE("level projection") {
  std::mt19937_64 rng(4);
  SUBCASE("point already inside") {
    const Cut c = make_cut(Vector::Zero(3), -1.0, oracle::random_vec(rng, 3, -0.1, 0.1));
    const Vector p = oracle::random_vec(rng, 3, -1, 1);
    CHECK((level_project({c}, 0.0, p, 5.0) - p).norm() <= 1e-14);
  }
  SUBCASE("halfspace through the origin") {
    Vector e1 = Vector::Zero(4);
    e1[0] = 1.0;
    Vector p = 2.0 * e1;
    p[2] = 0.5;
    const Vector x = level_project({make_cut(Vector::Zero(4), 0.0, e1)}, 0.0, p, 10.0);
    CHECK(std::abs(x[0]) <= 1e-14);
    CHECK(x[1] == 0.0);
    CHECK(x[2] == 0.5);
    CHECK(x[3] == 0.0);
  }
  SUBCASE("random cuts against the penalty oracle") {
    int compared = 0;
    for (int trial = 0; trial < 40; ++trial) {
      std::vector<Cut> cuts;
      Matrix A(5, 3);
      Vector b(5);
      const double level = 0.2;
      for (int i = 0; i < 5; ++i) {
        cuts.push_back(make_cut(oracle::random_vec(rng, 3, -1, 1), oracle::random_vec(rng, 1, -1, 1)[0],
                                oracle::random_vec(rng, 3, -1, 1)));
        A.row(i) = cuts.back().slope.transpose();
        b[i] = level - cuts.back().value + cuts.back().slope.dot(cuts.back().anchor);
      }
      const Vector p = oracle::random_vec(rng, 3, -3, 3);
      Vector x;
      try {
        x = level_project(cuts, level, p, 2.0);
      } catch (const Infeasible&) {
        CHECK(oracle::lp_vertex_enum(A, -b, 2.0) > 0.0);
        continue;
      }
      CHECK((x - oracle::penalty_projection(p, A, b, 2.0)).norm() <= 1e-5);
      ++compared;
    }
    CHECK(compared > 20);
  }
  SUBCASE("empty level set") {
    const Cut c = make_cut(Vector::Zero(2), 5.0, Vector::Zero(2));
    CHECK_THROWS_AS(level_project({c}, 0.0, Vector::Zero(2), 1.0), LevelSetEmpty);
  }
}

TEST_CASE("cut model bookkeeping") {
  std::mt19937_64 rng(5);
  std::vector<Cut> cuts;
  CutModel m(4);
  for (int i = 0; i < 6; ++i) {
    cuts.push_back(make_cut(oracle::random_vec(rng, 4, -1, 1), oracle::random_vec(rng, 1, -1, 1)[0],
                            oracle::random_vec(rng, 4, -1, 1)));
    m.add(cuts.back());
  }
  CHECK(m.size() == 6);
  for (int i = 0; i < 20; ++i) {
    const Vector x = oracle::random_vec(rng, 4, -1, 1);
    CHECK(m.value(x) == doctest::Approx(model_value(cuts, x)).epsilon(1e-14));
  }
  CHECK(m.minimize(1.0).nu == doctest::Approx(model_min(cuts, 1.0).nu).epsilon(1e-12));
}

TEST_CASE("solve") {
  const Kernel k(0.07);
  const SourceModel src({0.25, 0.63, 0.889}, {0.8, 0.5, 0.9});
  const PenaltyProblem p(synthesize(src, SampleGrid::equispaced(21), k), k, 100.0, 1e5);

  SUBCASE("no iterations") {
    const BundleState s = solve(p, 0.25, 0, true);
    CHECK(s.cuts.empty());
    CHECK(s.iterations == 0);
    CHECK(s.iterate.isZero(0.0));
    CHECK(s.iterate_history.size() == 1);
  }
  SUBCASE("bad arguments") {
    CHECK_THROWS_AS(solve(p, 0.0, 10, false), InvalidArgument);
    CHECK_THROWS_AS(solve(p, 1.0, 10, false), InvalidArgument);
    CHECK_THROWS_AS(solve(p, 0.25, -1, false), InvalidArgument);
  }
  SUBCASE("three sources") {
    const BundleState s = solve(p, 0.25, 500, true);
    CHECK(s.iterate_history.size() == static_cast<std::size_t>(s.iterations) + 1);
    const auto mx = global_maximizers(p.certificate(s.iterate), 4001, 1e-4);
    REQUIRE(mx.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(mx.locations[i] - src.locations()[i]) <= 1e-6);
    for (std::size_t l = 1; l < s.mu_history.size(); ++l) {
      CHECK(s.mu_history[l] <= s.mu_history[l - 1]);
      CHECK(s.nu_history[l] >= s.nu_history[l - 1]);
      CHECK(s.mu_history[l] >= s.nu_history[l]);
    }
    CHECK(psi(p, s.best) == doctest::Approx(s.mu).epsilon(1e-15));
  }
  SUBCASE("determinism") {
    const BundleState a = solve(p, 0.25, 60, false);
    const BundleState b = solve(p, 0.25, 60, false);
    CHECK(a.iterate == b.iterate);
    CHECK(a.mu_history == b.mu_history);
  }
}

TEST_CASE("five unit spikes") {
  const Kernel k(0.1);
  const SourceModel src({0.2, 0.4, 0.6, 0.7, 0.75}, {1, 1, 1, 1, 1});
  const PenaltyProblem p(synthesize(src, SampleGrid::equispaced(15), k), k, 10.0, 1e5);
  const BundleState s = solve(p, 0.25, 2000, false);
  const auto mx = global_maximizers(p.certificate(s.iterate), 4001, 1e-4);
  REQUIRE(mx.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(mx.locations[i] - src.locations()[i]) <= 5e-4);
}
