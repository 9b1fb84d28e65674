#include "fixtures.hpp"

#include <doctest.h>

#include <gne/game.hpp>
#include <gne/rng.hpp>
#include <gne/validate.hpp>

using gne::Index;
using gne::Matrix;
using gne::Vector;

namespace {

Vector<double> random_point(gne::Rng& rng, const gne::GameInstance<double>& game, double pad = 0.0) {
  const Vector<double> lo = game.lower();
  const Vector<double> hi = game.upper();
  Vector<double> x(lo.size());
  for (Index k = 0; k < x.size(); ++k) x(k) = rng.uniform(lo(k) - pad, hi(k) + pad);
  return x;
}

}  // namespace

TEST_CASE("pseudo-gradient of two squares at the origin") {
  const auto game = fixtures::two_agent_game();
  const Vector<double> F = gne::pseudo_gradient<double>(game, Vector<double>::Zero(2));
  CHECK(F(0) == doctest::Approx(-2.0));
  CHECK(F(1) == doctest::Approx(-2.0));
  CHECK_THROWS_AS(gne::pseudo_gradient<double>(game, Vector<double>::Zero(3)), gne::DimensionMismatch);
}

TEST_CASE("cournot pseudo-gradient matches central differences of the costs") {
  gne::Rng rng(7);
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto game = fixtures::cournot(seed);
    const double h = 1e-5;
    for (int trial = 0; trial < 10; ++trial) {
      Vector<double> x = random_point(rng, game);
      const Vector<double> F = gne::pseudo_gradient<double>(game, x);
      Vector<double> fd(F.size());
      for (Index i = 0; i < game.num_agents(); ++i) {
        for (Index c = 0; c < game.dim(i); ++c) {
          const Index k = game.offset(i) + c;
          const double keep = x(k);
          x(k) = keep + h;
          const double up = game.cost().value(i, x);
          x(k) = keep - h;
          const double down = game.cost().value(i, x);
          x(k) = keep;
          fd(k) = (up - down) / (2 * h);
        }
      }
      CHECK((F - fd).norm() / F.norm() <= 1e-6);
    }
  }
}

TEST_CASE("affine representation agrees with the evaluable map") {
  const auto game = fixtures::cournot(11);
  REQUIRE(game.cost().affine);
  const auto& rep = *game.cost().affine;
  gne::Rng rng(3);
  for (int t = 0; t < 10; ++t) {
    const Vector<double> x = random_point(rng, game, 5.0);
    const Vector<double> F = gne::pseudo_gradient<double>(game, x);
    CHECK((F - (rep.M * x + rep.u)).norm() <= 1e-10 * std::max(1.0, F.norm()));
  }
}

TEST_CASE("monotonicity constants") {
  SUBCASE("F(x) = 2(x - a)") {
    const Vector<double> a = Vector<double>::LinSpaced(3, 0.5, 1.5);
    const gne::AffineRepresentation<double> rep{2.0 * Matrix<double>::Identity(3, 3), -2.0 * a};
    const auto mc = gne::monotonicity_constants(rep);
    CHECK(mc.alpha == doctest::Approx(2.0));
    CHECK(mc.ell == doctest::Approx(2.0));
  }
  SUBCASE("skew map is not strongly monotone") {
    Matrix<double> M(2, 2);
    M << 0, 1, -1, 0;
    CHECK_THROWS_AS(gne::monotonicity_constants(gne::AffineRepresentation<double>{M, Vector<double>::Zero(2)}), gne::NotStronglyMonotone);
  }
  SUBCASE("seeded cournot instance is strongly monotone") {
    const auto mc = gne::monotonicity_constants(fixtures::cournot(42).cost());
    CHECK(mc.alpha > 0.0);
    CHECK(mc.ell >= mc.alpha);
  }
}

TEST_CASE("strong monotonicity and Lipschitz inequalities on random pairs") {
  const auto game = fixtures::cournot(5);
  const auto mc = gne::monotonicity_constants(game.cost());
  gne::Rng rng(99);
  for (int t = 0; t < 100; ++t) {
    const Vector<double> x = random_point(rng, game, 10.0);
    const Vector<double> y = random_point(rng, game, 10.0);
    const Vector<double> dF = gne::pseudo_gradient<double>(game, x) - gne::pseudo_gradient<double>(game, y);
    const double d2 = (x - y).squaredNorm();
    CHECK(dF.dot(x - y) >= mc.alpha * d2 * (1 - 1e-12));
    CHECK(dF.norm() <= mc.ell * std::sqrt(d2) * (1 + 1e-12));
  }
}

TEST_CASE("box projection") {
  const gne::BoxSet<double> box(Vector<double>::Zero(2), Vector<double>::Ones(2));
  Vector<double> v(2);
  v << 0.3, 0.7;
  CHECK(gne::project_box(box, v) == v);
  v << -1, 2;
  const Vector<double> p = gne::project_box(box, v);
  CHECK(p(0) == 0.0);
  CHECK(p(1) == 1.0);
  gne::Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    const Vector<double> w = Vector<double>::NullaryExpr(2, [&] { return rng.uniform(-3.0, 3.0); });
    const Vector<double> once = gne::project_box(box, w);
    CHECK(gne::project_box(box, once) == once);
  }
  CHECK_THROWS_AS(gne::project_box(box, Vector<double>::Zero(3)), gne::DimensionMismatch);
  CHECK_THROWS(gne::BoxSet<double>(Vector<double>::Ones(1), Vector<double>::Zero(1)));
}

TEST_CASE("coupling shares sum to the global bound") {
  const auto game = fixtures::cournot(42);
  Vector<double> sum = Vector<double>::Zero(game.num_constraints());
  for (Index i = 0; i < game.num_agents(); ++i) sum += game.share(i);
  CHECK((sum - game.coupling_bound()).norm() <= 1e-12 * sum.norm());
}

TEST_CASE("validation report") {
  SUBCASE("seeded cournot passes every check") {
    const auto rep = gne::validate_game(fixtures::cournot(42));
    CHECK(rep.ok());
    CHECK(rep.find("slater")->ok);
    CHECK(rep.find("strong_monotonicity")->ok);
  }
  SUBCASE("disconnected graph is flagged") {
    const auto game = fixtures::scalar_game({1, 1, 1, 1}, 2.0, gne::CommGraph(4, {{0, 1}, {2, 3}}));
    const auto rep = gne::validate_game(game);
    CHECK_FALSE(rep.ok());
    CHECK_FALSE(rep.find("connected_graph")->ok);
    CHECK(rep.find("slater")->ok);
  }
  SUBCASE("b = 0 with positive lower bounds breaks Slater") {
    const auto game = fixtures::scalar_game({1, 1}, 0.0, gne::CommGraph::path(2), 0.1, 1.0);
    const auto rep = gne::validate_game(game);
    CHECK_FALSE(rep.find("slater")->ok);
    REQUIRE(rep.failures().size() == 1);
  }
}
