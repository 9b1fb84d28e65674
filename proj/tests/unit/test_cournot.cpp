#include "fixtures.hpp"

#include <doctest.h>

#include <gne/cournot.hpp>
#include <gne/validate.hpp>

using gne::Index;
using gne::Matrix;
using gne::Vector;

TEST_CASE("seeded instance is well posed") {
  gne::CournotSpec spec;
  const auto inst = gne::generate_instance<double>(spec);
  const auto& game = inst.game;
  CHECK(game.num_agents() == 8);
  CHECK(game.num_constraints() == 3);
  CHECK(gne::validate_game(game).ok());
  for (Index i = 0; i < game.num_agents(); ++i) {
    CHECK(game.box(i).lower.isZero());
    CHECK(game.box(i).upper.minCoeff() >= 10.0);
    CHECK(game.box(i).upper.maxCoeff() <= 45.0);
    const Matrix<double>& A = game.block(i);
    for (Index c = 0; c < A.cols(); ++c) {
      CHECK((A.col(c).array() != 0.0).count() == 1);
      CHECK(A.col(c).maxCoeff() >= 0.6);
      CHECK(A.col(c).maxCoeff() <= 1.0);
    }
  }
  CHECK(game.coupling_bound().minCoeff() >= 20.0);
  CHECK(game.coupling_bound().maxCoeff() <= 100.0);
}

TEST_CASE("competition graph links firms sharing a market") {
  const auto g = gne::competition_graph(4, {{0}, {0, 1}, {1}, {2}});
  CHECK(g.num_edges() == 2);
  CHECK(g.edge(0).source == 0);
  CHECK(g.edge(0).sink == 1);
  CHECK(g.edge(1).source == 1);
  CHECK(g.edge(1).sink == 2);
  CHECK_FALSE(g.is_connected());

  const auto inst = gne::generate_instance<double>(gne::CournotSpec{});
  const auto rebuilt = gne::competition_graph(8, inst.product_market);
  CHECK(rebuilt.num_edges() == inst.game.graph().num_edges());
}

TEST_CASE("generation is a pure function of the spec") {
  gne::CournotSpec spec;
  spec.seed = 1234;
  const auto a = gne::generate_instance<double>(spec).game;
  const auto b = gne::generate_instance<double>(spec).game;
  CHECK(a.coupling_matrix() == b.coupling_matrix());
  CHECK(a.coupling_bound() == b.coupling_bound());
  CHECK(a.upper() == b.upper());
  CHECK(a.cost().affine->M == b.cost().affine->M);
  CHECK(a.cost().affine->u == b.cost().affine->u);
  spec.seed = 1235;
  const auto c = gne::generate_instance<double>(spec).game;
  CHECK(a.upper() != c.upper());
}

TEST_CASE("pseudo-gradient is affine with the reported matrix") {
  const auto game = fixtures::cournot(17);
  const auto& rep = *game.cost().affine;
  const Vector<double> F0 = gne::pseudo_gradient<double>(game, Vector<double>::Zero(game.total_dim()));
  const Vector<double> x = game.upper() * 0.37;
  const Vector<double> Fx = gne::pseudo_gradient<double>(game, x);
  CHECK((Fx - F0 - rep.M * x).norm() <= 1e-10 * Fx.norm());
}

TEST_CASE("random connected graphs") {
  SUBCASE("degree N-1 is the complete graph") {
    const auto g = gne::random_connected_graph(40, 39, 1);
    CHECK(g.num_edges() == 780);
  }
  SUBCASE("sparse target") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto g = gne::random_connected_graph(40, 3, seed);
      CHECK(g.is_connected());
      CHECK(g.mean_degree() >= 2.5);
      CHECK(g.mean_degree() <= 3.5);
    }
  }
  SUBCASE("unattainable degrees") {
    CHECK_THROWS_AS(gne::random_connected_graph(8, 1, 1), gne::InfeasibleDegree);
    CHECK_THROWS_AS(gne::random_connected_graph(8, 8, 1), gne::InfeasibleDegree);
  }
}

TEST_CASE("sweep instances use the requested graph and equality coupling") {
  const auto spec = gne::sweep_spec(40, 10, 3);
  const auto game = gne::generate_instance<double>(spec).game;
  CHECK(game.num_constraints() == 6);
  CHECK(game.graph().num_edges() == 200);
  for (Index i = 0; i < 40; ++i) CHECK((game.dim(i) == 1 || game.dim(i) == 2));
  // A x <= b together with -A x <= -b has no strictly feasible point.
  const auto rep = gne::validate_game(game);
  REQUIRE(rep.failures().size() == 1);
  CHECK_FALSE(rep.find("slater")->ok);
}

TEST_CASE("scenario configurations") {
  const auto [a_act, a_delay] = gne::scenario_config(gne::Scenario::A, 8, 1);
  CHECK(a_act.p_min() == doctest::Approx(0.125));
  CHECK(a_delay.max_delay() == 0);
  const auto [b_act, b_delay] = gne::scenario_config(gne::Scenario::B, 8, 1);
  CHECK(b_act.p_min() == doctest::Approx(0.125));
  CHECK(b_delay.max_delay() == 3);
  const auto [c_act, c_delay] = gne::scenario_config(gne::Scenario::C, 8, 1);
  CHECK(c_act.p_min() == doctest::Approx(1.0 / 12));
  CHECK(c_act.probabilities[0] == doctest::Approx(1.0 / 6));
  CHECK(c_delay.max_delay() == 0);
}

TEST_CASE("invalid specs are rejected") {
  gne::CournotSpec spec;
  spec.num_firms = 0;
  CHECK_THROWS_AS(gne::generate_instance<double>(spec), gne::InvalidParameter);
  spec = {};
  spec.num_markets = 0;
  CHECK_THROWS_AS(gne::generate_instance<double>(spec), gne::InvalidParameter);
  spec = {};
  spec.production = {5, 1};
  CHECK_THROWS_AS(gne::generate_instance<double>(spec), gne::InvalidParameter);
}
