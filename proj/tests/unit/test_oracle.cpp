#include "fixtures.hpp"

#include <doctest.h>

#include <gne/oracle.hpp>
#include <gne/rng.hpp>

using gne::Index;
using gne::Vector;

namespace {

Vector<double> vec(std::initializer_list<double> v) {
  Vector<double> out(static_cast<Index>(v.size()));
  Index k = 0;
  for (double x : v) out(k++) = x;
  return out;
}

}  // namespace

TEST_CASE("projection onto the feasible set") {
  const auto game = fixtures::two_agent_game();
  CHECK((gne::project_feasible<double>(game, vec({1, 1})) - vec({0.5, 0.5})).norm() <= 1e-10);
  CHECK((gne::project_feasible<double>(game, vec({2, -1})) - vec({1, 0})).norm() <= 1e-10);
  CHECK((gne::project_feasible<double>(game, vec({0.9, 0.8})) - vec({0.55, 0.45})).norm() <= 1e-10);
  CHECK((gne::project_feasible<double>(game, vec({0.2, 0.3})) - vec({0.2, 0.3})).norm() == 0.0);
}

TEST_CASE("two-agent equilibrium and multiplier") {
  const auto sol = gne::vgne_oracle(fixtures::two_agent_game());
  CHECK((sol.x - vec({0.5, 0.5})).norm() <= 1e-8);
  CHECK(std::abs(sol.lambda(0) - 1.0) <= 1e-6);
  CHECK(sol.residual.primal <= 1e-8);
}

TEST_CASE("three-agent equilibrium shares one multiplier") {
  const auto sol = gne::vgne_oracle(fixtures::three_agent_game());
  CHECK((sol.x - vec({0.6, 0.4, 0.2})).norm() <= 1e-8);
  CHECK(std::abs(sol.lambda(0) - 0.8) <= 1e-6);
}

TEST_CASE("a slack coupling leaves the unconstrained optimum") {
  const auto sol = gne::vgne_oracle(fixtures::scalar_game({0.3, 0.6}, 100.0, gne::CommGraph::path(2)));
  CHECK((sol.x - vec({0.3, 0.6})).norm() <= 1e-8);
  CHECK(sol.lambda(0) == 0.0);
}

TEST_CASE("single agent") {
  const auto game = fixtures::scalar_game({0.7}, 0.5, gne::CommGraph(1, {}));
  const auto sol = gne::vgne_oracle(game);
  CHECK(std::abs(sol.x(0) - 0.5) <= 1e-8);
  CHECK(std::abs(sol.lambda(0) - 0.4) <= 1e-6);
  CHECK(std::abs(gne::brute_force_equilibrium(game, 201)(0) - 0.5) <= 0.01);
}

TEST_CASE("cournot residual") {
  for (std::uint64_t seed : {42, 1, 2}) {
    const auto sol = gne::vgne_oracle(fixtures::cournot(seed));
    CHECK(sol.residual.primal <= 1e-8);
    CHECK(sol.residual.violation <= 1e-8);
  }
}

TEST_CASE("oracle agrees with a lattice search on tiny games") {
  gne::Rng rng(2024);
  for (int t = 0; t < 5; ++t) {
    const Index N = 2 + t % 2;
    const Index points = N == 2 ? 201 : 101;
    const double spacing = 1.0 / double(points - 1);
    std::vector<double> c;
    for (Index i = 0; i < N; ++i) c.push_back(rng.uniform(0.0, 1.5));
    const double b = rng.uniform(0.3, 2.0);
    const auto game = fixtures::scalar_game(c, b, gne::CommGraph::path(N));
    const auto sol = gne::vgne_oracle(game);
    const Vector<double> grid = gne::brute_force_equilibrium(game, points);
    CAPTURE(t);
    CHECK((sol.x - grid).cwiseAbs().maxCoeff() <= 2 * spacing);
  }
}

TEST_CASE("brute force refuses what it cannot enumerate") {
  CHECK_THROWS_AS(gne::brute_force_equilibrium(fixtures::cournot(42), 11), gne::InvalidParameter);
  CHECK_THROWS_AS(gne::brute_force_equilibrium(fixtures::two_agent_game(), 1), gne::InvalidParameter);
}
