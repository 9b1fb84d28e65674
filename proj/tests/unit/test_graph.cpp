#include <doctest.h>

#include <gne/cournot.hpp>
#include <gne/graph.hpp>

#include <Eigen/Eigenvalues>

using gne::CommGraph;
using gne::Index;
using gne::Matrix;
using gne::Vector;

TEST_CASE("incidence of the path 1->2->3") {
  Matrix<double> expected(2, 3);
  expected << 1, -1, 0, 0, 1, -1;
  CHECK(gne::incidence_matrix<double>(CommGraph::path(3)) == expected);
}

TEST_CASE("three-node two-edge graph gives a 2x3 incidence with zero row sums") {
  const CommGraph g(3, {{0, 1}, {1, 2}});
  const auto V = gne::incidence_matrix<double>(g);
  REQUIRE(V.rows() == 2);
  REQUIRE(V.cols() == 3);
  CHECK(V.rowwise().sum().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("edges are oriented from the lower index") {
  const CommGraph g(3, {{2, 0}, {1, 0}});
  CHECK(g.edge(0).source == 0);
  CHECK(g.edge(0).sink == 2);
  CHECK(g.edge(1).source == 0);
  CHECK(g.edge(1).sink == 1);
  CHECK(g.out_edges(0).size() == 2);
  CHECK(g.in_edges(2).size() == 1);
}

TEST_CASE("self-loops and out-of-range edges are rejected") {
  CHECK_THROWS_AS(CommGraph(3, {{1, 1}}), gne::InvalidParameter);
  CHECK_THROWS_AS(CommGraph(3, {{0, 3}}), gne::InvalidParameter);
}

TEST_CASE("P3 laplacian and its spectrum") {
  const auto L = gne::laplacian<double>(CommGraph::path(3));
  Matrix<double> expected(3, 3);
  expected << 1, -1, 0, -1, 2, -1, 0, -1, 1;
  CHECK(L == expected);
  Eigen::SelfAdjointEigenSolver<Matrix<double>> eig(L);
  const Vector<double> ev = eig.eigenvalues();
  CHECK(ev(0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(ev(1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ev(2) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(gne::laplacian_max_eigenvalue<double>(CommGraph::path(3)) == doctest::Approx(3.0));
}

TEST_CASE("V 1 = 0, L 1 = 0 and L = V'V on generated graphs") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    for (double d : {2.0, 3.0, 6.5, 11.0}) {
      const CommGraph g = gne::random_connected_graph(12, d, seed);
      const auto V = gne::incidence_matrix<double>(g);
      const auto L = gne::laplacian<double>(g);
      const Vector<double> ones = Vector<double>::Ones(12);
      CHECK((V * ones).cwiseAbs().maxCoeff() == 0.0);
      CHECK((L * ones).cwiseAbs().maxCoeff() == 0.0);
      CHECK(L == V.transpose() * V);
    }
  }
}

TEST_CASE("connectivity ignores orientation") {
  CHECK(CommGraph(3, {{0, 1}, {1, 2}}).is_connected());
  CHECK_FALSE(CommGraph(4, {{0, 1}, {2, 3}}).is_connected());
  CHECK(CommGraph(1, {}).is_connected());
}

TEST_CASE("graph disagreement equals the Kronecker laplacian times lambda") {
  const CommGraph g(4, {{0, 1}, {1, 2}, {1, 3}, {2, 3}});
  const Index m = 2;
  const Vector<double> lambda = Vector<double>::LinSpaced(8, -1.0, 2.5);
  const Matrix<double> L = gne::laplacian<double>(g);
  Matrix<double> Lbar = Matrix<double>::Zero(8, 8);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 4; ++j) Lbar.block(i * m, j * m, m, m) = L(i, j) * Matrix<double>::Identity(m, m);
  const Vector<double> d = gne::graph_disagreement(g, m, lambda);
  CHECK((d - Lbar * lambda).cwiseAbs().maxCoeff() < 1e-14);
}
