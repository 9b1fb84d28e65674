#pragma once

#include <gne/cournot.hpp>
#include <gne/game.hpp>
#include <gne/graph.hpp>

#include <vector>

namespace fixtures {

using gne::Index;
using gne::Matrix;
using gne::Vector;

/// Separable quadratic f_i = (x_i - c_i)^2 on [lo, hi], one shared row
/// sum_i x_i <= b split evenly, on the given graph.
inline gne::GameInstance<double> scalar_game(const std::vector<double>& c, double b, const gne::CommGraph& graph, double lo = 0.0,
                                             double hi = 1.0) {
  const auto N = c.size();
  std::vector<gne::BoxSet<double>> boxes;
  std::vector<Matrix<double>> blocks;
  gne::QuadraticCost<double> cost;
  for (std::size_t i = 0; i < N; ++i) {
    boxes.emplace_back(Vector<double>::Constant(1, lo), Vector<double>::Constant(1, hi));
    blocks.push_back(Matrix<double>::Ones(1, 1));
    cost.Q.push_back(Matrix<double>::Ones(1, 1));
    cost.q.push_back(Vector<double>::Constant(1, -2.0 * c[i]));
  }
  const std::vector<Index> dims(N, 1);
  return gne::GameInstance<double>(std::move(boxes), gne::AffineCoupling<double>::even_split(std::move(blocks), Vector<double>::Constant(1, b)),
                                   graph, gne::make_quadratic_cost<double>(dims, std::move(cost)));
}

/// f_i = (x_i - 1)^2, x_1 + x_2 <= 1, x in [0, 1]^2. Solution x = (0.5, 0.5), lambda = 1.
inline gne::GameInstance<double> two_agent_game() { return scalar_game({1.0, 1.0}, 1.0, gne::CommGraph::path(2)); }

/// Three scalar agents on the path 1-2-3 with one coupling row.
inline gne::GameInstance<double> three_agent_game() { return scalar_game({1.0, 0.8, 0.6}, 1.2, gne::CommGraph::path(3)); }

inline gne::GameInstance<double> cournot(std::uint64_t seed, Index firms = 8, Index markets = 3) {
  gne::CournotSpec spec;
  spec.num_firms = firms;
  spec.num_markets = markets;
  spec.seed = seed;
  return gne::generate_instance<double>(spec).game;
}

inline double rel_err(const Vector<double>& a, const Vector<double>& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

}  // namespace fixtures
