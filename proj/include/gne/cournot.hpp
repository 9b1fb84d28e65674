#pragma once

#include <gne/game.hpp>
#include <gne/graph.hpp>
#include <gne/rng.hpp>
#include <gne/schedule.hpp>

#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace gne {

struct Range {
  double lo;
  double hi;
};

/// Network Cournot game: N firms selling products into m markets with
/// capacities A x <= b and a linear inverse demand P - D A x.
struct CournotSpec {
  Index num_firms = 8;
  Index num_markets = 3;
  std::vector<Index> dims;         ///< per-firm n_i; empty means n_i = num_markets
  std::vector<Index> dim_choices;  ///< if set, each n_i is drawn uniformly from it
  Range production{10, 45};
  Range efficiency{0.6, 1};
  Range capacity{20, 100};
  Range price_intercept{250, 500};
  Range price_slope{1, 5};
  Range cost_quadratic{1, 8};
  Range cost_linear{1, 4};
  bool equality = false;          ///< A x = b, encoded as A x <= b and -A x <= -b
  std::optional<CommGraph> graph;  ///< replaces the market-competition graph
  std::uint64_t seed = 42;
  int max_attempts = 100;
};

template <typename Scalar = double>
struct CournotInstance {
  GameInstance<Scalar> game;
  int rejected = 0;  ///< draws discarded for a disconnected graph or alpha <= 0
  std::vector<std::vector<Index>> product_market;  ///< market of each product, per firm
};

inline void check_range(const Range& r, const char* name) {
  if (!(r.lo > 0.0) || !(r.hi >= r.lo)) throw InvalidParameter(std::string("range ") + name + " must satisfy 0 < lo <= hi");
}

/// Firms are adjacent when some product of each goes to the same market.
inline CommGraph competition_graph(Index num_firms, const std::vector<std::vector<Index>>& product_market) {
  std::vector<std::pair<Index, Index>> edges;
  for (Index i = 0; i < num_firms; ++i) {
    for (Index j = i + 1; j < num_firms; ++j) {
      bool shared = false;
      for (Index a : product_market[static_cast<std::size_t>(i)])
        for (Index b : product_market[static_cast<std::size_t>(j)]) shared = shared || a == b;
      if (shared) edges.emplace_back(i, j);
    }
  }
  return CommGraph(num_firms, edges);
}

/// Draws a seeded instance; a draw whose graph is disconnected or whose
/// pseudo-gradient is not strongly monotone is discarded and redrawn from the
/// next sub-seed.
template <typename Scalar = double>
CournotInstance<Scalar> generate_instance(const CournotSpec& spec) {
  const Index N = spec.num_firms;
  const Index m = spec.num_markets;
  if (N < 1 || m < 1) throw InvalidParameter("cournot: need at least one firm and one market");
  for (const auto& [r, name] : {std::pair{spec.production, "production"}, {spec.efficiency, "efficiency"}, {spec.capacity, "capacity"},
                                {spec.price_intercept, "price_intercept"}, {spec.price_slope, "price_slope"},
                                {spec.cost_quadratic, "cost_quadratic"}, {spec.cost_linear, "cost_linear"}}) {
    check_range(r, name);
  }
  if (!spec.dims.empty() && static_cast<Index>(spec.dims.size()) != N) throw InvalidParameter("cournot: dims length differs from N");
  for (Index d : spec.dims)
    if (d < 1) throw InvalidParameter("cournot: n_i must be positive");
  for (Index d : spec.dim_choices)
    if (d < 1) throw InvalidParameter("cournot: n_i choices must be positive");
  if (spec.graph && spec.graph->num_nodes() != N) throw InvalidParameter("cournot: graph size differs from N");
  if (spec.max_attempts < 1) throw InvalidParameter("cournot: max_attempts must be positive");

  int rejected = 0;
  for (int attempt = 0; attempt < spec.max_attempts; ++attempt) {
    Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(attempt)));
    const auto draw = [&rng](const Range& r) { return Scalar(rng.uniform(r.lo, r.hi)); };

    std::vector<Index> dims(static_cast<std::size_t>(N), m);
    if (!spec.dims.empty()) dims = spec.dims;
    if (!spec.dim_choices.empty()) {
      for (auto& d : dims) d = spec.dim_choices[rng.below(spec.dim_choices.size())];
    }

    std::vector<std::vector<Index>> product_market(static_cast<std::size_t>(N));
    for (Index i = 0; i < N; ++i) {
      for (Index k = 0; k < dims[static_cast<std::size_t>(i)]; ++k) {
        product_market[static_cast<std::size_t>(i)].push_back(static_cast<Index>(rng.below(static_cast<std::uint64_t>(m))));
      }
    }

    std::vector<BoxSet<Scalar>> boxes;
    std::vector<Matrix<Scalar>> A;
    QuadraticCost<Scalar> cost;
    for (Index i = 0; i < N; ++i) {
      const Index ni = dims[static_cast<std::size_t>(i)];
      Vector<Scalar> upper(ni);
      for (Index k = 0; k < ni; ++k) upper(k) = draw(spec.production);
      boxes.emplace_back(Vector<Scalar>::Zero(ni), upper);
      Matrix<Scalar> Ai = Matrix<Scalar>::Zero(m, ni);
      for (Index k = 0; k < ni; ++k) Ai(product_market[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)], k) = draw(spec.efficiency);
      A.push_back(Ai);
    }
    Vector<Scalar> b(m);
    for (Index r = 0; r < m; ++r) b(r) = draw(spec.capacity);
    cost.price_intercept.resize(m);
    cost.price_slope.resize(m);
    for (Index r = 0; r < m; ++r) cost.price_intercept(r) = draw(spec.price_intercept);
    for (Index r = 0; r < m; ++r) cost.price_slope(r) = draw(spec.price_slope);
    for (Index i = 0; i < N; ++i) {
      const Index ni = dims[static_cast<std::size_t>(i)];
      Vector<Scalar> qd(ni);
      Vector<Scalar> ql(ni);
      for (Index k = 0; k < ni; ++k) qd(k) = draw(spec.cost_quadratic);
      for (Index k = 0; k < ni; ++k) ql(k) = draw(spec.cost_linear);
      cost.Q.push_back(qd.asDiagonal());
      cost.q.push_back(ql);
    }
    cost.market = A;

    CommGraph graph = spec.graph ? *spec.graph : competition_graph(N, product_market);
    if (!graph.is_connected()) {
      ++rejected;
      continue;
    }

    AffineCoupling<Scalar> coupling;
    if (spec.equality) {
      std::vector<Matrix<Scalar>> rows;
      for (const auto& Ai : A) {
        Matrix<Scalar> both(2 * m, Ai.cols());
        both << Ai, -Ai;
        rows.push_back(both);
      }
      Vector<Scalar> bb(2 * m);
      bb << b, -b;
      coupling = AffineCoupling<Scalar>::even_split(std::move(rows), bb);
    } else {
      coupling = AffineCoupling<Scalar>::even_split(A, b);
    }

    auto model = make_quadratic_cost<Scalar>(dims, std::move(cost));
    try {
      monotonicity_constants(model);
    } catch (const NotStronglyMonotone&) {
      ++rejected;
      continue;
    }
    return {GameInstance<Scalar>(std::move(boxes), std::move(coupling), std::move(graph), std::move(model)), rejected, std::move(product_market)};
  }
  throw DisconnectedGraph("cournot: no admissible instance after " + std::to_string(spec.max_attempts) + " draws");
}

/// Connected graph with mean degree close to the target: a random spanning
/// tree plus uniformly chosen extra edges, round(N d / 2) edges in total.
inline CommGraph random_connected_graph(Index num_nodes, double avg_degree, std::uint64_t seed) {
  if (num_nodes < 2) throw InfeasibleDegree("random graph needs at least two nodes");
  const double n = static_cast<double>(num_nodes);
  const double tree_degree = 2.0 * (n - 1.0) / n;
  if (!(avg_degree >= tree_degree - 0.5) || !(avg_degree <= n - 1.0)) {
    throw InfeasibleDegree("mean degree " + std::to_string(avg_degree) + " is not attainable by a connected graph on " + std::to_string(num_nodes) +
                           " nodes");
  }
  const Index max_edges = num_nodes * (num_nodes - 1) / 2;
  const Index target = std::clamp(static_cast<Index>(std::llround(n * avg_degree / 2.0)), num_nodes - 1, max_edges);

  Rng rng(seed);
  std::vector<Index> order(static_cast<std::size_t>(num_nodes));
  for (Index i = 0; i < num_nodes; ++i) order[static_cast<std::size_t>(i)] = i;
  rng.shuffle(order);
  std::vector<std::vector<char>> adj(static_cast<std::size_t>(num_nodes), std::vector<char>(static_cast<std::size_t>(num_nodes), 0));
  std::vector<std::pair<Index, Index>> edges;
  for (std::size_t k = 1; k < order.size(); ++k) {
    const Index a = order[k];
    const Index b = order[rng.below(k)];
    adj[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = adj[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] = 1;
    edges.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::vector<std::pair<Index, Index>> spare;
  for (Index i = 0; i < num_nodes; ++i)
    for (Index j = i + 1; j < num_nodes; ++j)
      if (!adj[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) spare.emplace_back(i, j);
  rng.shuffle(spare);
  for (std::size_t k = 0; static_cast<Index>(edges.size()) < target; ++k) edges.push_back(spare[k]);
  std::sort(edges.begin(), edges.end());
  return CommGraph(num_nodes, edges);
}

enum class Scenario { A, B, C };

/// A: uniform activation, no delay. B: uniform activation, delays up to 3.
/// C: the first half of the agents twice as likely as the rest, no delay.
inline std::pair<ActivationModel, DelayModel> scenario_config(Scenario which, Index num_agents, std::uint64_t seed) {
  const std::uint64_t act_seed = derive_seed(seed, 0xAC71);
  const std::uint64_t delay_seed = derive_seed(seed, 0xDE1A);
  switch (which) {
    case Scenario::A:
      return {ActivationModel::uniform(num_agents, act_seed), DelayModel::zero()};
    case Scenario::B:
      return {ActivationModel::uniform(num_agents, act_seed), DelayModel::uniform(3, delay_seed)};
    case Scenario::C: {
      std::vector<double> w(static_cast<std::size_t>(num_agents), 1.0);
      for (Index i = 0; i < num_agents / 2; ++i) w[static_cast<std::size_t>(i)] = 2.0;
      double total = 0.0;
      for (double v : w) total += v;
      for (double& v : w) v /= total;
      return {ActivationModel::iid(std::move(w), act_seed), DelayModel::zero()};
    }
  }
  throw InvalidParameter("unknown scenario");
}

/// Graph-density sweep instance: N firms with one or two products each, the
/// given communication graph, and equality coupling.
inline CournotSpec sweep_spec(Index num_firms, double avg_degree, std::uint64_t seed, bool equality = true) {
  CournotSpec spec;
  spec.num_firms = num_firms;
  spec.num_markets = 3;
  spec.dim_choices = {1, 2};
  spec.equality = equality;
  spec.graph = random_connected_graph(num_firms, avg_degree, derive_seed(seed, 0x6EA9));
  spec.seed = seed;
  return spec;
}

}  // namespace gne
