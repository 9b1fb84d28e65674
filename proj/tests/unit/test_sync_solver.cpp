#include "fixtures.hpp"

#include <doctest.h>

#include <gne/oracle.hpp>
#include <gne/rng.hpp>
#include <gne/sync_solver.hpp>

#include <map>

using gne::Index;
using gne::Matrix;
using gne::Vector;

namespace {

gne::StepConfig<double> sync_steps(const gne::GameInstance<double>& game, double rho = 1.0) {
  auto cfg = gne::derive_steps<double>(game, rho, std::nullopt, 0.99);
  cfg.eta = gne::eta_default_sync(cfg.chi, cfg.theta);
  return cfg;
}

Matrix<double> kron_identity(const Matrix<double>& M, Index m) {
  Matrix<double> out = Matrix<double>::Zero(M.rows() * m, M.cols() * m);
  for (Index r = 0; r < M.rows(); ++r)
    for (Index c = 0; c < M.cols(); ++c) out.block(r * m, c * m, m, m) = M(r, c) * Matrix<double>::Identity(m, m);
  return out;
}

Vector<double> consensus_sum(const Vector<double>& z, Index m) { return z.reshaped(m, z.size() / m).rowwise().sum(); }

struct EdgeState {
  Vector<double> x;
  Vector<double> sigma;
  Vector<double> lambda;

  Vector<double> stacked() const {
    Vector<double> v(x.size() + sigma.size() + lambda.size());
    v << x, sigma, lambda;
    return v;
  }
};

/// Dense edge-variable iteration:
///   sigma~ = sigma + delta rho Vbar lambda,
///   lambda~ = max(0, lambda + eps (A(2x~ - x) - b - rho Vbar' sigma - (2 delta rho^2 + 1) Lbar lambda)).
struct EdgeForm {
  const gne::GameInstance<double>& game;
  Matrix<double> Vbar;
  Matrix<double> Lbar;

  explicit EdgeForm(const gne::GameInstance<double>& g)
      : game(g), Vbar(kron_identity(gne::incidence_matrix<double>(g.graph()), g.num_constraints())), Lbar(Vbar.transpose() * Vbar) {}

  EdgeState cold_start() const {
    const Index m = game.num_constraints();
    return {gne::project_boxes(game, Vector<double>::Zero(game.total_dim())), Vector<double>::Zero(m * game.num_edges()),
            Vector<double>::Zero(m * game.num_agents())};
  }

  EdgeState step(const EdgeState& v, const gne::StepConfig<double>& cfg) const {
    const Index m = game.num_constraints();
    const double rho = cfg.rho;
    const Vector<double> F = gne::pseudo_gradient<double>(game, v.x);
    Vector<double> xt(v.x.size());
    Vector<double> lt(v.lambda.size());
    for (Index i = 0; i < game.num_agents(); ++i) {
      const Index o = game.offset(i);
      const Index ni = game.dim(i);
      const Vector<double> g = F.segment(o, ni) + game.block(i).transpose() * v.lambda.segment(i * m, m);
      xt.segment(o, ni) = gne::project_box(game.box(i), v.x.segment(o, ni) - cfg.tau(i) * g);
    }
    const Vector<double> st = v.sigma + cfg.delta * rho * Vbar * v.lambda;
    const Vector<double> coupling_term = Vbar.transpose() * v.sigma;
    const Vector<double> dis = Lbar * v.lambda;
    for (Index i = 0; i < game.num_agents(); ++i) {
      const Index o = game.offset(i);
      const Index ni = game.dim(i);
      const Vector<double> inner = game.block(i) * (2 * xt.segment(o, ni) - v.x.segment(o, ni)) - game.share(i) -
                                   rho * coupling_term.segment(i * m, m) - (2 * cfg.delta * rho * rho + 1) * dis.segment(i * m, m);
      lt.segment(i * m, m) = (v.lambda.segment(i * m, m) + cfg.epsilon(i) * inner).cwiseMax(0.0);
    }
    return {v.x + cfg.eta * (xt - v.x), v.sigma + cfg.eta * (st - v.sigma), v.lambda + cfg.eta * (lt - v.lambda)};
  }
};

}  // namespace

TEST_CASE("the two-agent KKT point is a fixed point") {
  const auto game = fixtures::two_agent_game();
  const auto cfg = sync_steps(game);
  gne::SyncState<double> s{Vector<double>::Constant(2, 0.5), Vector<double>::Ones(2), Vector<double>::Zero(2)};
  const auto next = gne::sdgeno_step(s, game, cfg);
  CHECK((next.x - s.x).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((next.lambda - s.lambda).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((next.z - s.z).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("a converged cournot state is (numerically) fixed") {
  const auto game = fixtures::cournot(42);
  const auto cfg = sync_steps(game);
  gne::SolveOptions<double> opts;
  opts.tol = 1e-9;
  opts.max_iter = 3000000;
  const auto res = gne::sdgeno_solve(game, cfg, opts);
  REQUIRE(res.converged);
  const gne::SyncState<double> s{res.x, res.lambda, res.z};
  const auto next = gne::sdgeno_step(s, game, cfg);
  CHECK((next.x - s.x).cwiseAbs().maxCoeff() <= 1e-7);
  CHECK((next.lambda - s.lambda).cwiseAbs().maxCoeff() <= 1e-7);
}

TEST_CASE("two-agent game from a cold start") {
  const auto game = fixtures::two_agent_game();
  const auto cfg = sync_steps(game);
  SUBCASE("tol 1e-6") {
    gne::SolveOptions<double> opts;
    const auto res = gne::sdgeno_solve(game, cfg, opts);
    REQUIRE(res.converged);
    CHECK(std::abs(res.x(0) - 0.5) <= 1e-6);
    CHECK(std::abs(res.x(1) - 0.5) <= 1e-6);
    CHECK(std::abs(res.lambda(0) - 1.0) <= 1e-6);
    CHECK(std::abs(res.lambda(1) - 1.0) <= 1e-6);
  }
  SUBCASE("tol 1e-8") {
    gne::SolveOptions<double> opts;
    opts.tol = 1e-8;
    const auto res = gne::sdgeno_solve(game, cfg, opts);
    REQUIRE(res.converged);
    CHECK(std::abs(res.x(0) - 0.5) <= 1e-7);
    CHECK(std::abs(res.x(1) - 0.5) <= 1e-7);
    CHECK(std::abs(res.lambda_mean(0) - 1.0) <= 1e-7);
  }
}

TEST_CASE("node auxiliaries stay in the range of the laplacian") {
  const auto game = fixtures::cournot(42);
  const auto cfg = sync_steps(game);
  const Index m = game.num_constraints();
  auto s = gne::SyncState<double>::cold_start(game);
  double worst = 0;
  gne::SyncWorkspace<double> ws;
  gne::SyncState<double> next;
  for (int k = 0; k < 10000; ++k) {
    gne::sdgeno_step_into(s, next, game, cfg, ws);
    std::swap(s, next);
    worst = std::max(worst, consensus_sum(s.z, m).norm());
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("seeded cournot converges with consensus on the multipliers") {
  const auto game = fixtures::cournot(42);
  const auto cfg = sync_steps(game);
  gne::SolveOptions<double> opts;
  opts.tol = 1e-6;
  opts.max_iter = 1000000;
  const auto res = gne::sdgeno_solve(game, cfg, opts);
  REQUIRE(res.converged);
  CHECK(res.trace.back().disagreement <= opts.tol);
  const Index m = game.num_constraints();
  double spread = 0;
  for (Index i = 0; i < game.num_agents(); ++i)
    for (Index j = 0; j < game.num_agents(); ++j)
      spread = std::max(spread, (res.lambda.segment(i * m, m) - res.lambda.segment(j * m, m)).norm());
  CHECK(spread <= 10 * opts.tol);
  const auto oracle = gne::vgne_oracle(game);
  CHECK(fixtures::rel_err(res.x, oracle.x) <= 1e-5);
}

TEST_CASE("one iteration is not enough") {
  const auto game = fixtures::cournot(42);
  gne::SolveOptions<double> opts;
  opts.max_iter = 1;
  const auto res = gne::sdgeno_solve(game, sync_steps(game), opts);
  CHECK_FALSE(res.converged);
  CHECK(res.iterations == 1);
  CHECK(res.trace.rows.size() == 2);
}

TEST_CASE("inadmissible relaxation is refused unless unsafe") {
  const auto game = fixtures::two_agent_game();
  auto cfg = sync_steps(game);
  cfg.eta = 10.0;
  CHECK_THROWS_AS(gne::sdgeno_solve(game, cfg), gne::InvalidParameter);
  gne::SolveOptions<double> opts;
  opts.unsafe = true;
  opts.max_iter = 5;
  CHECK_NOTHROW(gne::sdgeno_solve(game, cfg, opts));
}

TEST_CASE("preconditioned distance between two trajectories never grows") {
  for (std::uint64_t seed : {42, 7}) {
    const auto game = fixtures::cournot(seed);
    const auto cfg = sync_steps(game);
    const EdgeForm ef(game);
    const Matrix<double> Phi = gne::phi_matrix(cfg, game);
    gne::Rng rng(seed);
    EdgeState a = ef.cold_start();
    EdgeState b = ef.cold_start();
    b.x = gne::project_boxes(game, Vector<double>::NullaryExpr(game.total_dim(), [&] { return rng.uniform(0.0, 50.0); }));
    b.sigma = Vector<double>::NullaryExpr(b.sigma.size(), [&] { return rng.uniform(-5.0, 5.0); });
    b.lambda = Vector<double>::NullaryExpr(b.lambda.size(), [&] { return rng.uniform(0.0, 5.0); });
    double prev = std::numeric_limits<double>::infinity();
    int grew = 0;
    for (int k = 0; k < 3000; ++k) {
      const Vector<double> d = a.stacked() - b.stacked();
      const double dist = std::sqrt(d.dot(Phi * d));
      if (dist > prev * (1 + 1e-12)) ++grew;
      prev = dist;
      a = ef.step(a, cfg);
      b = ef.step(b, cfg);
    }
    CHECK(grew == 0);
  }
}

TEST_CASE("one communication round reads each neighbor once") {
  const auto game = fixtures::cournot(42);
  const auto cfg = sync_steps(game);
  std::map<std::pair<Index, Index>, int> reads;
  const auto s = gne::SyncState<double>::cold_start(game);
  gne::sdgeno_step(s, game, cfg, [&](Index i, Index j) { ++reads[{i, j}]; });
  std::size_t expected = 0;
  for (Index i = 0; i < game.num_agents(); ++i) {
    for (Index j : game.graph().neighbors(i)) {
      CHECK(reads[{i, j}] == 1);
      ++expected;
    }
  }
  CHECK(reads.size() == expected);
}

TEST_CASE("node variables reproduce the edge-variable iteration") {
  for (double rho : {1.0, 0.4}) {
    const auto game = fixtures::cournot(9);
    const auto cfg = sync_steps(game, rho);
    const EdgeForm ef(game);
    EdgeState e = ef.cold_start();
    auto s = gne::SyncState<double>::cold_start(game);
    double worst = 0;
    for (int k = 0; k < 300; ++k) {
      e = ef.step(e, cfg);
      s = gne::sdgeno_step(s, game, cfg);
      worst = std::max({worst, (s.x - e.x).cwiseAbs().maxCoeff(), (s.lambda - e.lambda).cwiseAbs().maxCoeff(),
                        (s.z - ef.Vbar.transpose() * e.sigma).cwiseAbs().maxCoeff()});
    }
    CHECK(worst <= 1e-9);
  }
}
