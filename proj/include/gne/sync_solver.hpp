#pragma once

#include <gne/game.hpp>
#include <gne/metrics.hpp>
#include <gne/splitting.hpp>

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <utility>

namespace gne {

/// SD-GENO iterate: strategies, per-agent multipliers and node auxiliaries.
template <typename Scalar = double>
struct SyncState {
  Vector<Scalar> x;
  Vector<Scalar> lambda;
  Vector<Scalar> z;

  static SyncState cold_start(const GameInstance<Scalar>& game) {
    const Index mN = game.num_constraints() * game.num_agents();
    return {project_boxes(game, Vector<Scalar>::Zero(game.total_dim())), Vector<Scalar>::Zero(mN), Vector<Scalar>::Zero(mN)};
  }
};

/// Called once per (reader, neighbor) lambda read in the communication round.
using NeighborReadHook = std::function<void(Index reader, Index neighbor)>;

/// Communication round: d_i = sum_{j in N_i} (lambda_i - lambda_j), stacked.
template <typename Scalar>
Vector<Scalar> disagreement(const CommGraph& graph, Index m, const ConstVectorRef<Scalar>& lambda, const NeighborReadHook& on_read = {}) {
  require_dims(lambda.size() == m * graph.num_nodes(), "disagreement: lambda has wrong length");
  Vector<Scalar> d = Vector<Scalar>::Zero(lambda.size());
  for (Index i = 0; i < graph.num_nodes(); ++i) {
    for (Index j : graph.neighbors(i)) {
      if (on_read) on_read(i, j);
      d.segment(i * m, m) += lambda.segment(i * m, m) - lambda.segment(j * m, m);
    }
  }
  return d;
}

namespace detail {

template <typename Scalar>
void check_step_shape(const StepConfig<Scalar>& cfg, const GameInstance<Scalar>& game) {
  if (cfg.tau.size() != game.num_agents() || cfg.epsilon.size() != game.num_agents()) {
    throw InvalidParameter("step config: tau/epsilon length differs from N");
  }
  if (!(cfg.eta > Scalar(0))) throw InvalidParameter("step config: eta must be positive");
  if (!(cfg.delta > Scalar(0)) || !(cfg.rho > Scalar(0)) || !(cfg.tau.minCoeff() > Scalar(0)) || !(cfg.epsilon.minCoeff() > Scalar(0))) {
    throw InvalidParameter("step config: steps must be positive");
  }
}

}  // namespace detail

template <typename Scalar = double>
struct SyncWorkspace {
  Vector<Scalar> d;
  Vector<Scalar> grad;
  Vector<Scalar> x_tilde;
  Vector<Scalar> l_tilde;
};

/// One synchronous SD-GENO iteration from `s` into `next`, all agents' local
/// updates stacked. `next` must not alias `s`.
template <typename Scalar>
void sdgeno_step_into(const SyncState<Scalar>& s, SyncState<Scalar>& next, const GameInstance<Scalar>& game, const StepConfig<Scalar>& cfg,
                      SyncWorkspace<Scalar>& ws, const NeighborReadHook& on_read = {}) {
  const Index N = game.num_agents();
  const Index m = game.num_constraints();
  require_dims(s.x.size() == game.total_dim() && s.lambda.size() == m * N && s.z.size() == m * N, "sdgeno_step: state shape");
  const auto& g = game.graph();
  ws.d.resize(m * N);
  for (Index i = 0; i < N; ++i) {
    auto di = ws.d.segment(i * m, m);
    di = Scalar(g.degree(i)) * s.lambda.segment(i * m, m);
    for (Index j : g.neighbors(i)) {
      if (on_read) on_read(i, j);
      di -= s.lambda.segment(j * m, m);
    }
  }
  const Scalar dissensus_gain = Scalar(2) * cfg.delta * cfg.rho * cfg.rho + Scalar(1);

  next.x.resize(s.x.size());
  next.lambda.resize(s.lambda.size());
  next.z.resize(s.z.size());
  for (Index i = 0; i < N; ++i) {
    const Index o = game.offset(i);
    const Index ni = game.dim(i);
    const auto& A = game.block(i);
    const auto& box = game.box(i);
    const auto xi = s.x.segment(o, ni);
    const auto li = s.lambda.segment(i * m, m);
    const auto zi = s.z.segment(i * m, m);
    const auto di = ws.d.segment(i * m, m);

    ws.grad.resize(ni);
    game.cost().gradient(i, s.x, ws.grad);
    ws.grad.noalias() += A.transpose().lazyProduct(li);
    ws.x_tilde = (xi - cfg.tau(i) * ws.grad).cwiseMax(box.lower).cwiseMin(box.upper);
    ws.l_tilde = li - game.share(i) - cfg.rho * zi - dissensus_gain * di;
    ws.l_tilde.noalias() += A.lazyProduct(Scalar(2) * ws.x_tilde - xi);
    ws.l_tilde = (li + cfg.epsilon(i) * (ws.l_tilde - li)).cwiseMax(Scalar(0));

    next.x.segment(o, ni) = xi + cfg.eta * (ws.x_tilde - xi);
    next.z.segment(i * m, m) = zi + (cfg.eta * cfg.rho * cfg.delta) * di;
    next.lambda.segment(i * m, m) = li + cfg.eta * (ws.l_tilde - li);
  }
}

/// One synchronous SD-GENO iteration:
///   x~ = proj(x - tau (F(x) + A' lambda)),  z~ = z + rho delta d,
///   lambda~ = max(0, lambda + eps (A (2 x~ - x) - b - rho z - (2 delta rho^2 + 1) d)),
/// then every block relaxed by eta. d is the stacked disagreement.
template <typename Scalar>
SyncState<Scalar> sdgeno_step(const SyncState<Scalar>& s, const GameInstance<Scalar>& game, const StepConfig<Scalar>& cfg,
                              const NeighborReadHook& on_read = {}) {
  detail::check_step_shape(cfg, game);
  SyncWorkspace<Scalar> ws;
  SyncState<Scalar> next;
  sdgeno_step_into(s, next, game, cfg, ws, on_read);
  return next;
}

template <typename Scalar = double>
struct SolveOptions {
  Scalar tol = Scalar(1e-6);
  Index max_iter = 100000;
  std::optional<Vector<Scalar>> reference;  ///< x* for the rel_dist metric
  Index record_every = 1;
  bool unsafe = false;  ///< skip the step-size admissibility check
};

template <typename Scalar = double>
struct SolveResult {
  Vector<Scalar> x;
  Vector<Scalar> lambda_mean;
  Vector<Scalar> lambda;  ///< stacked per-agent multipliers
  Vector<Scalar> z;
  MetricsTrace<Scalar> trace;
  bool converged = false;
  Index iterations = 0;
  std::int64_t compute_ns = 0;
};

/// Throws InvalidParameter listing every violated bound.
template <typename Scalar>
void require_admissible_sync(const StepConfig<Scalar>& cfg, const GameInstance<Scalar>& game) {
  auto v = step_violations(cfg, game);
  if (!(cfg.eta > Scalar(0) && cfg.eta < eta_bound_sync(cfg.chi, cfg.theta))) v.push_back("eta outside (0, (4 chi theta - 1)/(2 chi theta))");
  if (!v.empty()) {
    std::string msg = "inadmissible step config:";
    for (const auto& s : v) msg += " " + s + ";";
    throw InvalidParameter(msg);
  }
}

/// Iterates SD-GENO until the KKT residuals and dual disagreement are <= tol.
/// Non-convergence is reported through `converged`, not thrown.
template <typename Scalar>
SolveResult<Scalar> sdgeno_solve(const GameInstance<Scalar>& game, const StepConfig<Scalar>& cfg, const SolveOptions<Scalar>& opts = {},
                                 std::optional<SyncState<Scalar>> initial = std::nullopt) {
  if (!opts.unsafe) require_admissible_sync(cfg, game);
  const Index N = game.num_agents();
  const Index m = game.num_constraints();
  SyncState<Scalar> state = initial ? *initial : SyncState<Scalar>::cold_start(game);

  detail::check_step_shape(cfg, game);
  SolveResult<Scalar> out;
  MetricsEvaluator<Scalar> metrics(game, opts.reference);
  SyncWorkspace<Scalar> ws;
  SyncState<Scalar> next = state;
  auto row = metrics(state.x, state.lambda, 0);
  out.trace.rows.push_back(row);
  std::int64_t ns = 0;
  Index k = 0;
  bool done = row.below(opts.tol);
  while (!done && k < opts.max_iter) {
    const auto t0 = std::chrono::steady_clock::now();
    sdgeno_step_into(state, next, game, cfg, ws);
    ns += std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0).count();
    std::swap(state, next);
    ++k;
    row = metrics(state.x, state.lambda, k);
    row.elapsed_ns = ns;
    done = row.below(opts.tol);
    if (done || k % opts.record_every == 0 || k == opts.max_iter) out.trace.rows.push_back(row);
  }
  out.converged = done;
  out.iterations = k;
  out.compute_ns = ns;
  out.x = state.x;
  out.lambda = state.lambda;
  out.z = state.z;
  out.lambda_mean = mean_multiplier<Scalar>(state.lambda, m, N);
  return out;
}

}  // namespace gne
