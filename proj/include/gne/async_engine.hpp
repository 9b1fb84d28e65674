#pragma once

#include <gne/game.hpp>
#include <gne/metrics.hpp>
#include <gne/schedule.hpp>
#include <gne/splitting.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace gne {

enum class AsyncAlgorithm { geed, geno };

/// Node-variable bookkeeping for AD-GENO.
enum class NodeUpdate {
  accumulator,         ///< z += eta*delta*rho*mu; equivalent to AD-GEED
  accumulator_no_rho,  ///< z += eta*delta*mu; differs from AD-GEED whenever rho != 1
  naive,               ///< synchronous node rule applied per activation, no accumulator
};

/// Coordinates of col(x, sigma, lambda) owned by each agent, 0-based.
struct MaskSet {
  std::vector<std::vector<Index>> owned;
  Index size = 0;
};

template <typename Scalar>
MaskSet build_masks(const GameInstance<Scalar>& game) {
  const auto& g = game.graph();
  const Index N = game.num_agents();
  const Index m = game.num_constraints();
  const Index n = game.total_dim();
  const Index sigma0 = n;
  const Index lambda0 = n + m * g.num_edges();
  MaskSet masks;
  masks.size = lambda0 + m * N;
  masks.owned.resize(static_cast<std::size_t>(N));
  for (Index i = 0; i < N; ++i) {
    auto& own = masks.owned[static_cast<std::size_t>(i)];
    for (Index c = 0; c < game.dim(i); ++c) own.push_back(game.offset(i) + c);
    for (Index l : g.out_edges(i))
      for (Index r = 0; r < m; ++r) own.push_back(sigma0 + l * m + r);
    for (Index r = 0; r < m; ++r) own.push_back(lambda0 + i * m + r);
  }
  return masks;
}

/// AD-GEED iterate; sigma holds one m-block per edge.
template <typename Scalar = double>
struct GeedState {
  Vector<Scalar> x;
  Vector<Scalar> lambda;
  Vector<Scalar> sigma;
};

/// AD-GENO iterate; mu holds the delivered part of each agent's public accumulator.
template <typename Scalar = double>
struct GenoState {
  Vector<Scalar> x;
  Vector<Scalar> lambda;
  Vector<Scalar> z;
  Vector<Scalar> mu;
};

/// Private copy taken by the active agent during its read phase.
template <typename Scalar = double>
struct DelayedView {
  Index reader = -1;
  Vector<Scalar> x_hat;       ///< full profile; own block fresh, neighbors delayed, others current
  Matrix<Scalar> lambda_hat;  ///< m x deg, ascending neighbor order
  Matrix<Scalar> sigma_hat;   ///< m x |in edges|, in-edge order
  std::vector<int> delays;    ///< realized, ascending neighbor order
};

namespace detail {

struct AgentLinks {
  std::vector<Index> out_sink_slot;  // neighbor slot of each out-edge sink
  std::vector<Index> in_source_slot;  // neighbor slot of each in-edge source
  std::vector<Index> in_source_pos;   // position of the edge in the source's out list
};

inline std::vector<AgentLinks> agent_links(const CommGraph& g) {
  std::vector<AgentLinks> links(static_cast<std::size_t>(g.num_nodes()));
  for (Index i = 0; i < g.num_nodes(); ++i) {
    auto& a = links[static_cast<std::size_t>(i)];
    for (Index l : g.out_edges(i)) a.out_sink_slot.push_back(g.neighbor_slot(i, g.edge(l).sink));
    for (Index l : g.in_edges(i)) {
      a.in_source_slot.push_back(g.neighbor_slot(i, g.edge(l).source));
      a.in_source_pos.push_back(g.out_slot(l));
    }
  }
  return links;
}

}  // namespace detail

/// Public memory: for each agent a ring of its last max_delay+1 publications.
/// Publications carry the index of the activation that follows them; the
/// initial state has stamp 0. A read at tick k with delay phi requests stamp
/// max(k - phi, previous request on that link), so information on a link never
/// goes backwards, and receives the newest publication not newer than that.
template <typename Scalar = double>
class PublicMemory {
 public:
  PublicMemory(const GameInstance<Scalar>& game, int max_delay, bool with_sigma, const Vector<Scalar>& x0, const Vector<Scalar>& lambda0,
               const Vector<Scalar>& sigma0)
      : game_(&game),
        links_(detail::agent_links(game.graph())),
        depth_(static_cast<Index>(max_delay) + 1),
        max_delay_(max_delay),
        with_sigma_(with_sigma) {
    if (max_delay < 0) throw InvalidParameter("max delay must be non-negative");
    const Index N = game.num_agents();
    const Index m = game.num_constraints();
    const auto& g = game.graph();
    slots_.resize(static_cast<std::size_t>(N));
    for (Index j = 0; j < N; ++j) {
      auto& s = slots_[static_cast<std::size_t>(j)];
      s.stamps.assign(static_cast<std::size_t>(depth_), -1);
      s.stamps[0] = 0;
      s.x = Matrix<Scalar>::Zero(game.dim(j), depth_);
      s.x.col(0) = x0.segment(game.offset(j), game.dim(j));
      s.lambda = Matrix<Scalar>::Zero(m, depth_);
      s.lambda.col(0) = lambda0.segment(j * m, m);
      if (with_sigma_) {
        const auto out = g.out_edges(j);
        s.sigma = Matrix<Scalar>::Zero(m * static_cast<Index>(out.size()), depth_);
        for (std::size_t p = 0; p < out.size(); ++p) s.sigma.col(0).segment(static_cast<Index>(p) * m, m) = sigma0.segment(out[p] * m, m);
      }
      requested_.emplace_back(static_cast<std::size_t>(g.degree(j)), Index(0));
    }
    pending_.resize(static_cast<std::size_t>(N));
  }

  int max_delay() const { return max_delay_; }

  /// Read phase of `reader` at tick k. `delays` is in ascending neighbor order.
  void read(Index reader, Index k, const std::vector<int>& delays, const Vector<Scalar>& x_current, DelayedView<Scalar>& view) {
    const auto& g = game_->graph();
    const Index m = game_->num_constraints();
    const auto nbrs = g.neighbors(reader);
    require_dims(delays.size() == nbrs.size(), "read: one delay per neighbor expected");
    view.reader = reader;
    view.x_hat = x_current;
    view.lambda_hat.resize(m, static_cast<Index>(nbrs.size()));
    view.delays.resize(nbrs.size());
    chosen_.resize(nbrs.size());
    auto& req = requested_[static_cast<std::size_t>(reader)];
    for (std::size_t s = 0; s < nbrs.size(); ++s) {
      if (delays[s] < 0) throw InvalidParameter("negative delay");
      const Index t = std::max(k - static_cast<Index>(delays[s]), req[s]);
      req[s] = t;
      view.delays[s] = static_cast<int>(k - t);
      const Index j = nbrs[s];
      const Index slot = find_slot(j, t);
      chosen_[s] = slot;
      const auto& pub = slots_[static_cast<std::size_t>(j)];
      view.x_hat.segment(game_->offset(j), game_->dim(j)) = pub.x.col(slot);
      view.lambda_hat.col(static_cast<Index>(s)) = pub.lambda.col(slot);
    }
    if (with_sigma_) {
      const auto& a = links_[static_cast<std::size_t>(reader)];
      view.sigma_hat.resize(m, static_cast<Index>(a.in_source_slot.size()));
      for (std::size_t p = 0; p < a.in_source_slot.size(); ++p) {
        const auto s = static_cast<std::size_t>(a.in_source_slot[p]);
        const auto& pub = slots_[static_cast<std::size_t>(nbrs[s])];
        view.sigma_hat.col(static_cast<Index>(p)) = pub.sigma.col(chosen_[s]).segment(a.in_source_pos[p] * m, m);
      }
    }
  }

  /// Write phase: agent j publishes its owned variables with the given stamp.
  void publish(Index j, Index stamp, const Vector<Scalar>& x, const Vector<Scalar>& lambda, const Vector<Scalar>* sigma = nullptr) {
    auto& pub = slots_[static_cast<std::size_t>(j)];
    const Index m = game_->num_constraints();
    pub.head = (pub.head + 1) % depth_;
    pub.stamps[static_cast<std::size_t>(pub.head)] = stamp;
    pub.x.col(pub.head) = x.segment(game_->offset(j), game_->dim(j));
    pub.lambda.col(pub.head) = lambda.segment(j * m, m);
    if (with_sigma_ && sigma) {
      const auto out = game_->graph().out_edges(j);
      for (std::size_t p = 0; p < out.size(); ++p) pub.sigma.col(pub.head).segment(static_cast<Index>(p) * m, m) = sigma->segment(out[p] * m, m);
    }
  }

  /// Adds `increment` to the recipient's accumulator once the recipient's
  /// view of the writer reaches `stamp`.
  template <typename Derived>
  void deposit(Index recipient, Index writer, Index stamp, const Eigen::MatrixBase<Derived>& increment, Vector<Scalar>& mu) {
    const Index m = game_->num_constraints();
    if (max_delay_ == 0) {
      mu.segment(recipient * m, m) += increment;
      return;
    }
    pending_[static_cast<std::size_t>(recipient)].push_back({game_->graph().neighbor_slot(recipient, writer), stamp, increment});
  }

  /// Moves every visible pending increment of `reader` into mu. Call after read().
  void deliver(Index reader, Vector<Scalar>& mu) {
    auto& list = pending_[static_cast<std::size_t>(reader)];
    if (list.empty()) return;
    const Index m = game_->num_constraints();
    const auto& req = requested_[static_cast<std::size_t>(reader)];
    std::size_t keep = 0;
    for (std::size_t e = 0; e < list.size(); ++e) {
      if (list[e].stamp <= req[static_cast<std::size_t>(list[e].slot)]) {
        mu.segment(reader * m, m) += list[e].increment;
      } else {
        if (keep != e) list[keep] = std::move(list[e]);
        ++keep;
      }
    }
    list.resize(keep);
  }

  std::size_t pending_count() const {
    std::size_t c = 0;
    for (const auto& l : pending_) c += l.size();
    return c;
  }

  const std::vector<detail::AgentLinks>& links() const { return links_; }

 private:
  struct Publications {
    std::vector<Index> stamps;
    Index head = 0;
    Matrix<Scalar> x;
    Matrix<Scalar> lambda;
    Matrix<Scalar> sigma;
  };

  struct Pending {
    Index slot;
    Index stamp;
    Vector<Scalar> increment;
  };

  // Newest slot with stamp <= t, falling back to the oldest retained one.
  Index find_slot(Index j, Index t) const {
    const auto& pub = slots_[static_cast<std::size_t>(j)];
    Index oldest = pub.head;
    Index oldest_stamp = pub.stamps[static_cast<std::size_t>(pub.head)];
    for (Index back = 0; back < depth_; ++back) {
      const Index slot = (pub.head - back + depth_) % depth_;
      const Index st = pub.stamps[static_cast<std::size_t>(slot)];
      if (st < 0) break;
      if (st <= t) return slot;
      if (st < oldest_stamp) {
        oldest = slot;
        oldest_stamp = st;
      }
    }
    return oldest;
  }

  const GameInstance<Scalar>* game_;
  std::vector<detail::AgentLinks> links_;
  Index depth_;
  int max_delay_;
  bool with_sigma_;
  std::vector<Publications> slots_;
  std::vector<std::vector<Index>> requested_;
  std::vector<std::vector<Pending>> pending_;
  std::vector<Index> chosen_;
};

template <typename Scalar = double>
struct StepWorkspace {
  Vector<Scalar> grad;
  Vector<Scalar> x_tilde;
  Vector<Scalar> x_tilde2;
  Vector<Scalar> agg;
  Vector<Scalar> dis;
  Vector<Scalar> l_tilde;

  /// Strategy buffers are used through head(n_i); they only grow.
  void reserve(Index ni) {
    if (grad.size() < ni) {
      grad.resize(ni);
      x_tilde.resize(ni);
      x_tilde2.resize(ni);
    }
  }
};

namespace detail {

// x_tilde = proj(x_i - tau_i (grad_i(x_hat) + A_i^T lambda_i)) and dis = sum_j (lambda_i - lambda_hat_j).
template <typename Scalar>
void primal_and_dissensus(const Vector<Scalar>& x, const Vector<Scalar>& lambda, const GameInstance<Scalar>& game, const StepConfig<Scalar>& cfg,
                          Index i, const DelayedView<Scalar>& view, StepWorkspace<Scalar>& ws) {
  const Index o = game.offset(i);
  const Index ni = game.dim(i);
  const Index m = game.num_constraints();
  const auto& A = game.block(i);
  const auto li = lambda.segment(i * m, m);
  const auto& box = game.box(i);
  ws.reserve(ni);
  auto grad = ws.grad.head(ni);
  game.cost().gradient(i, view.x_hat, grad);
  grad.noalias() += A.transpose().lazyProduct(li);
  ws.x_tilde.head(ni) = (x.segment(o, ni) - cfg.tau(i) * grad).cwiseMax(box.lower).cwiseMin(box.upper);
  const Index deg = view.lambda_hat.cols();
  ws.dis = Scalar(deg) * li - view.lambda_hat.rowwise().sum();
}

template <typename Scalar>
void check_step_shape_async(const StepConfig<Scalar>& cfg, const GameInstance<Scalar>& game) {
  if (cfg.tau.size() != game.num_agents() || cfg.epsilon.size() != game.num_agents()) {
    throw InvalidParameter("step config: tau/epsilon length differs from N");
  }
  if (!(cfg.eta > Scalar(0)) || !(cfg.delta > Scalar(0)) || !(cfg.rho > Scalar(0))) throw InvalidParameter("step config: steps must be positive");
}

// l_tilde = max(0, lambda_i + eps_i (A_i (2 x~_i - x_i) - b_i - rho aux - (2 delta rho^2 + 1) dis)).
template <typename Scalar, typename L, typename X, typename Z>
void dual_update(const L& li, const X& xi, const Z& aux, const GameInstance<Scalar>& game, const StepConfig<Scalar>& cfg, Index i,
                 StepWorkspace<Scalar>& ws) {
  const Scalar gain = Scalar(2) * cfg.delta * cfg.rho * cfg.rho + Scalar(1);
  ws.l_tilde = -game.share(i) - cfg.rho * aux - gain * ws.dis;
  const Index ni = xi.size();
  ws.x_tilde2.head(ni) = Scalar(2) * ws.x_tilde.head(ni) - xi;
  ws.l_tilde.noalias() += game.block(i).lazyProduct(ws.x_tilde2.head(ni));
  ws.l_tilde = (li + cfg.epsilon(i) * ws.l_tilde).cwiseMax(Scalar(0));
}

}  // namespace detail

/// One AD-GEED activation of agent i, in place. Only x_i, lambda_i and the
/// sigma blocks of i's out-edges change.
template <typename Scalar>
void adgeed_step(GeedState<Scalar>& s, const GameInstance<Scalar>& game, const StepConfig<Scalar>& cfg, Index i, const DelayedView<Scalar>& view,
                 const detail::AgentLinks& links, StepWorkspace<Scalar>& ws) {
  const Index o = game.offset(i);
  const Index ni = game.dim(i);
  const Index m = game.num_constraints();
  const auto& g = game.graph();
  detail::primal_and_dissensus(s.x, s.lambda, game, cfg, i, view, ws);

  const auto out = g.out_edges(i);
  ws.agg = -view.sigma_hat.rowwise().sum();
  for (Index l : out) ws.agg += s.sigma.segment(l * m, m);

  auto li = s.lambda.segment(i * m, m);
  detail::dual_update(li, s.x.segment(o, ni), ws.agg, game, cfg, i, ws);

  const Scalar edge_gain = cfg.eta * cfg.delta * cfg.rho;
  for (std::size_t p = 0; p < out.size(); ++p) {
    s.sigma.segment(out[p] * m, m) += edge_gain * (li - view.lambda_hat.col(links.out_sink_slot[p]));
  }
  s.x.segment(o, ni) += cfg.eta * (ws.x_tilde.head(ni) - s.x.segment(o, ni));
  li += cfg.eta * (ws.l_tilde - li);
}

/// One AD-GENO activation of agent i, in place. `mu_i` is the accumulator
/// value taken during the read phase; column p of `outgoing` receives the
/// increment destined for the sink of i's p-th out-edge (extra columns are
/// left untouched).
template <typename Scalar>
void adgeno_step(GenoState<Scalar>& s, const Vector<Scalar>& mu_i, const GameInstance<Scalar>& game, const StepConfig<Scalar>& cfg, Index i,
                 const DelayedView<Scalar>& view, const detail::AgentLinks& links, NodeUpdate mode, Matrix<Scalar>& outgoing,
                 StepWorkspace<Scalar>& ws) {
  const Index o = game.offset(i);
  const Index ni = game.dim(i);
  const Index m = game.num_constraints();
  detail::primal_and_dissensus(s.x, s.lambda, game, cfg, i, view, ws);

  auto zi = s.z.segment(i * m, m);
  auto li = s.lambda.segment(i * m, m);
  const auto lambda_tilde = [&](const auto& z_used) { detail::dual_update(li, s.x.segment(o, ni), z_used, game, cfg, i, ws); };

  const Index nout = static_cast<Index>(links.out_sink_slot.size());
  if (outgoing.rows() != m || outgoing.cols() < nout) outgoing.resize(m, std::max(nout, outgoing.cols()));
  if (mode == NodeUpdate::naive) {
    lambda_tilde(zi);
    zi += cfg.eta * cfg.rho * cfg.delta * ws.dis;
  } else {
    const Scalar mu_gain = cfg.eta * cfg.delta * (mode == NodeUpdate::accumulator ? cfg.rho : Scalar(1));
    zi += mu_gain * mu_i;
    lambda_tilde(zi);
    const Scalar edge_gain = cfg.eta * cfg.delta * cfg.rho;
    for (Index p = 0; p < nout; ++p) {
      outgoing.col(p) = view.lambda_hat.col(links.out_sink_slot[static_cast<std::size_t>(p)]) - li;
      zi -= edge_gain * outgoing.col(p);
    }
  }
  s.x.segment(o, ni) += cfg.eta * (ws.x_tilde.head(ni) - s.x.segment(o, ni));
  li += cfg.eta * (ws.l_tilde - li);
}

/// Sequential event loop hosting either algorithm: read, update, write.
template <typename Scalar = double>
class AsyncEngine {
 public:
  AsyncEngine(const GameInstance<Scalar>& game, const StepConfig<Scalar>& cfg, AsyncAlgorithm algorithm, int max_delay, const Vector<Scalar>& x0,
              const Vector<Scalar>& lambda0, NodeUpdate node_update = NodeUpdate::accumulator)
      : game_(&game),
        cfg_(cfg),
        algorithm_(algorithm),
        node_update_(node_update),
        memory_(game, max_delay, algorithm == AsyncAlgorithm::geed, x0, lambda0,
                Vector<Scalar>::Zero(game.num_constraints() * game.num_edges())) {
    detail::check_step_shape_async(cfg, game);
    const Index mN = game.num_constraints() * game.num_agents();
    require_dims(x0.size() == game.total_dim() && lambda0.size() == mN, "async engine: initial state shape");
    if (algorithm == AsyncAlgorithm::geed) {
      geed_ = {x0, lambda0, Vector<Scalar>::Zero(game.num_constraints() * game.num_edges())};
    } else {
      geno_ = {x0, lambda0, Vector<Scalar>::Zero(mN), Vector<Scalar>::Zero(mN)};
    }
  }

  void activate(Index k, const ScheduleEntry& entry) {
    const Index i = entry.agent;
    if (i < 0 || i >= game_->num_agents()) throw InvalidParameter("activation of unknown agent");
    const auto& links = memory_.links()[static_cast<std::size_t>(i)];
    if (algorithm_ == AsyncAlgorithm::geed) {
      memory_.read(i, k, entry.delays, geed_.x, view_);
      const auto t0 = Clock::now();
      adgeed_step(geed_, *game_, cfg_, i, view_, links, ws_);
      update_ns_ += std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0).count();
      memory_.publish(i, k + 1, geed_.x, geed_.lambda, &geed_.sigma);
      return;
    }
    const Index m = game_->num_constraints();
    memory_.read(i, k, entry.delays, geno_.x, view_);
    if (node_update_ != NodeUpdate::naive) {
      memory_.deliver(i, geno_.mu);
      mu_taken_ = geno_.mu.segment(i * m, m);
      geno_.mu.segment(i * m, m).setZero();
    }
    const auto t0 = Clock::now();
    adgeno_step(geno_, mu_taken_, *game_, cfg_, i, view_, links, node_update_, outgoing_, ws_);
    update_ns_ += std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0).count();
    if (node_update_ != NodeUpdate::naive) {
      const auto out = game_->graph().out_edges(i);
      for (std::size_t p = 0; p < out.size(); ++p) {
        memory_.deposit(game_->graph().edge(out[p]).sink, i, k + 1, outgoing_.col(static_cast<Index>(p)), geno_.mu);
      }
    }
    memory_.publish(i, k + 1, geno_.x, geno_.lambda);
  }

  AsyncAlgorithm algorithm() const { return algorithm_; }
  const Vector<Scalar>& x() const { return algorithm_ == AsyncAlgorithm::geed ? geed_.x : geno_.x; }
  const Vector<Scalar>& lambda() const { return algorithm_ == AsyncAlgorithm::geed ? geed_.lambda : geno_.lambda; }
  const GeedState<Scalar>& geed_state() const { return geed_; }
  const GenoState<Scalar>& geno_state() const { return geno_; }
  const DelayedView<Scalar>& last_view() const { return view_; }
  /// Accumulator value consumed by the latest AD-GENO activation.
  const Vector<Scalar>& last_mu() const { return mu_taken_; }
  const PublicMemory<Scalar>& memory() const { return memory_; }
  /// Time spent in the local update phase, excluding reads and writes.
  std::int64_t update_ns() const { return update_ns_; }

 private:
  using Clock = std::chrono::steady_clock;

  const GameInstance<Scalar>* game_;
  StepConfig<Scalar> cfg_;
  AsyncAlgorithm algorithm_;
  NodeUpdate node_update_;
  PublicMemory<Scalar> memory_;
  GeedState<Scalar> geed_;
  GenoState<Scalar> geno_;
  DelayedView<Scalar> view_;
  StepWorkspace<Scalar> ws_;
  Vector<Scalar> mu_taken_;
  Matrix<Scalar> outgoing_;
  std::int64_t update_ns_ = 0;
};

template <typename Scalar = double>
struct AsyncOptions {
  Scalar tol = Scalar(1e-6);
  Index max_activations = 10000000;
  std::optional<Vector<Scalar>> reference;
  std::optional<Vector<Scalar>> x0;
  std::optional<Vector<Scalar>> lambda0;
  NodeUpdate node_update = NodeUpdate::accumulator;
  bool record_schedule = false;
  Index record_every = 1;  ///< epochs between trace rows
};

template <typename Scalar = double>
struct AsyncResult {
  Vector<Scalar> x;
  Vector<Scalar> lambda_mean;
  Vector<Scalar> lambda;
  MetricsTrace<Scalar> trace;
  bool converged = false;
  Index activations = 0;
  Index epochs = 0;
  std::int64_t compute_ns = 0;  ///< local update phase only
  std::int64_t wall_ns = 0;     ///< whole activation loop, reads and writes included
  std::vector<ScheduleEntry> schedule;  ///< realized delays
  int max_realized_delay = 0;
};

/// Throws InvalidParameter listing every violated bound.
template <typename Scalar>
void require_admissible_async(const StepConfig<Scalar>& cfg, const GameInstance<Scalar>& game, Scalar p_min, Index max_delay, Scalar c) {
  auto v = step_violations(cfg, game);
  const Scalar bound = eta_bound_async(cfg.chi, cfg.theta, game.num_agents(), p_min, max_delay, c);
  if (!(cfg.eta > Scalar(0) && cfg.eta <= bound)) v.push_back("eta outside (0, " + std::to_string(double(bound)) + "]");
  if (!v.empty()) {
    std::string msg = "inadmissible step config:";
    for (const auto& s : v) msg += " " + s + ";";
    throw InvalidParameter(msg);
  }
}

/// Runs the event loop from `source` until the residuals fall below tol
/// (checked after every epoch of N activations) or the budget is spent.
template <typename Scalar>
AsyncResult<Scalar> run_async(const GameInstance<Scalar>& game, const StepConfig<Scalar>& cfg, AsyncAlgorithm algorithm, ScheduleSource& source,
                              const AsyncOptions<Scalar>& opts = {}) {
  const Index N = game.num_agents();
  const Index m = game.num_constraints();
  const Vector<Scalar> x0 = opts.x0 ? *opts.x0 : project_boxes(game, Vector<Scalar>::Zero(game.total_dim()));
  const Vector<Scalar> l0 = opts.lambda0 ? *opts.lambda0 : Vector<Scalar>::Zero(m * N);
  AsyncEngine<Scalar> engine(game, cfg, algorithm, source.max_delay(), x0, l0, opts.node_update);

  Index budget = opts.max_activations;
  if (source.length() >= 0) budget = std::min(budget, source.length());

  AsyncResult<Scalar> out;
  MetricsEvaluator<Scalar> metrics(game, opts.reference);
  auto row = metrics(engine.x(), engine.lambda(), 0);
  out.trace.rows.push_back(row);
  bool done = row.below(opts.tol);

  std::vector<ScheduleEntry> batch(static_cast<std::size_t>(N));
  Index k = 0;
  Index epoch = 0;
  std::int64_t ns = 0;
  while (!done && k < budget) {
    const Index count = std::min(N, budget - k);
    for (Index a = 0; a < count; ++a) source.next(k + a, batch[static_cast<std::size_t>(a)]);
    const auto t0 = std::chrono::steady_clock::now();
    if (opts.record_schedule) {
      for (Index a = 0; a < count; ++a) {
        engine.activate(k + a, batch[static_cast<std::size_t>(a)]);
        out.schedule.push_back({batch[static_cast<std::size_t>(a)].agent, engine.last_view().delays});
      }
    } else {
      for (Index a = 0; a < count; ++a) engine.activate(k + a, batch[static_cast<std::size_t>(a)]);
    }
    ns += std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0).count();
    k += count;
    ++epoch;
    row = metrics(engine.x(), engine.lambda(), epoch);
    row.elapsed_ns = engine.update_ns();
    done = row.below(opts.tol);
    if (done || epoch % opts.record_every == 0 || k >= budget) out.trace.rows.push_back(row);
  }
  for (const auto& e : out.schedule)
    for (int d : e.delays) out.max_realized_delay = std::max(out.max_realized_delay, d);
  out.converged = done;
  out.activations = k;
  out.epochs = epoch;
  out.compute_ns = engine.update_ns();
  out.wall_ns = ns;
  out.x = engine.x();
  out.lambda = engine.lambda();
  out.lambda_mean = mean_multiplier<Scalar>(out.lambda, m, N);
  return out;
}

template <typename Scalar>
AsyncResult<Scalar> run_async(const GameInstance<Scalar>& game, const StepConfig<Scalar>& cfg, AsyncAlgorithm algorithm,
                              const ActivationModel& activation, const DelayModel& delays, const AsyncOptions<Scalar>& opts = {}) {
  ModelSchedule source(game.graph(), activation, delays);
  return run_async(game, cfg, algorithm, source, opts);
}

/// Runs AD-GEED and AD-GENO in lockstep on one schedule realization and
/// returns max_k ||(x, lambda)_geed(k) - (x, lambda)_geno(k)||_inf.
template <typename Scalar>
Scalar trace_equivalence(const GameInstance<Scalar>& game, const StepConfig<Scalar>& cfg, const ActivationModel& activation,
                         const DelayModel& delays, Index horizon, NodeUpdate node_update = NodeUpdate::accumulator,
                         const std::optional<Vector<Scalar>>& x0 = std::nullopt, const std::optional<Vector<Scalar>>& lambda0 = std::nullopt) {
  const Index m = game.num_constraints();
  const Vector<Scalar> xs = x0 ? *x0 : project_boxes(game, Vector<Scalar>::Zero(game.total_dim()));
  const Vector<Scalar> ls = lambda0 ? *lambda0 : Vector<Scalar>::Zero(m * game.num_agents());
  ModelSchedule source(game.graph(), activation, delays);
  AsyncEngine<Scalar> geed(game, cfg, AsyncAlgorithm::geed, delays.max_delay(), xs, ls);
  AsyncEngine<Scalar> geno(game, cfg, AsyncAlgorithm::geno, delays.max_delay(), xs, ls, node_update);
  ScheduleEntry entry;
  Scalar worst(0);
  for (Index k = 0; k < horizon; ++k) {
    source.next(k, entry);
    geed.activate(k, entry);
    geno.activate(k, entry);
    worst = std::max(worst, (geed.x() - geno.x()).template lpNorm<Eigen::Infinity>());
    worst = std::max(worst, (geed.lambda() - geno.lambda()).template lpNorm<Eigen::Infinity>());
  }
  return worst;
}

}  // namespace gne
