#pragma once

#include <gne/game.hpp>
#include <gne/splitting.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace gne {

/// One sample of solver progress. For asynchronous runs `iter` counts epochs
/// (N activations each), so rows are comparable with synchronous iterations.
template <typename Scalar = double>
struct MetricsRow {
  Index iter = 0;
  Scalar rel_dist_to_opt = std::numeric_limits<Scalar>::quiet_NaN();
  Scalar disagreement = Scalar(0);
  Scalar violation = Scalar(0);
  Scalar kkt_primal = Scalar(0);
  Scalar kkt_dual = Scalar(0);
  std::int64_t elapsed_ns = 0;

  bool below(Scalar tol) const { return kkt_primal <= tol && kkt_dual <= tol && disagreement <= tol && violation <= tol; }
};

template <typename Scalar = double>
struct MetricsTrace {
  std::vector<MetricsRow<Scalar>> rows;

  bool empty() const { return rows.empty(); }
  const MetricsRow<Scalar>& back() const { return rows.back(); }
};

/// Metrics with the game's dense data cached, for per-iteration use.
template <typename Scalar = double>
class MetricsEvaluator {
 public:
  MetricsEvaluator(const GameInstance<Scalar>& game, std::optional<Vector<Scalar>> reference = std::nullopt)
      : game_(&game),
        A_(game.coupling_matrix()),
        b_(game.coupling_bound()),
        lo_(game.lower()),
        hi_(game.upper()),
        reference_(std::move(reference)) {
    if (reference_) {
      require_dims(reference_->size() == game.total_dim(), "metrics: reference has wrong length");
      const Scalar nrm = reference_->norm();
      ref_norm_ = nrm > Scalar(0) ? nrm : Scalar(1);
    }
  }

  MetricsRow<Scalar> operator()(const ConstVectorRef<Scalar>& x, const ConstVectorRef<Scalar>& lambda_stacked, Index iter) {
    const Index m = game_->num_constraints();
    const Index N = game_->num_agents();
    require_dims(x.size() == game_->total_dim() && lambda_stacked.size() == m * N, "metrics: state shape");
    F_.resize(x.size());
    for (Index i = 0; i < N; ++i) {
      auto seg = F_.segment(game_->offset(i), game_->dim(i));
      game_->cost().gradient(i, x, seg);
    }
    mean_ = lambda_stacked.reshaped(m, N).rowwise().mean();
    MetricsRow<Scalar> row;
    row.iter = iter;
    step_.noalias() = A_.transpose().lazyProduct(mean_);
    step_ = x - (F_ + step_);
    row.kkt_primal = (x - step_.cwiseMax(lo_).cwiseMin(hi_)).norm();
    slack_.noalias() = b_ - A_.lazyProduct(x);
    row.kkt_dual = (mean_ - (mean_ - slack_).cwiseMax(Scalar(0))).norm();
    row.violation = m ? (-slack_).cwiseMax(Scalar(0)).maxCoeff() : Scalar(0);
    Scalar dis(0);
    const auto& g = game_->graph();
    for (Index i = 0; i < N; ++i) {
      d_ = Scalar(g.degree(i)) * lambda_stacked.segment(i * m, m);
      for (Index j : g.neighbors(i)) d_ -= lambda_stacked.segment(j * m, m);
      dis += d_.squaredNorm();
    }
    row.disagreement = std::sqrt(dis);
    if (reference_) row.rel_dist_to_opt = (x - *reference_).norm() / ref_norm_;
    return row;
  }

 private:
  const GameInstance<Scalar>* game_;
  Matrix<Scalar> A_;
  Vector<Scalar> b_, lo_, hi_;
  std::optional<Vector<Scalar>> reference_;
  Scalar ref_norm_ = Scalar(1);
  Vector<Scalar> F_, mean_, step_, slack_, d_;
};

template <typename Scalar>
MetricsRow<Scalar> evaluate_metrics(const GameInstance<Scalar>& game, const ConstVectorRef<Scalar>& x,
                                    const ConstVectorRef<Scalar>& lambda_stacked, const std::optional<Vector<Scalar>>& reference,
                                    Index iter) {
  const auto r = kkt_residual_stacked(game, x, lambda_stacked);
  MetricsRow<Scalar> row;
  row.iter = iter;
  row.disagreement = r.disagreement;
  row.violation = r.violation;
  row.kkt_primal = r.primal;
  row.kkt_dual = r.dual;
  if (reference) {
    const Scalar denom = reference->norm();
    row.rel_dist_to_opt = (x - *reference).norm() / (denom > Scalar(0) ? denom : Scalar(1));
  }
  return row;
}

}  // namespace gne
