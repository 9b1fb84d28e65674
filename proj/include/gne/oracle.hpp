#pragma once

#include <gne/game.hpp>
#include <gne/splitting.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace gne {

/// Euclidean projection onto {x in Omega : A x <= b} by Dykstra's alternating
/// projections over the box and each coupling halfspace.
template <typename Scalar, typename Derived>
Vector<Scalar> project_feasible(const GameInstance<Scalar>& game, const Eigen::MatrixBase<Derived>& v, Scalar tol = Scalar(1e-12),
                                Index max_cycles = 200000) {
  const Index n = game.total_dim();
  require_dims(v.size() == n, "project_feasible: vector length differs from n");
  const Matrix<Scalar> A = game.coupling_matrix();
  const Vector<Scalar> b = game.coupling_bound();
  const Vector<Scalar> lo = game.lower();
  const Vector<Scalar> hi = game.upper();
  const Index m = A.rows();
  Vector<Scalar> row_sq(m);
  for (Index r = 0; r < m; ++r) row_sq(r) = A.row(r).squaredNorm();

  Vector<Scalar> x = v;
  Matrix<Scalar> incr = Matrix<Scalar>::Zero(n, m + 1);
  Vector<Scalar> prev(n);
  Vector<Scalar> y(n);
  const Scalar scale = std::max(Scalar(1), v.template lpNorm<Eigen::Infinity>());
  Vector<Scalar> next(n);
  for (Index cycle = 0; cycle < max_cycles; ++cycle) {
    prev = x;
    Scalar moved(0);
    y = x + incr.col(0);
    x = y.cwiseMax(lo).cwiseMin(hi);
    next = y - x;
    moved = std::max(moved, (next - incr.col(0)).template lpNorm<Eigen::Infinity>());
    incr.col(0) = next;
    for (Index r = 0; r < m; ++r) {
      y = x + incr.col(r + 1);
      const Scalar excess = A.row(r).dot(y) - b(r);
      if (excess > Scalar(0) && row_sq(r) > Scalar(0)) {
        x = y - (excess / row_sq(r)) * A.row(r).transpose();
      } else {
        x = y;
      }
      next = y - x;
      moved = std::max(moved, (next - incr.col(r + 1)).template lpNorm<Eigen::Infinity>());
      incr.col(r + 1) = next;
    }
    moved = std::max(moved, (x - prev).template lpNorm<Eigen::Infinity>());
    if (moved <= tol * scale) {
      const Scalar viol = m ? (A * x - b).maxCoeff() : Scalar(0);
      if (viol <= std::sqrt(tol) * scale) return x;
    }
  }
  throw Infeasible("project_feasible: no convergence; feasible set may be empty");
}

template <typename Scalar = double>
struct OracleSolution {
  Vector<Scalar> x;
  Vector<Scalar> lambda;
  KktResidual<Scalar> residual;
  Index iterations = 0;
  Scalar step = Scalar(0);
};

/// Multiplier of the active coupling rows that best balances F(x) on the
/// coordinates strictly inside the box, clamped at zero.
template <typename Scalar>
Vector<Scalar> recover_multiplier(const GameInstance<Scalar>& game, const Vector<Scalar>& x, const Vector<Scalar>& Fx, Scalar active_tol) {
  const Matrix<Scalar> A = game.coupling_matrix();
  const Vector<Scalar> b = game.coupling_bound();
  const Vector<Scalar> lo = game.lower();
  const Vector<Scalar> hi = game.upper();
  std::vector<Index> active;
  for (Index r = 0; r < A.rows(); ++r)
    if (A.row(r).dot(x) >= b(r) - active_tol * std::max(Scalar(1), std::abs(b(r)))) active.push_back(r);
  std::vector<Index> free;
  for (Index k = 0; k < x.size(); ++k)
    if (x(k) > lo(k) + active_tol && x(k) < hi(k) - active_tol) free.push_back(k);

  Vector<Scalar> lambda = Vector<Scalar>::Zero(A.rows());
  if (active.empty() || free.empty()) return lambda;
  Matrix<Scalar> G(static_cast<Index>(free.size()), static_cast<Index>(active.size()));
  Vector<Scalar> rhs(static_cast<Index>(free.size()));
  for (std::size_t f = 0; f < free.size(); ++f) {
    rhs(static_cast<Index>(f)) = -Fx(free[f]);
    for (std::size_t a = 0; a < active.size(); ++a) G(static_cast<Index>(f), static_cast<Index>(a)) = A(active[a], free[f]);
  }
  const Vector<Scalar> sol = G.completeOrthogonalDecomposition().solve(rhs);
  for (std::size_t a = 0; a < active.size(); ++a) lambda(active[a]) = std::max(Scalar(0), sol(static_cast<Index>(a)));
  return lambda;
}

/// Reference v-GNE by extragradient on VI(F, X):
///   y = P(x - g F(x)),  x <- P(x - g F(y)),  g = 1 / (2 ell),
/// halving g whenever the natural-map residual grows by 10x over its best.
template <typename Scalar>
OracleSolution<Scalar> vgne_oracle(const GameInstance<Scalar>& game, Scalar tol = Scalar(1e-9), Index max_iter = 2000000) {
  const auto consts = monotonicity_constants(game.cost());
  Scalar gamma = Scalar(0.5) / consts.ell;
  const Index n = game.total_dim();

  Vector<Scalar> x = project_feasible<Scalar>(game, Vector<Scalar>::Zero(n));
  Vector<Scalar> Fx = pseudo_gradient(game, x);
  Scalar best = std::numeric_limits<Scalar>::infinity();
  Index it = 0;
  for (; it < max_iter; ++it) {
    const Vector<Scalar> natural = x - project_feasible<Scalar>(game, x - Fx);
    const Scalar res = natural.norm();
    if (res <= tol) break;
    if (res > Scalar(10) * best) gamma /= Scalar(2);
    best = std::min(best, res);
    const Vector<Scalar> y = project_feasible<Scalar>(game, x - gamma * Fx);
    const Vector<Scalar> Fy = pseudo_gradient(game, y);
    x = project_feasible<Scalar>(game, x - gamma * Fy);
    Fx = pseudo_gradient(game, x);
  }
  if (it == max_iter) throw Error("vgne_oracle: no convergence within the iteration cap");

  OracleSolution<Scalar> out;
  out.x = x;
  out.lambda = recover_multiplier(game, x, Fx, Scalar(1e-7));
  out.residual = kkt_residual(game, x, out.lambda);
  out.iterations = it;
  out.step = gamma;
  return out;
}

/// Lattice search for tiny games with scalar strategies: the feasible grid
/// point with the smallest natural-map residual ||x - P(x - F(x))||.
template <typename Scalar>
Vector<Scalar> brute_force_equilibrium(const GameInstance<Scalar>& game, Index grid) {
  const Index N = game.num_agents();
  if (N > 3) throw InvalidParameter("brute force: at most three agents");
  for (Index i = 0; i < N; ++i)
    if (game.dim(i) != 1) throw InvalidParameter("brute force: scalar strategies only");
  if (grid < 2) throw InvalidParameter("brute force: grid needs at least two points");
  const Vector<Scalar> lo = game.lower();
  const Vector<Scalar> hi = game.upper();
  if (!lo.allFinite() || !hi.allFinite()) throw InvalidParameter("brute force: boxes must be compact");
  const Matrix<Scalar> A = game.coupling_matrix();
  const Vector<Scalar> b = game.coupling_bound();

  Vector<Scalar> best_x = lo;
  Scalar best = std::numeric_limits<Scalar>::infinity();
  Vector<Scalar> x(N);
  std::vector<Index> idx(static_cast<std::size_t>(N), 0);
  while (true) {
    for (Index i = 0; i < N; ++i) x(i) = lo(i) + (hi(i) - lo(i)) * Scalar(idx[static_cast<std::size_t>(i)]) / Scalar(grid - 1);
    if (A.rows() == 0 || (A * x - b).maxCoeff() <= Scalar(1e-12)) {
      const Scalar r = (x - project_feasible<Scalar>(game, x - pseudo_gradient(game, x), Scalar(1e-13))).norm();
      if (r < best) {
        best = r;
        best_x = x;
      }
    }
    Index d = 0;
    while (d < N && ++idx[static_cast<std::size_t>(d)] == grid) idx[static_cast<std::size_t>(d++)] = 0;
    if (d == N) break;
  }
  return best_x;
}

}  // namespace gne
