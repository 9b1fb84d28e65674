#pragma once

#include <gne/game.hpp>
#include <gne/graph.hpp>
#include <gne/types.hpp>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace gne {

/// Full parameter set of the preconditioned forward-backward iteration.
template <typename Scalar = double>
struct StepConfig {
  Scalar rho = Scalar(1);    ///< consensus gain, in (0, 1]
  Scalar delta = Scalar(0);  ///< auxiliary-variable step
  Vector<Scalar> tau;        ///< primal steps, one per agent
  Vector<Scalar> epsilon;    ///< dual steps, one per agent
  Scalar theta = Scalar(0);  ///< preconditioner margin, Phi - theta I > 0
  Scalar eta = Scalar(0);    ///< relaxation; unset (0) until a mode is chosen
  Scalar chi = Scalar(0);    ///< cocoercivity constant of the forward operator
  Scalar alpha = Scalar(0);
  Scalar ell = Scalar(0);
};

/// Natural-map residuals of the shared-multiplier KKT system.
template <typename Scalar = double>
struct KktResidual {
  Scalar primal = Scalar(0);
  Scalar dual = Scalar(0);
  Scalar disagreement = Scalar(0);
  Scalar violation = Scalar(0);

  Scalar max() const { return std::max(std::max(primal, dual), std::max(disagreement, violation)); }
};

/// chi = min{alpha / ell^2, 1 / lambda_max(L)}.
template <typename Scalar>
Scalar cocoercivity_constant(Scalar alpha, Scalar ell, Scalar laplacian_max_eig) {
  if (!(alpha > Scalar(0))) throw InvalidParameter("cocoercivity: alpha must be positive");
  if (!(ell >= alpha)) throw InvalidParameter("cocoercivity: ell must be >= alpha");
  const Scalar primal = alpha / (ell * ell);
  if (!(laplacian_max_eig > Scalar(0))) return primal;  // single agent: no consensus term
  return std::min(primal, Scalar(1) / laplacian_max_eig);
}

template <typename Scalar>
Scalar cocoercivity_constant(Scalar alpha, Scalar ell, const Matrix<Scalar>& L) {
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(L, Eigen::EigenvaluesOnly);
  return cocoercivity_constant(alpha, ell, L.size() ? eig.eigenvalues().maxCoeff() : Scalar(0));
}

/// Spectral norm of each coupling block A_i.
template <typename Scalar>
Vector<Scalar> block_norms(const GameInstance<Scalar>& game) {
  Vector<Scalar> norms(game.num_agents());
  for (Index i = 0; i < game.num_agents(); ++i) {
    const auto& A = game.block(i);
    if (A.size() == 0) {
      norms(i) = Scalar(0);
    } else {
      Eigen::JacobiSVD<Matrix<Scalar>> svd(A);
      norms(i) = svd.singularValues()(0);
    }
  }
  return norms;
}

template <typename Scalar>
void require_rho(Scalar rho) {
  if (!(rho > Scalar(0) && rho <= Scalar(1))) throw InvalidParameter("rho must lie in (0, 1]");
}

/// Step sizes at `safety` times their upper bounds. theta defaults to 1/chi.
template <typename Scalar>
StepConfig<Scalar> derive_steps(const GameInstance<Scalar>& game, Scalar rho, std::optional<Scalar> theta, Scalar safety,
                                std::optional<MonotonicityConstants<Scalar>> constants = std::nullopt) {
  require_rho(rho);
  if (!(safety > Scalar(0) && safety <= Scalar(1))) throw InvalidParameter("safety must lie in (0, 1]");
  const auto mc = constants ? *constants : monotonicity_constants(game.cost());
  StepConfig<Scalar> cfg;
  cfg.rho = rho;
  cfg.alpha = mc.alpha;
  cfg.ell = mc.ell;
  cfg.chi = cocoercivity_constant(mc.alpha, mc.ell, laplacian_max_eigenvalue<Scalar>(game.graph()));
  cfg.theta = theta ? *theta : Scalar(1) / cfg.chi;
  if (!(cfg.theta > Scalar(1) / (Scalar(2) * cfg.chi))) {
    throw ThetaTooSmall("theta = " + std::to_string(static_cast<double>(cfg.theta)) + " must exceed 1/(2 chi) = " +
                        std::to_string(static_cast<double>(Scalar(1) / (Scalar(2) * cfg.chi))));
  }
  const Vector<Scalar> a = block_norms(game);
  const Index N = game.num_agents();
  cfg.tau.resize(N);
  cfg.epsilon.resize(N);
  for (Index i = 0; i < N; ++i) {
    const auto deg = static_cast<Scalar>(game.graph().degree(i));
    cfg.tau(i) = safety / (a(i) + cfg.theta);
    cfg.epsilon(i) = safety / (rho * deg + a(i) + cfg.theta);
  }
  cfg.delta = safety / (Scalar(2) * rho + cfg.theta);
  return cfg;
}

/// Lists every violated step-size inequality (empty when admissible).
template <typename Scalar>
std::vector<std::string> step_violations(const StepConfig<Scalar>& cfg, const GameInstance<Scalar>& game) {
  std::vector<std::string> out;
  const Vector<Scalar> a = block_norms(game);
  const Scalar slack = Scalar(1) + Scalar(64) * Eigen::NumTraits<Scalar>::epsilon();
  if (!(cfg.rho > Scalar(0) && cfg.rho <= Scalar(1))) out.push_back("rho outside (0, 1]");
  if (!(cfg.chi > Scalar(0))) out.push_back("chi not positive");
  if (!(cfg.theta * Scalar(2) * cfg.chi > Scalar(1))) out.push_back("theta <= 1/(2 chi)");
  if (!(cfg.delta > Scalar(0) && cfg.delta <= slack / (Scalar(2) * cfg.rho + cfg.theta))) out.push_back("delta > 1/(2 rho + theta)");
  if (cfg.tau.size() != game.num_agents() || cfg.epsilon.size() != game.num_agents()) {
    out.push_back("tau/epsilon length differs from N");
    return out;
  }
  for (Index i = 0; i < game.num_agents(); ++i) {
    const auto deg = static_cast<Scalar>(game.graph().degree(i));
    if (!(cfg.tau(i) > Scalar(0) && cfg.tau(i) <= slack / (a(i) + cfg.theta))) {
      out.push_back("tau_" + std::to_string(i) + " > 1/(||A_i|| + theta)");
    }
    if (!(cfg.epsilon(i) > Scalar(0) && cfg.epsilon(i) <= slack / (cfg.rho * deg + a(i) + cfg.theta))) {
      out.push_back("epsilon_" + std::to_string(i) + " > 1/(rho |N_i| + ||A_i|| + theta)");
    }
  }
  return out;
}

/// Exclusive upper bound (4 chi theta - 1) / (2 chi theta) on the synchronous relaxation.
template <typename Scalar>
Scalar eta_bound_sync(Scalar chi, Scalar theta) {
  const Scalar ct = chi * theta;
  if (!(ct > Scalar(0.5))) throw InvalidParameter("eta bound needs chi * theta > 1/2");
  return (Scalar(4) * ct - Scalar(1)) / (Scalar(2) * ct);
}

/// 0.9 of the synchronous bound.
template <typename Scalar>
Scalar eta_default_sync(Scalar chi, Scalar theta) {
  return Scalar(0.9) * eta_bound_sync(chi, theta);
}

/// Inclusive upper bound c N p_min / (2 phi sqrt(p_min) + 1) * (2 - 1/(2 chi theta))
/// on the asynchronous relaxation under delays bounded by `max_delay`.
template <typename Scalar>
Scalar eta_bound_async(Scalar chi, Scalar theta, Index num_agents, Scalar p_min, Index max_delay, Scalar c) {
  const Scalar ct = chi * theta;
  if (!(ct > Scalar(0.5))) throw InvalidParameter("eta bound needs chi * theta > 1/2");
  if (num_agents < 1) throw InvalidParameter("eta bound needs N >= 1");
  const Scalar n = static_cast<Scalar>(num_agents);
  const Scalar tol = Scalar(64) * Eigen::NumTraits<Scalar>::epsilon();
  if (!(p_min > Scalar(0) && p_min * n <= Scalar(1) + tol)) throw InvalidParameter("p_min must lie in (0, 1/N]");
  if (max_delay < 0) throw InvalidParameter("delay bound must be non-negative");
  if (!(c > Scalar(0) && c < Scalar(1))) throw InvalidParameter("c must lie in (0, 1)");
  const Scalar phi = static_cast<Scalar>(max_delay);
  return c * n * p_min / (Scalar(2) * phi * std::sqrt(p_min) + Scalar(1)) * (Scalar(2) - Scalar(1) / (Scalar(2) * ct));
}

/// Dense preconditioner over col(x, sigma, lambda):
///   [ tau^-1     0          -Lambda' ]
///   [ 0          delta^-1 I  rho V    ]
///   [ -Lambda    rho V'      eps^-1   ]
/// Validation only; the solvers never form it.
template <typename Scalar>
Matrix<Scalar> phi_matrix(const StepConfig<Scalar>& cfg, const GameInstance<Scalar>& game) {
  const Index n = game.total_dim();
  const Index m = game.num_constraints();
  const Index E = game.num_edges();
  const Index N = game.num_agents();
  require_dims(cfg.tau.size() == N && cfg.epsilon.size() == N, "phi_matrix: step vectors have wrong length");
  const Index size = n + m * E + m * N;
  Matrix<Scalar> Phi = Matrix<Scalar>::Zero(size, size);
  const Index s0 = n;
  const Index l0 = n + m * E;
  for (Index i = 0; i < N; ++i) {
    const Index o = game.offset(i);
    for (Index k = 0; k < game.dim(i); ++k) Phi(o + k, o + k) = Scalar(1) / cfg.tau(i);
    for (Index r = 0; r < m; ++r) Phi(l0 + i * m + r, l0 + i * m + r) = Scalar(1) / cfg.epsilon(i);
    Phi.block(l0 + i * m, o, m, game.dim(i)) = -game.block(i);
    Phi.block(o, l0 + i * m, game.dim(i), m) = -game.block(i).transpose();
  }
  for (Index l = 0; l < E; ++l) {
    const auto e = game.graph().edge(l);
    for (Index r = 0; r < m; ++r) {
      const Index row = s0 + l * m + r;
      Phi(row, row) = Scalar(1) / cfg.delta;
      Phi(row, l0 + e.source * m + r) = cfg.rho;
      Phi(row, l0 + e.sink * m + r) = -cfg.rho;
      Phi(l0 + e.source * m + r, row) = cfg.rho;
      Phi(l0 + e.sink * m + r, row) = -cfg.rho;
    }
  }
  return Phi;
}

/// Natural-map KKT residuals at (x, lambda) with a single shared multiplier.
template <typename Scalar>
KktResidual<Scalar> kkt_residual(const GameInstance<Scalar>& game, const ConstVectorRef<Scalar>& x, const ConstVectorRef<Scalar>& lambda) {
  require_dims(x.size() == game.total_dim(), "kkt_residual: x has wrong length");
  require_dims(lambda.size() == game.num_constraints(), "kkt_residual: lambda has wrong length");
  const Matrix<Scalar> A = game.coupling_matrix();
  const Vector<Scalar> b = game.coupling_bound();
  const Vector<Scalar> F = pseudo_gradient(game, x);
  KktResidual<Scalar> r;
  const Vector<Scalar> step = x - (F + A.transpose() * lambda);
  r.primal = (x - project_boxes(game, step)).norm();
  const Vector<Scalar> slack = b - A * x;
  r.dual = (lambda - (lambda - slack).cwiseMax(Scalar(0))).norm();
  r.violation = slack.size() ? (-slack).cwiseMax(Scalar(0)).maxCoeff() : Scalar(0);
  return r;
}

/// KKT residuals for stacked per-agent multipliers: evaluated at the mean
/// multiplier, with ||(L kron I) lambda|| reported as disagreement.
template <typename Scalar>
KktResidual<Scalar> kkt_residual_stacked(const GameInstance<Scalar>& game, const ConstVectorRef<Scalar>& x,
                                         const ConstVectorRef<Scalar>& lambda) {
  const Index m = game.num_constraints();
  const Index N = game.num_agents();
  require_dims(lambda.size() == m * N, "kkt_residual_stacked: lambda has wrong length");
  const Vector<Scalar> mean = lambda.reshaped(m, N).rowwise().mean();
  auto r = kkt_residual(game, x, mean);
  r.disagreement = graph_disagreement(game.graph(), m, lambda).norm();
  return r;
}

template <typename Scalar>
Vector<Scalar> mean_multiplier(const ConstVectorRef<Scalar>& lambda, Index m, Index N) {
  return lambda.reshaped(m, N).rowwise().mean();
}

}  // namespace gne
