#pragma once

#include <gne/game.hpp>
#include <gne/oracle.hpp>

#include <string>
#include <vector>

namespace gne {

struct ValidationCheck {
  std::string name;
  bool ok = true;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;

  bool ok() const {
    for (const auto& c : checks)
      if (!c.ok) return false;
    return true;
  }

  const ValidationCheck* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }

  std::vector<std::string> failures() const {
    std::vector<std::string> out;
    for (const auto& c : checks)
      if (!c.ok) out.push_back(c.name + ": " + c.detail);
    return out;
  }
};

/// Looks for x in Omega with A x < b. Tries the box corners and center, then
/// projects the center onto the constraint set tightened by a margin.
template <typename Scalar>
bool has_strictly_feasible_point(const GameInstance<Scalar>& game) {
  const Matrix<Scalar> A = game.coupling_matrix();
  const Vector<Scalar> b = game.coupling_bound();
  if (A.rows() == 0) return true;
  const Vector<Scalar> lo = game.lower();
  const Vector<Scalar> hi = game.upper();
  const auto strict = [&](const Vector<Scalar>& x) { return (A * x - b).maxCoeff() < Scalar(0); };
  const Vector<Scalar> center = (lo + hi) / Scalar(2);
  if (strict(center) || strict(lo) || strict(hi)) return true;
  // Per-coordinate minimiser of sum_r A_r x.
  const Vector<Scalar> colsum = A.colwise().sum().transpose();
  Vector<Scalar> corner(lo.size());
  for (Index k = 0; k < lo.size(); ++k) corner(k) = colsum(k) > Scalar(0) ? lo(k) : hi(k);
  if (strict(corner)) return true;

  const Scalar margin = Scalar(1e-6) * std::max(Scalar(1), b.cwiseAbs().maxCoeff());
  AffineCoupling<Scalar> tight = game.coupling();
  for (auto& s : tight.shares) s.array() -= margin / Scalar(game.num_agents());
  GameInstance<Scalar> shrunk(game.boxes(), tight, game.graph(), game.cost());
  try {
    return strict(project_feasible<Scalar>(shrunk, center, Scalar(1e-12), 20000));
  } catch (const Infeasible&) {
    return false;
  }
}

/// Checks the standing assumptions; failures are reported, never thrown.
template <typename Scalar>
ValidationReport validate_game(const GameInstance<Scalar>& game) {
  ValidationReport rep;
  {
    ValidationCheck c{"compact_boxes", true, ""};
    for (Index i = 0; i < game.num_agents(); ++i) {
      if (!game.box(i).is_compact()) {
        c.ok = false;
        c.detail += "agent " + std::to_string(i) + " has an unbounded box; ";
      }
    }
    rep.checks.push_back(c);
  }
  {
    ValidationCheck c{"dimensions", true, ""};
    Index n = 0;
    for (Index i = 0; i < game.num_agents(); ++i) {
      n += game.dim(i);
      if (game.block(i).rows() != game.num_constraints() || game.block(i).cols() != game.dim(i)) {
        c.ok = false;
        c.detail += "block " + std::to_string(i) + " shape; ";
      }
    }
    if (n != game.total_dim()) {
      c.ok = false;
      c.detail += "total dimension; ";
    }
    if (game.graph().num_nodes() != game.num_agents()) {
      c.ok = false;
      c.detail += "graph size; ";
    }
    rep.checks.push_back(c);
  }
  rep.checks.push_back({"connected_graph", game.graph().is_connected(), game.graph().is_connected() ? "" : "communication graph is disconnected"});
  if (game.cost().affine) {
    ValidationCheck c{"strong_monotonicity", true, ""};
    try {
      const auto mc = monotonicity_constants(game.cost());
      c.detail = "alpha = " + std::to_string(static_cast<double>(mc.alpha)) + ", ell = " + std::to_string(static_cast<double>(mc.ell));
    } catch (const NotStronglyMonotone& e) {
      c.ok = false;
      c.detail = e.what();
    }
    rep.checks.push_back(c);
  }
  {
    const bool ok = !rep.find("compact_boxes")->ok ? false : has_strictly_feasible_point(game);
    rep.checks.push_back({"slater", ok, ok ? "" : "no point of the boxes satisfies A x < b strictly"});
  }
  return rep;
}

}  // namespace gne
