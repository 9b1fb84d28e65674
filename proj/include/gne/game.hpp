#pragma once

#include <gne/graph.hpp>
#include <gne/types.hpp>

#include <cmath>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gne {

/// Local strategy set of one agent: lower <= x_i <= upper.
template <typename Scalar = double>
struct BoxSet {
  Vector<Scalar> lower;
  Vector<Scalar> upper;

  BoxSet() = default;
  BoxSet(Vector<Scalar> lo, Vector<Scalar> hi) : lower(std::move(lo)), upper(std::move(hi)) {
    require_dims(lower.size() == upper.size(), "box bounds differ in length");
    for (Index k = 0; k < lower.size(); ++k) {
      if (!(lower(k) <= upper(k))) throw InvalidParameter("box lower bound exceeds upper bound");
    }
  }

  Index dim() const { return lower.size(); }

  bool is_compact() const { return lower.allFinite() && upper.allFinite(); }

  Vector<Scalar> center() const { return (lower + upper) / Scalar(2); }
};

/// Component-wise clamp onto the box.
template <typename Scalar, typename Derived>
Vector<Scalar> project_box(const BoxSet<Scalar>& box, const Eigen::MatrixBase<Derived>& v) {
  require_dims(v.size() == box.dim(), "project_box: dimension mismatch");
  return v.cwiseMax(box.lower).cwiseMin(box.upper);
}

/// A x <= b with A = [A_1 ... A_N] and b = sum_i b_i.
template <typename Scalar = double>
struct AffineCoupling {
  std::vector<Matrix<Scalar>> blocks;
  std::vector<Vector<Scalar>> shares;

  Index rows() const { return blocks.empty() ? 0 : blocks.front().rows(); }

  Vector<Scalar> bound() const {
    Vector<Scalar> b = Vector<Scalar>::Zero(rows());
    for (const auto& s : shares) b += s;
    return b;
  }

  /// Splits a global bound evenly across agents.
  static AffineCoupling even_split(std::vector<Matrix<Scalar>> blocks, const Vector<Scalar>& b) {
    AffineCoupling c;
    const auto n = static_cast<Scalar>(blocks.size());
    c.shares.assign(blocks.size(), b / n);
    c.blocks = std::move(blocks);
    return c;
  }
};

/// F(x) = M x + u.
template <typename Scalar = double>
struct AffineRepresentation {
  Matrix<Scalar> M;
  Vector<Scalar> u;
};

/// Linear-quadratic cost with a linear inverse-demand price:
///   f_i(x) = x_i' Q_i x_i + q_i' x_i - (P - D S x)' S_i x_i
/// where S = [S_1 ... S_N] maps strategies to market quantities and D is
/// diagonal. With S_i = A_i this is the network Cournot model; with no
/// markets it is a plain separable quadratic.
template <typename Scalar = double>
struct QuadraticCost {
  std::vector<Matrix<Scalar>> Q;
  std::vector<Vector<Scalar>> q;
  std::vector<Matrix<Scalar>> market;
  Vector<Scalar> price_intercept;
  Vector<Scalar> price_slope;

  Index markets() const { return price_intercept.size(); }
};

/// Evaluable pseudo-gradient with optional cost values and affine form.
template <typename Scalar = double>
struct CostModel {
  /// (agent i, full profile x, out) writes grad_{x_i} f_i(x) into out.
  using Gradient = std::function<void(Index, const ConstVectorRef<Scalar>&, VectorRef<Scalar>)>;
  using Value = std::function<Scalar(Index, const ConstVectorRef<Scalar>&)>;

  Gradient gradient;
  Value value;
  std::optional<AffineRepresentation<Scalar>> affine;
  std::shared_ptr<const QuadraticCost<Scalar>> quadratic;
};

namespace detail {

inline std::vector<Index> offsets_of(const std::vector<Index>& dims) {
  std::vector<Index> off(dims.size() + 1, 0);
  std::partial_sum(dims.begin(), dims.end(), off.begin() + 1);
  return off;
}

template <typename Scalar>
struct CompiledQuadratic {
  struct Entry {
    Index column;
    Scalar coeff;
  };
  std::vector<Index> offset;
  std::vector<Matrix<Scalar>> own;                // Q_i + Q_i' + S_i' D S_i
  std::vector<Vector<Scalar>> linear;             // q_i - S_i' P
  std::vector<std::vector<Index>> touched;        // market rows with a nonzero in S_i
  std::vector<std::vector<Entry>> row_entries;    // nonzeros of S by market row
  std::shared_ptr<const QuadraticCost<Scalar>> data;

  Scalar market_quantity(Index r, const ConstVectorRef<Scalar>& x) const {
    Scalar s(0);
    for (const auto& e : row_entries[static_cast<std::size_t>(r)]) s += e.coeff * x(e.column);
    return s;
  }
};

}  // namespace detail

/// Builds the closed-form gradient, cost value and affine form of a quadratic cost.
template <typename Scalar>
CostModel<Scalar> make_quadratic_cost(const std::vector<Index>& dims, QuadraticCost<Scalar> data) {
  const auto N = dims.size();
  const Index p = data.price_intercept.size();
  require_dims(data.Q.size() == N && data.q.size() == N, "quadratic cost: per-agent data count");
  require_dims(data.price_slope.size() == p, "quadratic cost: price slope length");
  if (data.market.empty()) data.market.assign(N, Matrix<Scalar>::Zero(p, 0));
  require_dims(data.market.size() == N, "quadratic cost: market blocks count");
  for (std::size_t i = 0; i < N; ++i) {
    if (data.market[i].cols() == 0 && dims[i] != 0) data.market[i] = Matrix<Scalar>::Zero(p, dims[i]);
    require_dims(data.Q[i].rows() == dims[i] && data.Q[i].cols() == dims[i], "quadratic cost: Q_i shape");
    require_dims(data.q[i].size() == dims[i], "quadratic cost: q_i length");
    require_dims(data.market[i].rows() == p && data.market[i].cols() == dims[i], "quadratic cost: market block shape");
  }

  auto shared = std::make_shared<const QuadraticCost<Scalar>>(std::move(data));
  auto c = std::make_shared<detail::CompiledQuadratic<Scalar>>();
  const auto& d = *shared;
  c->data = shared;
  c->offset = detail::offsets_of(dims);
  c->row_entries.assign(static_cast<std::size_t>(p), {});
  for (std::size_t i = 0; i < N; ++i) {
    const auto& S = d.market[i];
    c->own.push_back(d.Q[i] + d.Q[i].transpose() + S.transpose() * d.price_slope.asDiagonal() * S);
    c->linear.push_back(d.q[i] - S.transpose() * d.price_intercept);
    std::vector<Index> rows;
    for (Index r = 0; r < p; ++r) {
      bool any = false;
      for (Index k = 0; k < S.cols(); ++k) {
        if (S(r, k) != Scalar(0)) {
          any = true;
          c->row_entries[static_cast<std::size_t>(r)].push_back({c->offset[i] + k, S(r, k)});
        }
      }
      if (any) rows.push_back(r);
    }
    c->touched.push_back(std::move(rows));
  }

  CostModel<Scalar> model;
  model.quadratic = shared;
  model.gradient = [c](Index i, const ConstVectorRef<Scalar>& x, VectorRef<Scalar> out) {
    const auto ii = static_cast<std::size_t>(i);
    const Index off = c->offset[ii];
    const Index ni = c->offset[ii + 1] - off;
    out.noalias() = c->own[ii].lazyProduct(x.segment(off, ni));
    out += c->linear[ii];
    const auto& S = c->data->market[ii];
    for (Index r : c->touched[ii]) {
      const Scalar w = c->data->price_slope(r) * c->market_quantity(r, x);
      out += w * S.row(r).transpose();
    }
  };
  model.value = [c](Index i, const ConstVectorRef<Scalar>& x) {
    const auto ii = static_cast<std::size_t>(i);
    const auto& dd = *c->data;
    const Index off = c->offset[ii];
    const Index ni = c->offset[ii + 1] - off;
    const auto xi = x.segment(off, ni);
    Scalar f = xi.dot(dd.Q[ii] * xi) + dd.q[ii].dot(xi);
    const Vector<Scalar> own_q = dd.market[ii] * xi;
    for (Index r = 0; r < dd.markets(); ++r) {
      const Scalar price = dd.price_intercept(r) - dd.price_slope(r) * c->market_quantity(r, x);
      f -= price * own_q(r);
    }
    return f;
  };

  const Index n = c->offset.back();
  AffineRepresentation<Scalar> aff{Matrix<Scalar>::Zero(n, n), Vector<Scalar>::Zero(n)};
  for (std::size_t i = 0; i < N; ++i) {
    const Index oi = c->offset[i];
    aff.u.segment(oi, dims[i]) = c->linear[i];
    aff.M.block(oi, oi, dims[i], dims[i]) += d.Q[i] + d.Q[i].transpose() + d.market[i].transpose() * d.price_slope.asDiagonal() * d.market[i];
    for (std::size_t j = 0; j < N; ++j) {
      aff.M.block(oi, c->offset[j], dims[i], dims[j]) +=
          d.market[i].transpose() * d.price_slope.asDiagonal() * d.market[j];
    }
  }
  model.affine = std::move(aff);
  return model;
}

/// Cost model for a game whose pseudo-gradient is the affine map M x + u.
template <typename Scalar>
CostModel<Scalar> make_affine_cost(const std::vector<Index>& dims, Matrix<Scalar> M, Vector<Scalar> u) {
  const auto off = detail::offsets_of(dims);
  require_dims(M.rows() == off.back() && M.cols() == off.back() && u.size() == off.back(), "affine cost shape");
  auto rep = std::make_shared<const AffineRepresentation<Scalar>>(AffineRepresentation<Scalar>{std::move(M), std::move(u)});
  CostModel<Scalar> model;
  model.gradient = [rep, off](Index i, const ConstVectorRef<Scalar>& x, VectorRef<Scalar> out) {
    const auto ii = static_cast<std::size_t>(i);
    const Index ni = off[ii + 1] - off[ii];
    out.noalias() = rep->M.middleRows(off[ii], ni) * x;
    out += rep->u.segment(off[ii], ni);
  };
  model.affine = *rep;
  return model;
}

/// The game triplet: local sets with coupling constraints, costs, and graph.
template <typename Scalar = double>
class GameInstance {
 public:
  GameInstance(std::vector<BoxSet<Scalar>> boxes, AffineCoupling<Scalar> coupling, CommGraph graph, CostModel<Scalar> cost)
      : boxes_(std::move(boxes)), coupling_(std::move(coupling)), graph_(std::move(graph)), cost_(std::move(cost)) {
    const auto N = boxes_.size();
    require_dims(N >= 1, "game needs at least one agent");
    require_dims(static_cast<Index>(N) == graph_.num_nodes(), "graph node count differs from agent count");
    require_dims(coupling_.blocks.size() == N && coupling_.shares.size() == N, "coupling block count differs from agent count");
    std::vector<Index> dims;
    for (std::size_t i = 0; i < N; ++i) {
      dims.push_back(boxes_[i].dim());
      require_dims(coupling_.blocks[i].rows() == coupling_.rows(), "coupling blocks disagree on row count");
      require_dims(coupling_.blocks[i].cols() == boxes_[i].dim(), "coupling block column count differs from n_i");
      require_dims(coupling_.shares[i].size() == coupling_.rows(), "coupling share length differs from m");
    }
    offset_ = detail::offsets_of(dims);
    if (!cost_.gradient) throw InvalidParameter("cost model has no gradient");
    if (cost_.affine) {
      require_dims(cost_.affine->M.rows() == total_dim() && cost_.affine->M.cols() == total_dim() && cost_.affine->u.size() == total_dim(),
                   "affine representation shape differs from n");
    }
  }

  Index num_agents() const { return static_cast<Index>(boxes_.size()); }
  Index dim(Index i) const { return boxes_[static_cast<std::size_t>(i)].dim(); }
  Index offset(Index i) const { return offset_[static_cast<std::size_t>(i)]; }
  Index total_dim() const { return offset_.back(); }
  Index num_constraints() const { return coupling_.rows(); }
  Index num_edges() const { return graph_.num_edges(); }

  std::vector<Index> dims() const {
    std::vector<Index> d;
    for (const auto& b : boxes_) d.push_back(b.dim());
    return d;
  }

  const BoxSet<Scalar>& box(Index i) const { return boxes_[static_cast<std::size_t>(i)]; }
  const std::vector<BoxSet<Scalar>>& boxes() const { return boxes_; }
  const AffineCoupling<Scalar>& coupling() const { return coupling_; }
  const Matrix<Scalar>& block(Index i) const { return coupling_.blocks[static_cast<std::size_t>(i)]; }
  const Vector<Scalar>& share(Index i) const { return coupling_.shares[static_cast<std::size_t>(i)]; }
  const CommGraph& graph() const { return graph_; }
  const CostModel<Scalar>& cost() const { return cost_; }

  /// Global coupling matrix A = [A_1 ... A_N].
  Matrix<Scalar> coupling_matrix() const {
    Matrix<Scalar> A(num_constraints(), total_dim());
    for (Index i = 0; i < num_agents(); ++i) A.middleCols(offset(i), dim(i)) = block(i);
    return A;
  }

  Vector<Scalar> coupling_bound() const { return coupling_.bound(); }

  Vector<Scalar> lower() const { return stacked([](const BoxSet<Scalar>& b) { return b.lower; }); }
  Vector<Scalar> upper() const { return stacked([](const BoxSet<Scalar>& b) { return b.upper; }); }

 private:
  template <typename F>
  Vector<Scalar> stacked(F&& f) const {
    Vector<Scalar> v(total_dim());
    for (Index i = 0; i < num_agents(); ++i) v.segment(offset(i), dim(i)) = f(box(i));
    return v;
  }

  std::vector<BoxSet<Scalar>> boxes_;
  AffineCoupling<Scalar> coupling_;
  CommGraph graph_;
  CostModel<Scalar> cost_;
  std::vector<Index> offset_;
};

/// Projection onto Omega = prod_i Omega_i.
template <typename Scalar, typename Derived>
Vector<Scalar> project_boxes(const GameInstance<Scalar>& game, const Eigen::MatrixBase<Derived>& v) {
  require_dims(v.size() == game.total_dim(), "project_boxes: dimension mismatch");
  Vector<Scalar> out(v.size());
  for (Index i = 0; i < game.num_agents(); ++i) {
    const Index o = game.offset(i);
    const Index n = game.dim(i);
    out.segment(o, n) = v.segment(o, n).cwiseMax(game.box(i).lower).cwiseMin(game.box(i).upper);
  }
  return out;
}

/// Stacked partial gradients col(grad_{x_i} f_i(x)).
template <typename Scalar>
Vector<Scalar> pseudo_gradient(const GameInstance<Scalar>& game, const ConstVectorRef<Scalar>& x) {
  require_dims(x.size() == game.total_dim(), "pseudo_gradient: x has wrong length");
  Vector<Scalar> F(game.total_dim());
  for (Index i = 0; i < game.num_agents(); ++i) {
    game.cost().gradient(i, x, F.segment(game.offset(i), game.dim(i)));
  }
  return F;
}

template <typename Scalar = double>
struct MonotonicityConstants {
  Scalar alpha;
  Scalar ell;
};

/// alpha = lambda_min(sym(M)), ell = ||M||_2. Throws NotStronglyMonotone when alpha <= 0.
template <typename Scalar>
MonotonicityConstants<Scalar> monotonicity_constants(const AffineRepresentation<Scalar>& rep) {
  require_dims(rep.M.rows() == rep.M.cols(), "affine map must be square");
  const Matrix<Scalar> sym = (rep.M + rep.M.transpose()) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(sym, Eigen::EigenvaluesOnly);
  const Scalar alpha = eig.eigenvalues().minCoeff();
  Eigen::JacobiSVD<Matrix<Scalar>> svd(rep.M);
  const Scalar ell = svd.singularValues().size() ? svd.singularValues()(0) : Scalar(0);
  if (!(alpha > Scalar(0))) {
    throw NotStronglyMonotone("pseudo-gradient is not strongly monotone (lambda_min of symmetric part = " + std::to_string(static_cast<double>(alpha)) + ")");
  }
  return {alpha, ell};
}

template <typename Scalar>
MonotonicityConstants<Scalar> monotonicity_constants(const CostModel<Scalar>& model) {
  if (!model.affine) throw InvalidParameter("cost model has no affine representation; supply alpha and ell");
  return monotonicity_constants(*model.affine);
}

}  // namespace gne
