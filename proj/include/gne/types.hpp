#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <type_traits>

namespace gne {

using Index = Eigen::Index;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using ConstVectorRef = Eigen::Ref<const Vector<std::type_identity_t<Scalar>>>;

template <typename Scalar>
using VectorRef = Eigen::Ref<Vector<std::type_identity_t<Scalar>>>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// F fails strong monotonicity: the smallest eigenvalue of sym(M) is <= 0.
class NotStronglyMonotone : public Error {
 public:
  using Error::Error;
};

/// theta <= 1/(2 chi); the preconditioner would not dominate theta*I.
class ThetaTooSmall : public Error {
 public:
  using Error::Error;
};

class Infeasible : public Error {
 public:
  using Error::Error;
};

class DisconnectedGraph : public Error {
 public:
  using Error::Error;
};

class InfeasibleDegree : public Error {
 public:
  using Error::Error;
};

inline void require_dims(bool ok, const std::string& what) {
  if (!ok) throw DimensionMismatch(what);
}

}  // namespace gne
