// systems.hpp
//
// Small closed-form ODE systems used for verification and by the CLI's
// system registry.

#ifndef GML_SYSTEMS_HPP
#define GML_SYSTEMS_HPP

#include "gml/types.hpp"

namespace gml::systems {

/// u' = 0 in any dimension.
template <typename Scalar>
OdeSystem<Scalar> zero(Index dimension) {
  if (dimension < 1) throw InvalidInput("dimension must be positive");
  OdeSystem<Scalar> sys;
  sys.dimension = dimension;
  sys.rhs = [dimension](const Vector<Scalar>&, Scalar) { return Vector<Scalar>::Zero(dimension).eval(); };
  sys.jacobian = [dimension](const Vector<Scalar>&, Scalar) {
    return Matrix<Scalar>::Zero(dimension, dimension).eval();
  };
  return sys;
}

/// Scalar u' = rate * u + offset.
template <typename Scalar>
OdeSystem<Scalar> scalar_linear(Scalar rate, Scalar offset) {
  OdeSystem<Scalar> sys;
  sys.dimension = 1;
  sys.rhs = [rate, offset](const Vector<Scalar>& u, Scalar) {
    Vector<Scalar> f(1);
    f[0] = rate * u[0] + offset;
    return f;
  };
  sys.jacobian = [rate](const Vector<Scalar>&, Scalar) {
    Matrix<Scalar> J(1, 1);
    J(0, 0) = rate;
    return J;
  };
  return sys;
}

/// u1' = omega u2, u2' = -omega u1.
template <typename Scalar>
OdeSystem<Scalar> harmonic_oscillator(Scalar omega = Scalar(1)) {
  OdeSystem<Scalar> sys;
  sys.dimension = 2;
  sys.rhs = [omega](const Vector<Scalar>& u, Scalar) {
    Vector<Scalar> f(2);
    f << omega * u[1], -omega * u[0];
    return f;
  };
  sys.jacobian = [omega](const Vector<Scalar>&, Scalar) {
    Matrix<Scalar> J(2, 2);
    J << Scalar(0), omega, -omega, Scalar(0);
    return J;
  };
  return sys;
}

}  // namespace gml::systems

#endif  // GML_SYSTEMS_HPP
