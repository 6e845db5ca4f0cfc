// newton.hpp
//
// Dense Newton iteration for small nonlinear systems: forward-difference
// Jacobian, partial-pivoting LU solve, residual-monotone step halving.

#ifndef GML_NEWTON_HPP
#define GML_NEWTON_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "gml/errors.hpp"
#include "gml/types.hpp"

namespace gml {

template <typename Scalar>
struct NewtonOptions {
  Scalar tol = Scalar(1e-10);  // on max|F(x)|
  int max_iter = 50;
  Scalar fd_step_relative = std::sqrt(std::numeric_limits<Scalar>::epsilon());
  int max_damping_halvings = 30;  // 0 disables damping

  void validate() const {
    if (!(tol > Scalar(0))) throw InvalidInput("newton tol must be > 0");
    if (max_iter < 1) throw InvalidInput("newton max_iter must be positive");
    if (!(fd_step_relative > Scalar(0) && fd_step_relative < Scalar(1))) {
      throw InvalidInput("fd_step_relative must lie in (0, 1)");
    }
    if (max_damping_halvings < 0) throw InvalidInput("max_damping_halvings must be >= 0");
  }
};

template <typename Scalar>
struct NewtonResult {
  Vector<Scalar> solution;
  int iterations = 0;
  Scalar final_residual_norm = Scalar(0);
  bool converged = false;
};

template <typename Scalar>
using VectorFunction = std::function<Vector<Scalar>(const Vector<Scalar>&)>;

template <typename Scalar>
using MatrixFunction = std::function<Matrix<Scalar>(const Vector<Scalar>&)>;

namespace detail {

template <typename Scalar>
void check_values(const Vector<Scalar>& y, Index expected, Index perturbed = -1) {
  if (y.size() != expected) {
    throw RhsError("function returned " + std::to_string(y.size()) + " components, expected " +
                   std::to_string(expected));
  }
  for (Index i = 0; i < y.size(); ++i) {
    if (!std::isfinite(static_cast<double>(y[i]))) {
      std::string msg = "non-finite function value in component " + std::to_string(i + 1);
      if (perturbed >= 0) msg += " while perturbing variable " + std::to_string(perturbed + 1);
      throw RhsError(msg);
    }
  }
}

template <typename Scalar>
Vector<Scalar> checked_eval(const VectorFunction<Scalar>& f, const Vector<Scalar>& x,
                            Index expected, Index perturbed = -1) {
  Vector<Scalar> y = f(x);
  check_values(y, expected, perturbed);
  return y;
}

template <typename Scalar>
Scalar max_norm(const Vector<Scalar>& v) {
  return v.size() == 0 ? Scalar(0) : v.cwiseAbs().maxCoeff();
}

}  // namespace detail

/// Forward-difference Jacobian with h_i = rel * max(1, |x_i|). `fx` must be
/// F(x); passing it avoids one evaluation.
template <typename Scalar>
Matrix<Scalar> fd_jacobian(const VectorFunction<Scalar>& F, const Vector<Scalar>& x,
                           const Vector<Scalar>& fx,
                           Scalar fd_step_relative = std::sqrt(std::numeric_limits<Scalar>::epsilon())) {
  const Index m = fx.size();
  const Index n = x.size();
  Matrix<Scalar> J(m, n);
  Vector<Scalar> xp = x;
  for (Index i = 0; i < n; ++i) {
    const Scalar h = fd_step_relative * std::max(Scalar(1), std::abs(x[i]));
    xp[i] = x[i] + h;
    // use the representable step actually taken
    const Scalar taken = xp[i] - x[i];
    J.col(i) = (detail::checked_eval(F, xp, m, i) - fx) / taken;
    xp[i] = x[i];
  }
  return J;
}

template <typename Scalar>
Matrix<Scalar> fd_jacobian(const VectorFunction<Scalar>& F, const Vector<Scalar>& x,
                           Scalar fd_step_relative = std::sqrt(std::numeric_limits<Scalar>::epsilon())) {
  const Vector<Scalar> fx = F(x);
  detail::check_values(fx, fx.size());
  return fd_jacobian(F, x, fx, fd_step_relative);
}

/// Solves A x = b by LU with partial pivoting. Throws SingularMatrix when a
/// pivot magnitude falls below 1e-14 * |A|_inf.
template <typename Derived, typename RhsDerived>
Vector<typename Derived::Scalar> lu_solve(const Eigen::MatrixBase<Derived>& A,
                                          const Eigen::MatrixBase<RhsDerived>& b) {
  using Scalar = typename Derived::Scalar;
  if (A.rows() != A.cols()) {
    throw InvalidInput("lu_solve needs a square matrix");
  }
  if (A.rows() != b.size()) {
    throw InvalidInput("lu_solve dimension mismatch");
  }
  if (!A.allFinite() || !b.allFinite()) {
    throw InvalidInput("lu_solve input contains non-finite entries");
  }
  if (A.rows() == 0) return Vector<Scalar>(0);

  const Scalar norm_inf = A.cwiseAbs().rowwise().sum().maxCoeff();
  const Eigen::PartialPivLU<Matrix<Scalar>> lu(A);
  const Scalar threshold = Scalar(1e-14) * norm_inf;
  const auto pivots = lu.matrixLU().diagonal().cwiseAbs();
  for (Index i = 0; i < pivots.size(); ++i) {
    if (!(pivots[i] > threshold)) {
      throw SingularMatrix("singular matrix: pivot " + std::to_string(i + 1) + " has magnitude " +
                           std::to_string(static_cast<double>(pivots[i])));
    }
  }
  return lu.solve(b);
}

/// Newton's method on F(x) = 0. Stops when max|F| <= tol or after max_iter
/// linearizations. Non-convergence comes back as converged=false; a singular
/// Jacobian throws SingularMatrix. `jacobian` may be empty, in which case
/// forward differences are used.
template <typename Scalar>
NewtonResult<Scalar> newton_solve(const VectorFunction<Scalar>& F, const Vector<Scalar>& x0,
                                  const NewtonOptions<Scalar>& opts = {},
                                  const MatrixFunction<Scalar>& jacobian = {}) {
  opts.validate();
  if (!x0.allFinite()) throw InvalidInput("newton_solve: non-finite starting point");

  NewtonResult<Scalar> result;
  Vector<Scalar> x = x0;
  Vector<Scalar> fx = F(x);
  const Index m = fx.size();
  detail::check_values(fx, m);
  Scalar norm = detail::max_norm(fx);

  int iter = 0;
  while (norm > opts.tol && iter < opts.max_iter) {
    const Matrix<Scalar> J = jacobian ? jacobian(x) : fd_jacobian(F, x, fx, opts.fd_step_relative);
    const Vector<Scalar> dx = lu_solve(J, -fx);
    ++iter;

    Scalar lambda(1);
    Vector<Scalar> trial;
    Vector<Scalar> ftrial;
    Scalar trial_norm = std::numeric_limits<Scalar>::infinity();
    for (int halving = 0;; ++halving) {
      trial = x + lambda * dx;
      bool evaluated = true;
      try {
        ftrial = detail::checked_eval(F, trial, m);
        trial_norm = detail::max_norm(ftrial);
      } catch (const RhsError&) {
        if (halving >= opts.max_damping_halvings) throw;
        evaluated = false;
      }
      if (evaluated && (trial_norm <= norm || halving >= opts.max_damping_halvings)) break;
      lambda /= Scalar(2);
    }
    x = std::move(trial);
    fx = std::move(ftrial);
    norm = trial_norm;
  }

  result.solution = std::move(x);
  result.iterations = iter;
  result.final_residual_norm = norm;
  result.converged = norm <= opts.tol;
  return result;
}

}  // namespace gml

#endif  // GML_NEWTON_HPP
