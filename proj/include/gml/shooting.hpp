// shooting.hpp
//
// Single shooting for the same boundary value problems the relaxation solver
// handles: integrate forward from a guessed start state, then root-find on
// the mismatch at t_final. Explicit Euler on the solver's own grid gives an
// independent route to the discrete solution the relaxation scheme converges
// to; RK4 is the higher-order reference.

#ifndef GML_SHOOTING_HPP
#define GML_SHOOTING_HPP

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "gml/errors.hpp"
#include "gml/newton.hpp"
#include "gml/relaxation.hpp"
#include "gml/types.hpp"

namespace gml {

enum class Integrator { euler, rk4 };

inline const char* to_string(Integrator integrator) {
  return integrator == Integrator::euler ? "euler" : "rk4";
}

template <typename Scalar>
struct ShootingConfig {
  Integrator integrator = Integrator::euler;
  Scalar root_tol = Scalar(1e-10);
  int max_root_iter = 200;
  /// One vector: Newton start. Two vectors with a single free component:
  /// bisection bracket. Each vector runs over the free-at-start components.
  std::vector<Vector<Scalar>> guesses;

  void validate() const {
    if (!(root_tol > Scalar(0))) throw InvalidInput("root_tol must be > 0");
    if (max_root_iter < 1) throw InvalidInput("max_root_iter must be positive");
    if (guesses.empty() || guesses.size() > 2) {
      throw InvalidInput("shooting needs one or two initial guesses");
    }
  }
};

template <typename Scalar>
Trajectory<Scalar> euler_integrate(const OdeSystem<Scalar>& system, const Vector<Scalar>& u0,
                                   const Grid<Scalar>& grid) {
  if (u0.size() != system.dimension || !u0.allFinite()) {
    throw InvalidInput("start state must be finite with the system dimension");
  }
  const Scalar d = grid.step();
  NodeMatrix<Scalar> values(grid.node_count(), system.dimension);
  Vector<Scalar> u = u0;
  values.row(0) = u.transpose();
  for (Index k = 1; k <= grid.n_nodes(); ++k) {
    try {
      u += system(u, grid.time(k - 1)) * d;
    } catch (const RhsError& e) {
      throw e.at_node(static_cast<long>(k - 1));
    }
    values.row(k) = u.transpose();
  }
  return Trajectory<Scalar>(grid, std::move(values));
}

template <typename Scalar>
Trajectory<Scalar> rk4_integrate(const OdeSystem<Scalar>& system, const Vector<Scalar>& u0,
                                 const Grid<Scalar>& grid) {
  if (u0.size() != system.dimension || !u0.allFinite()) {
    throw InvalidInput("start state must be finite with the system dimension");
  }
  const Scalar d = grid.step();
  const Scalar half = d / Scalar(2);
  NodeMatrix<Scalar> values(grid.node_count(), system.dimension);
  Vector<Scalar> u = u0;
  values.row(0) = u.transpose();
  for (Index k = 1; k <= grid.n_nodes(); ++k) {
    const Scalar t = grid.time(k - 1);
    try {
      const Vector<Scalar> k1 = system(u, t);
      const Vector<Scalar> k2 = system(u + half * k1, t + half);
      const Vector<Scalar> k3 = system(u + half * k2, t + half);
      const Vector<Scalar> k4 = system(u + d * k3, t + d);
      u += (d / Scalar(6)) * (k1 + Scalar(2) * k2 + Scalar(2) * k3 + k4);
    } catch (const RhsError& e) {
      throw e.at_node(static_cast<long>(k - 1));
    }
    if (!u.allFinite()) throw RhsError("rk4 step produced a non-finite state", static_cast<long>(k));
    values.row(k) = u.transpose();
  }
  return Trajectory<Scalar>(grid, std::move(values));
}

template <typename Scalar>
Trajectory<Scalar> integrate(Integrator integrator, const OdeSystem<Scalar>& system,
                             const Vector<Scalar>& u0, const Grid<Scalar>& grid) {
  return integrator == Integrator::euler ? euler_integrate(system, u0, grid)
                                         : rk4_integrate(system, u0, grid);
}

/// Computed minus prescribed value for each pinned-at-end component,
/// ascending component order.
template <typename Scalar>
Vector<Scalar> terminal_mismatch(const Vector<Scalar>& free_start, const BvpProblem<Scalar>& problem,
                                 const ShootingConfig<Scalar>& config) {
  if (free_start.size() != static_cast<Index>(problem.free_at_start().size())) {
    throw InvalidInput("free start vector does not match the free-at-start components");
  }
  const auto path = integrate(config.integrator, problem.system(),
                              detail::assemble_start(problem, free_start), problem.grid());
  const Index last = problem.grid().n_nodes();
  Vector<Scalar> out(static_cast<Index>(problem.bc().fixed_at_end.size()));
  Index i = 0;
  for (const auto& [j, value] : problem.bc().fixed_at_end) out[i++] = path(last, j) - value;
  return out;
}

template <typename Scalar>
struct ShootingResult {
  Trajectory<Scalar> trajectory;
  Vector<Scalar> free_start;
  int iterations = 0;
  Scalar mismatch_norm = Scalar(0);
  bool converged = false;
  std::string method;  // "bisection", "newton" or "none"
};

/// Finds the free start components so the terminal mismatch vanishes.
/// Bisection when there is one free component and two guesses bracketing a
/// sign change; damped Newton with a difference Jacobian otherwise.
template <typename Scalar>
ShootingResult<Scalar> solve_shooting(const BvpProblem<Scalar>& problem,
                                      const ShootingConfig<Scalar>& config) {
  config.validate();
  const Index n_free = static_cast<Index>(problem.free_at_start().size());
  for (const auto& g : config.guesses) {
    if (g.size() != n_free) {
      throw InvalidInput("shooting guess has " + std::to_string(g.size()) + " entries, expected " +
                         std::to_string(n_free));
    }
  }
  const auto mismatch = [&](const Vector<Scalar>& s) { return terminal_mismatch(s, problem, config); };
  const auto finish = [&](Vector<Scalar> s, int iterations, bool converged, std::string method) {
    auto path = integrate(config.integrator, problem.system(), detail::assemble_start(problem, s),
                          problem.grid());
    const Vector<Scalar> m = mismatch(s);
    return ShootingResult<Scalar>{std::move(path), std::move(s), iterations,
                                  m.size() ? m.cwiseAbs().maxCoeff() : Scalar(0), converged,
                                  std::move(method)};
  };

  if (n_free == 0) {
    return finish(Vector<Scalar>(0), 0, true, "none");
  }

  if (n_free == 1 && config.guesses.size() == 2) {
    Scalar lo = config.guesses[0][0];
    Scalar hi = config.guesses[1][0];
    Vector<Scalar> s(1);
    s[0] = lo;
    Scalar m_lo = mismatch(s)[0];
    s[0] = hi;
    const Scalar m_hi = mismatch(s)[0];
    if (std::abs(m_lo) <= config.root_tol) return finish(config.guesses[0], 0, true, "bisection");
    if (std::abs(m_hi) <= config.root_tol) return finish(config.guesses[1], 0, true, "bisection");
    if ((m_lo > Scalar(0)) == (m_hi > Scalar(0))) {
      throw ConvergenceFailure("no sign change in shooting bracket [" +
                               std::to_string(static_cast<double>(lo)) + ", " +
                               std::to_string(static_cast<double>(hi)) + "]: mismatches " +
                               std::to_string(static_cast<double>(m_lo)) + " and " +
                               std::to_string(static_cast<double>(m_hi)));
    }
    int iter = 0;
    bool converged = false;
    Scalar mid = lo;
    while (iter < config.max_root_iter) {
      ++iter;
      mid = lo + (hi - lo) / Scalar(2);
      s[0] = mid;
      const Scalar m_mid = mismatch(s)[0];
      if (std::abs(m_mid) <= config.root_tol) {
        converged = true;
        break;
      }
      if ((m_mid > Scalar(0)) == (m_lo > Scalar(0))) {
        lo = mid;
        m_lo = m_mid;
      } else {
        hi = mid;
      }
      if (std::abs(hi - lo) <= config.root_tol) {
        mid = lo + (hi - lo) / Scalar(2);
        converged = true;
        break;
      }
    }
    s[0] = mid;
    return finish(s, iter, converged, "bisection");
  }

  NewtonOptions<Scalar> opts;
  opts.tol = config.root_tol;
  opts.max_iter = config.max_root_iter;
  const VectorFunction<Scalar> F = mismatch;
  const auto root = newton_solve(F, config.guesses.front(), opts);
  return finish(root.solution, root.iterations, root.converged, "newton");
}

}  // namespace gml

#endif  // GML_SHOOTING_HPP
