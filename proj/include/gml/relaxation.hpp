// relaxation.hpp
//
// Proximal relaxation solver for two-point boundary value problems
// u' = f(u) on [0, t_f] with values pinned at both ends.
//
// Each outer iteration solves the relaxed equation
//
//     K u' - (K - 1) ũ' = f(u)
//
// discretized on a uniform grid, where ũ is the previous iterate:
//
//   1. the endpoint system, obtained by telescoping the node recursion from
//      node 0 to node N, is solved by Newton for the free components of u_0
//      and the unknown components of u_N;
//   2. a backward sweep recovers u_{N-1}, ..., u_0, each node by a small
//      implicit Newton solve warm-started at its right neighbour;
//   3. ũ <- u, until the relative sup-norm update drops below outer_tol.
//
// At a fixed point ũ = u the node recursion reduces to explicit Euler, so a
// converged result is the Euler discretization of the BVP on the same grid.

#ifndef GML_RELAXATION_HPP
#define GML_RELAXATION_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gml/errors.hpp"
#include "gml/newton.hpp"
#include "gml/types.hpp"

namespace gml {

template <typename Scalar>
class BvpProblem {
 public:
  BvpProblem(OdeSystem<Scalar> system, BoundaryConditions<Scalar> bc, Grid<Scalar> grid)
      : system_(std::move(system)), bc_(std::move(bc)), grid_(std::move(grid)) {
    if (!system_.rhs) throw InvalidInput("ode system has no right-hand side");
    if (system_.dimension != bc_.dimension) {
      throw InvalidInput("system dimension " + std::to_string(system_.dimension) +
                         " does not match boundary-condition dimension " +
                         std::to_string(bc_.dimension));
    }
    if (const auto check = validate_boundary_conditions(bc_); !check) {
      throw InvalidInput(check.message);
    }
    free_start_ = bc_.free_at_start();
    free_end_ = bc_.free_at_end();
  }

  const OdeSystem<Scalar>& system() const { return system_; }
  const BoundaryConditions<Scalar>& bc() const { return bc_; }
  const Grid<Scalar>& grid() const { return grid_; }
  Index dimension() const { return system_.dimension; }

  /// 1-based component indices free at t=0 / not pinned at t=t_final.
  const std::vector<Index>& free_at_start() const { return free_start_; }
  const std::vector<Index>& free_at_end() const { return free_end_; }

  /// f at node k, tagging evaluation failures with the node index.
  Vector<Scalar> rhs_at(const Vector<Scalar>& u, Index k) const {
    try {
      return system_(u, grid_.time(k));
    } catch (const RhsError& e) {
      throw e.at_node(static_cast<long>(k));
    }
  }

 private:
  OdeSystem<Scalar> system_;
  BoundaryConditions<Scalar> bc_;
  Grid<Scalar> grid_;
  std::vector<Index> free_start_;
  std::vector<Index> free_end_;
};

/// Unknowns of the endpoint system, each block in ascending component order.
template <typename Scalar>
struct EndpointUnknowns {
  Vector<Scalar> free_start_values;
  Vector<Scalar> unknown_end_values;

  Vector<Scalar> pack() const {
    Vector<Scalar> x(free_start_values.size() + unknown_end_values.size());
    x << free_start_values, unknown_end_values;
    return x;
  }

  static EndpointUnknowns unpack(const Vector<Scalar>& x, Index n_free_start) {
    EndpointUnknowns out;
    out.free_start_values = x.head(n_free_start);
    out.unknown_end_values = x.tail(x.size() - n_free_start);
    return out;
  }

  /// Reads the unknowns off the endpoints of a trajectory.
  static EndpointUnknowns from(const BvpProblem<Scalar>& problem, const Trajectory<Scalar>& u) {
    EndpointUnknowns out;
    const auto& fs = problem.free_at_start();
    const auto& fe = problem.free_at_end();
    const Index last = u.grid().n_nodes();
    out.free_start_values.resize(static_cast<Index>(fs.size()));
    out.unknown_end_values.resize(static_cast<Index>(fe.size()));
    for (std::size_t i = 0; i < fs.size(); ++i) out.free_start_values[i] = u(0, fs[i]);
    for (std::size_t i = 0; i < fe.size(); ++i) out.unknown_end_values[i] = u(last, fe[i]);
    return out;
  }
};

namespace detail {

template <typename Scalar>
void check_on_grid(const BvpProblem<Scalar>& problem, const Trajectory<Scalar>& u,
                   const char* what) {
  if (!(u.grid() == problem.grid()) || u.dimension() != problem.dimension()) {
    throw InvalidInput(std::string(what) + " is not defined on the problem grid");
  }
}

template <typename Scalar>
Vector<Scalar> assemble_start(const BvpProblem<Scalar>& problem, const Vector<Scalar>& free) {
  Vector<Scalar> u0(problem.dimension());
  for (const auto& [j, value] : problem.bc().fixed_at_start) u0[j - 1] = value;
  const auto& fs = problem.free_at_start();
  for (std::size_t i = 0; i < fs.size(); ++i) u0[fs[i] - 1] = free[static_cast<Index>(i)];
  return u0;
}

template <typename Scalar>
Vector<Scalar> assemble_end(const BvpProblem<Scalar>& problem, const Vector<Scalar>& unknown) {
  Vector<Scalar> uN(problem.dimension());
  for (const auto& [j, value] : problem.bc().fixed_at_end) uN[j - 1] = value;
  const auto& fe = problem.free_at_end();
  for (std::size_t i = 0; i < fe.size(); ++i) uN[fe[i] - 1] = unknown[static_cast<Index>(i)];
  return uN;
}

template <typename Scalar>
Scalar relative_update(const Trajectory<Scalar>& u, const Trajectory<Scalar>& tilde) {
  const auto& a = u.values();
  const auto& b = tilde.values();
  return ((a - b).cwiseAbs().array() / (Scalar(1) + a.cwiseAbs().array())).maxCoeff();
}

template <typename Scalar>
std::string format_vector(const Vector<Scalar>& v) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << static_cast<double>(v[i]);
  os << ')';
  return os.str();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Starting iterate

/// Starting trajectory: components pinned at both ends are interpolated
/// linearly, components pinned at one end are held constant at that value,
/// components free at t=0 are held at `free_start_defaults[j]` (0 if absent).
template <typename Scalar>
Trajectory<Scalar> initial_guess(const BvpProblem<Scalar>& problem,
                                 const std::map<Index, Scalar>& free_start_defaults = {}) {
  const auto& grid = problem.grid();
  const auto& bc = problem.bc();
  const Index n = problem.dimension();
  const Index last = grid.n_nodes();
  NodeMatrix<Scalar> values(grid.node_count(), n);
  for (Index j = 1; j <= n; ++j) {
    const bool at_start = bc.fixed_start(j);
    const bool at_end = bc.fixed_end(j);
    for (Index k = 0; k <= last; ++k) {
      Scalar v(0);
      if (at_start && at_end) {
        const Scalar a = bc.fixed_at_start.at(j);
        const Scalar b = bc.fixed_at_end.at(j);
        v = a + (b - a) * (Scalar(k) / Scalar(last));
      } else if (at_start) {
        v = bc.fixed_at_start.at(j);
      } else if (at_end) {
        v = bc.fixed_at_end.at(j);
      } else if (auto it = free_start_defaults.find(j); it != free_start_defaults.end()) {
        v = it->second;
      }
      values(k, j - 1) = v;
    }
  }
  return Trajectory<Scalar>(grid, std::move(values));
}

// ---------------------------------------------------------------------------
// Error terms

/// Accumulated error term (E_j)_k for all components at once:
///   sum_{m=1..k} m [f(u_{m-1}) - f(u_m)] d/K,
/// the closed form of E_k = E_{k-1} + k [f(u_{k-1}) - f(u_k)] d/K, E_0 = 0.
template <typename Scalar>
Vector<Scalar> error_terms(const Trajectory<Scalar>& u, Index k, const BvpProblem<Scalar>& problem,
                           const RelaxationParams<Scalar>& params) {
  detail::check_on_grid(problem, u, "trajectory");
  if (k < 1 || k > problem.grid().n_nodes()) {
    throw InvalidInput("error term node index must lie in 1..N");
  }
  const Scalar scale = problem.grid().step() / params.relax_k;
  Vector<Scalar> sum = Vector<Scalar>::Zero(problem.dimension());
  Vector<Scalar> f_prev = problem.rhs_at(u.node(0), 0);
  for (Index m = 1; m <= k; ++m) {
    Vector<Scalar> f_cur = problem.rhs_at(u.node(m), m);
    sum += Scalar(m) * (f_prev - f_cur);
    f_prev = std::move(f_cur);
  }
  return sum * scale;
}

/// (E_j)_k for one 1-based component j.
template <typename Scalar>
Scalar error_term(const Trajectory<Scalar>& u, Index j, Index k, const BvpProblem<Scalar>& problem,
                  const RelaxationParams<Scalar>& params) {
  if (j < 1 || j > problem.dimension()) throw InvalidInput("component index out of range");
  return error_terms(u, k, problem, params)[j - 1];
}

// ---------------------------------------------------------------------------
// Endpoint system

namespace detail {

template <typename Scalar>
Vector<Scalar> endpoint_residual_with(const Vector<Scalar>& u0, const Vector<Scalar>& uN,
                                      const BvpProblem<Scalar>& problem,
                                      const Trajectory<Scalar>& tilde,
                                      const RelaxationParams<Scalar>& params,
                                      const Vector<Scalar>& correction) {
  const Index last = problem.grid().n_nodes();
  const Scalar K = params.relax_k;
  const Scalar span = Scalar(last) * problem.grid().step();
  const Vector<Scalar> fN = problem.rhs_at(uN, last);
  return uN - u0 - fN * (span / K) - ((K - Scalar(1)) / K) * (tilde.node(last) - tilde.node(0)) -
         correction;
}

template <typename Scalar>
Vector<Scalar> endpoint_correction(const BvpProblem<Scalar>& problem,
                                   const Trajectory<Scalar>& tilde,
                                   const RelaxationParams<Scalar>& params) {
  if (params.endpoint_error_term == EndpointErrorTerm::dropped) {
    return Vector<Scalar>::Zero(problem.dimension());
  }
  return error_terms(tilde, problem.grid().n_nodes(), problem, params);
}

}  // namespace detail

/// Residual of the telescoped endpoint equations, one entry per component:
///   (u_j)_N - (u_j)_0 - f_j(u_N) N d/K - (K-1)/K ((ũ_j)_N - (ũ_j)_0) - (E_j)_N
/// where (E_j)_N is either taken from ũ (lagged) or omitted (dropped).
template <typename Scalar>
Vector<Scalar> endpoint_residual(const EndpointUnknowns<Scalar>& x,
                                 const BvpProblem<Scalar>& problem,
                                 const Trajectory<Scalar>& tilde,
                                 const RelaxationParams<Scalar>& params) {
  detail::check_on_grid(problem, tilde, "previous iterate");
  if (x.free_start_values.size() != static_cast<Index>(problem.free_at_start().size()) ||
      x.unknown_end_values.size() != static_cast<Index>(problem.free_at_end().size())) {
    throw InvalidInput("endpoint unknowns do not match the boundary conditions");
  }
  return detail::endpoint_residual_with(detail::assemble_start(problem, x.free_start_values),
                                        detail::assemble_end(problem, x.unknown_end_values),
                                        problem, tilde, params,
                                        detail::endpoint_correction(problem, tilde, params));
}

template <typename Scalar>
struct EndpointSolution {
  Vector<Scalar> start;
  Vector<Scalar> end;
  NewtonResult<Scalar> newton;
};

template <typename Scalar>
EndpointSolution<Scalar> solve_endpoint(const BvpProblem<Scalar>& problem,
                                        const Trajectory<Scalar>& tilde,
                                        const RelaxationParams<Scalar>& params,
                                        const EndpointUnknowns<Scalar>& guess) {
  params.validate();
  detail::check_on_grid(problem, tilde, "previous iterate");
  const Vector<Scalar> correction = detail::endpoint_correction(problem, tilde, params);
  const Index n_free = static_cast<Index>(problem.free_at_start().size());

  const VectorFunction<Scalar> F = [&](const Vector<Scalar>& packed) {
    const auto x = EndpointUnknowns<Scalar>::unpack(packed, n_free);
    return detail::endpoint_residual_with(detail::assemble_start(problem, x.free_start_values),
                                          detail::assemble_end(problem, x.unknown_end_values),
                                          problem, tilde, params, correction);
  };

  NewtonOptions<Scalar> opts;
  opts.tol = params.newton_tol;
  opts.max_iter = params.newton_max_iter;

  EndpointSolution<Scalar> out;
  out.newton = newton_solve(F, guess.pack(), opts);
  if (!out.newton.converged) {
    throw ConvergenceFailure("endpoint system did not converge after " +
                             std::to_string(out.newton.iterations) + " Newton iterations; residual " +
                             std::to_string(static_cast<double>(out.newton.final_residual_norm)) +
                             " at unknowns " + detail::format_vector(out.newton.solution));
  }
  const auto x = EndpointUnknowns<Scalar>::unpack(out.newton.solution, n_free);
  out.start = detail::assemble_start(problem, x.free_start_values);
  out.end = detail::assemble_end(problem, x.unknown_end_values);
  return out;
}

// ---------------------------------------------------------------------------
// Backward sweep

/// Residual of one relaxed step between nodes prev = k-1 and next = k:
///   u_next - u_prev - f(u_prev) d/K - (K-1)/K (ũ_next - ũ_prev).
/// f is evaluated at the earlier node, so solving for u_prev is implicit.
template <typename Scalar>
Vector<Scalar> backward_step_residual(const Vector<Scalar>& u_prev, const Vector<Scalar>& u_next,
                                      const Vector<Scalar>& tilde_prev,
                                      const Vector<Scalar>& tilde_next,
                                      const BvpProblem<Scalar>& problem,
                                      const RelaxationParams<Scalar>& params, Index prev_node = 0) {
  const Scalar K = params.relax_k;
  const Scalar d = problem.grid().step();
  return u_next - u_prev - problem.rhs_at(u_prev, prev_node) * (d / K) -
         ((K - Scalar(1)) / K) * (tilde_next - tilde_prev);
}

template <typename Scalar>
struct SweepResult {
  /// Swept trajectory with node 0's pinned components reset to their
  /// boundary values.
  Trajectory<Scalar> trajectory;
  /// Node 0 exactly as the sweep produced it, before the reset.
  Vector<Scalar> swept_start;

  /// The sweep output with the untouched node 0; this is the trajectory that
  /// satisfies the step recursion for every step.
  Trajectory<Scalar> raw() const {
    Trajectory<Scalar> out = trajectory;
    out.set_node(0, swept_start);
    return out;
  }
};

/// Recovers u_{N-1}, ..., u_0 from u_N, one implicit Newton solve per node,
/// each warm-started at its right neighbour.
template <typename Scalar>
SweepResult<Scalar> backward_sweep(const Vector<Scalar>& uN, const Trajectory<Scalar>& tilde,
                                   const BvpProblem<Scalar>& problem,
                                   const RelaxationParams<Scalar>& params) {
  detail::check_on_grid(problem, tilde, "previous iterate");
  if (uN.size() != problem.dimension() || !uN.allFinite()) {
    throw InvalidInput("terminal state must be finite with the problem dimension");
  }
  const Index n = problem.dimension();
  const Index last = problem.grid().n_nodes();
  const Scalar K = params.relax_k;
  const Scalar d_over_k = problem.grid().step() / K;
  const Scalar carry = (K - Scalar(1)) / K;
  const auto& system = problem.system();

  NewtonOptions<Scalar> opts;
  opts.tol = params.newton_tol;
  opts.max_iter = params.newton_max_iter;

  Trajectory<Scalar> u(problem.grid(), n);
  u.set_node(last, uN);
  Vector<Scalar> next = uN;
  Vector<Scalar> tilde_next = tilde.node(last);

  for (Index k = last; k >= 1; --k) {
    const Index prev = k - 1;
    const Vector<Scalar> tilde_prev = tilde.node(prev);
    // constant part of the residual: u_next - (K-1)/K (ũ_next - ũ_prev)
    const Vector<Scalar> target = next - carry * (tilde_next - tilde_prev);
    const VectorFunction<Scalar> F = [&](const Vector<Scalar>& v) -> Vector<Scalar> {
      return target - v - problem.rhs_at(v, prev) * d_over_k;
    };
    MatrixFunction<Scalar> J;
    if (system.has_jacobian()) {
      J = [&](const Vector<Scalar>& v) -> Matrix<Scalar> {
        return -Matrix<Scalar>::Identity(n, n) - system.jacobian(v, problem.grid().time(prev)) * d_over_k;
      };
    }

    NewtonResult<Scalar> step;
    try {
      step = newton_solve(F, next, opts, J);
    } catch (const SingularMatrix& e) {
      throw SingularMatrix(std::string(e.what()) + " in sweep step at node " + std::to_string(prev));
    }
    if (!step.converged) {
      throw ConvergenceFailure("sweep Newton failed at node " + std::to_string(prev) +
                               " after " + std::to_string(step.iterations) +
                               " iterations; residual " +
                               std::to_string(static_cast<double>(step.final_residual_norm)));
    }
    u.set_node(prev, step.solution);
    next = step.solution;
    tilde_next = tilde_prev;
  }

  SweepResult<Scalar> out{u, u.node(0)};
  Vector<Scalar> start = out.swept_start;
  for (const auto& [j, value] : problem.bc().fixed_at_start) start[j - 1] = value;
  out.trajectory.set_node(0, start);
  return out;
}

// ---------------------------------------------------------------------------
// Diagnostics

/// max over k, j of |(u_j)_k - (u_j)_{k-1} - f_j(u_{k-1}) d|. Zero exactly
/// when u is an explicit-Euler trajectory.
template <typename Scalar>
Scalar euler_residual_norm(const Trajectory<Scalar>& u, const BvpProblem<Scalar>& problem) {
  detail::check_on_grid(problem, u, "trajectory");
  const Scalar d = problem.grid().step();
  Scalar worst(0);
  Vector<Scalar> prev = u.node(0);
  for (Index k = 1; k <= problem.grid().n_nodes(); ++k) {
    Vector<Scalar> cur = u.node(k);
    const Vector<Scalar> defect = cur - prev - problem.rhs_at(prev, k - 1) * d;
    worst = std::max(worst, defect.cwiseAbs().maxCoeff());
    prev = std::move(cur);
  }
  return worst;
}

/// Largest violation over all j, k of the telescoped relation
///   (u_j)_k = (u_j)_0 + f_j(u_k) k d/K + (K-1)/K ((ũ_j)_k - (ũ_j)_0) + (E_j)_k.
/// Round-off sized whenever u satisfies the step recursion against ũ.
template <typename Scalar>
Scalar telescoping_identity_check(const Trajectory<Scalar>& u, const Trajectory<Scalar>& tilde,
                                  const BvpProblem<Scalar>& problem,
                                  const RelaxationParams<Scalar>& params) {
  detail::check_on_grid(problem, u, "trajectory");
  detail::check_on_grid(problem, tilde, "previous iterate");
  const Scalar K = params.relax_k;
  const Scalar d_over_k = problem.grid().step() / K;
  const Scalar carry = (K - Scalar(1)) / K;
  const Vector<Scalar> u0 = u.node(0);
  const Vector<Scalar> tilde0 = tilde.node(0);

  Scalar worst(0);
  Vector<Scalar> error = Vector<Scalar>::Zero(problem.dimension());
  Vector<Scalar> f_prev = problem.rhs_at(u0, 0);
  for (Index k = 1; k <= problem.grid().n_nodes(); ++k) {
    const Vector<Scalar> uk = u.node(k);
    const Vector<Scalar> fk = problem.rhs_at(uk, k);
    error += Scalar(k) * (f_prev - fk) * d_over_k;
    const Vector<Scalar> violation =
        uk - u0 - fk * (Scalar(k) * d_over_k) - carry * (tilde.node(k) - tilde0) - error;
    worst = std::max(worst, violation.cwiseAbs().maxCoeff());
    f_prev = fk;
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Outer iteration

template <typename Scalar>
struct OuterIterate {
  int iteration = 0;
  const Trajectory<Scalar>& tilde;
  const SweepResult<Scalar>& sweep;
  const EndpointSolution<Scalar>& endpoint;
  Scalar update_norm;
};

template <typename Scalar>
using OuterObserver = std::function<void(const OuterIterate<Scalar>&)>;

template <typename Scalar>
struct Solution {
  Trajectory<Scalar> trajectory;
  SolveReport<Scalar> report;
};

/// Runs endpoint solve + backward sweep + ũ <- u until the relative update
/// max |u - ũ| / (1 + |u|) is at most outer_tol. A Newton failure inside an
/// iteration stops the loop and returns the last complete iterate with
/// converged = false; rhs and singular-matrix errors propagate. Throws
/// Divergence when the update norm exceeds params.divergence_limit.
template <typename Scalar>
Solution<Scalar> outer_iterate(const BvpProblem<Scalar>& problem,
                               const RelaxationParams<Scalar>& params,
                               const Trajectory<Scalar>& guess,
                               const OuterObserver<Scalar>& observer = {}) {
  params.validate();
  detail::check_on_grid(problem, guess, "initial guess");

  SolveReport<Scalar> report;
  Trajectory<Scalar> tilde = guess;

  for (int iter = 1; iter <= params.max_outer_iter; ++iter) {
    EndpointSolution<Scalar> endpoint;
    SweepResult<Scalar> sweep{tilde, tilde.node(0)};
    try {
      endpoint = solve_endpoint(problem, tilde, params, EndpointUnknowns<Scalar>::from(problem, tilde));
      sweep = backward_sweep(endpoint.end, tilde, problem, params);
    } catch (const ConvergenceFailure& e) {
      ++report.newton_failures;
      report.failure = "outer iteration " + std::to_string(iter) + ": " + e.what();
      break;
    }

    const Scalar update = detail::relative_update(sweep.trajectory, tilde);
    report.outer_iterations = iter;
    report.residual_history.push_back(update);
    report.discrepancy_history.push_back((sweep.swept_start - endpoint.start).cwiseAbs().maxCoeff());

    if (observer) observer(OuterIterate<Scalar>{iter, tilde, sweep, endpoint, update});

    if (!(update <= params.divergence_limit)) {
      throw Divergence("outer iteration " + std::to_string(iter) + " diverged: update norm " +
                       std::to_string(static_cast<double>(update)));
    }
    tilde = std::move(sweep.trajectory);
    if (update <= params.outer_tol) {
      report.converged = true;
      break;
    }
  }

  report.final_euler_residual = euler_residual_norm(tilde, problem);
  return {std::move(tilde), std::move(report)};
}

/// initial_guess followed by outer_iterate.
template <typename Scalar>
Solution<Scalar> solve(const BvpProblem<Scalar>& problem, const RelaxationParams<Scalar>& params,
                       const std::map<Index, Scalar>& free_start_defaults = {},
                       const OuterObserver<Scalar>& observer = {}) {
  return outer_iterate(problem, params, initial_guess(problem, free_start_defaults), observer);
}

}  // namespace gml

#endif  // GML_RELAXATION_HPP
