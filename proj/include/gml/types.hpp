// types.hpp
//
// Problem-definition and solution types shared by the relaxation solver,
// the shooting oracle and the command-line tool. All dense storage is Eigen,
// templated on the scalar type; `double` aliases live at the bottom.

#ifndef GML_TYPES_HPP
#define GML_TYPES_HPP

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gml/errors.hpp"

namespace gml {

using Index = Eigen::Index;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// One state vector per row, rows indexed by node.
template <typename Scalar>
using NodeMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// ---------------------------------------------------------------------------
// Grid

/// Uniform grid on [0, t_final] with n_nodes intervals (n_nodes + 1 nodes).
/// The step is always derived, never stored.
template <typename Scalar>
class Grid {
 public:
  Grid(Index n_nodes, Scalar t_final) : n_nodes_(n_nodes), t_final_(t_final) {
    if (n_nodes < 2) {
      throw InvalidInput("grid needs n_nodes >= 2, got " + std::to_string(n_nodes));
    }
    if (!(t_final > Scalar(0)) || !std::isfinite(static_cast<double>(t_final))) {
      throw InvalidInput("grid needs a finite t_final > 0");
    }
  }

  Index n_nodes() const { return n_nodes_; }
  Index node_count() const { return n_nodes_ + 1; }
  Scalar t_final() const { return t_final_; }
  Scalar step() const { return t_final_ / Scalar(n_nodes_); }
  Scalar time(Index k) const { return Scalar(k) * step(); }

  bool operator==(const Grid& other) const {
    return n_nodes_ == other.n_nodes_ && t_final_ == other.t_final_;
  }

 private:
  Index n_nodes_;
  Scalar t_final_;
};

template <typename Scalar>
Grid<Scalar> make_grid(Index n_nodes, Scalar t_final) {
  return Grid<Scalar>(n_nodes, t_final);
}

// ---------------------------------------------------------------------------
// Boundary conditions
//
// Component indices are 1-based, matching u_1..u_n in configs and reports.

template <typename Scalar>
struct BoundaryConditions {
  Index dimension = 0;
  std::map<Index, Scalar> fixed_at_start;
  std::map<Index, Scalar> fixed_at_end;

  bool fixed_start(Index j) const { return fixed_at_start.count(j) != 0; }
  bool fixed_end(Index j) const { return fixed_at_end.count(j) != 0; }

  /// Components whose t=0 value is an unknown, ascending.
  std::vector<Index> free_at_start() const {
    std::vector<Index> out;
    for (Index j = 1; j <= dimension; ++j) {
      if (!fixed_start(j)) out.push_back(j);
    }
    return out;
  }

  /// Components whose t=t_final value is an unknown, ascending.
  std::vector<Index> free_at_end() const {
    std::vector<Index> out;
    for (Index j = 1; j <= dimension; ++j) {
      if (!fixed_end(j)) out.push_back(j);
    }
    return out;
  }
};

enum class BcStatus { ok, bad_dimension, index_out_of_range, under_determined, over_determined };

struct BcValidation {
  BcStatus status = BcStatus::ok;
  std::string message;

  bool ok() const { return status == BcStatus::ok; }
  explicit operator bool() const { return ok(); }
};

template <typename Scalar>
BcValidation validate_boundary_conditions(const BoundaryConditions<Scalar>& bc) {
  if (bc.dimension < 1) {
    return {BcStatus::bad_dimension, "dimension must be positive"};
  }
  for (const auto* side : {&bc.fixed_at_start, &bc.fixed_at_end}) {
    for (const auto& [j, value] : *side) {
      if (j < 1 || j > bc.dimension) {
        return {BcStatus::index_out_of_range,
                "component index " + std::to_string(j) + " outside 1.." +
                    std::to_string(bc.dimension)};
      }
      if (!std::isfinite(static_cast<double>(value))) {
        return {BcStatus::index_out_of_range,
                "boundary value for component " + std::to_string(j) + " is not finite"};
      }
    }
  }
  const auto count = static_cast<Index>(bc.fixed_at_start.size() + bc.fixed_at_end.size());
  if (count < bc.dimension) {
    return {BcStatus::under_determined, "under-determined: " + std::to_string(count) +
                                            " conditions for dimension " +
                                            std::to_string(bc.dimension)};
  }
  if (count > bc.dimension) {
    return {BcStatus::over_determined, "over-determined: " + std::to_string(count) +
                                           " conditions for dimension " +
                                           std::to_string(bc.dimension)};
  }
  return {};
}

// ---------------------------------------------------------------------------
// ODE system u' = f(u, t)

template <typename Scalar>
struct OdeSystem {
  using State = Vector<Scalar>;
  using Rhs = std::function<State(const State&, Scalar)>;
  using Jacobian = std::function<Matrix<Scalar>(const State&, Scalar)>;

  Index dimension = 0;
  Rhs rhs;
  Jacobian jacobian;  // optional; empty means "use finite differences"

  bool has_jacobian() const { return static_cast<bool>(jacobian); }

  /// Evaluates f and checks the output shape and finiteness.
  State operator()(const State& u, Scalar t) const {
    State out = rhs(u, t);
    if (out.size() != dimension) {
      throw RhsError("rhs returned " + std::to_string(out.size()) + " components, expected " +
                     std::to_string(dimension));
    }
    if (!out.allFinite()) {
      throw RhsError("rhs produced a non-finite value");
    }
    return out;
  }
};

// ---------------------------------------------------------------------------
// Trajectory: node values on a grid

template <typename Scalar>
class Trajectory {
 public:
  using State = Vector<Scalar>;

  Trajectory(Grid<Scalar> grid, Index dimension)
      : grid_(std::move(grid)), values_(NodeMatrix<Scalar>::Zero(grid_.node_count(), dimension)) {}

  Trajectory(Grid<Scalar> grid, NodeMatrix<Scalar> values)
      : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.rows() != grid_.node_count()) {
      throw InvalidInput("trajectory needs " + std::to_string(grid_.node_count()) +
                         " rows, got " + std::to_string(values_.rows()));
    }
    if (!values_.allFinite()) {
      throw InvalidInput("trajectory contains non-finite values");
    }
  }

  const Grid<Scalar>& grid() const { return grid_; }
  Index dimension() const { return values_.cols(); }
  Index node_count() const { return values_.rows(); }
  const NodeMatrix<Scalar>& values() const { return values_; }

  State node(Index k) const { return values_.row(k).transpose(); }

  void set_node(Index k, const State& u) {
    if (!u.allFinite()) {
      throw InvalidInput("non-finite state at node " + std::to_string(k));
    }
    values_.row(k) = u.transpose();
  }

  /// Value of 1-based component j at node k.
  Scalar operator()(Index k, Index j) const { return values_(k, j - 1); }

  Scalar max_abs() const { return values_.cwiseAbs().maxCoeff(); }

 private:
  Grid<Scalar> grid_;
  NodeMatrix<Scalar> values_;
};

// ---------------------------------------------------------------------------
// Relaxation parameters and reports

/// How the endpoint system treats the accumulated error term (E_j)_N.
enum class EndpointErrorTerm {
  /// Evaluate (E_j)_N on the previous iterate and keep it in the system.
  lagged,
  /// Drop it entirely; the fixed point is then only approximately Euler.
  dropped,
};

template <typename Scalar>
struct RelaxationParams {
  Scalar relax_k = Scalar(509);
  Scalar outer_tol = Scalar(1e-8);
  int max_outer_iter = 20000;
  Scalar newton_tol = Scalar(1e-10);
  int newton_max_iter = 50;
  EndpointErrorTerm endpoint_error_term = EndpointErrorTerm::lagged;
  Scalar divergence_limit = Scalar(1e6);

  void validate() const {
    if (!(relax_k > Scalar(1))) throw InvalidInput("relax_k must be > 1");
    if (!(outer_tol > Scalar(0))) throw InvalidInput("outer_tol must be > 0");
    if (!(newton_tol > Scalar(0))) throw InvalidInput("newton_tol must be > 0");
    if (max_outer_iter < 1) throw InvalidInput("max_outer_iter must be positive");
    if (newton_max_iter < 1) throw InvalidInput("newton_max_iter must be positive");
    if (!(divergence_limit > Scalar(0))) throw InvalidInput("divergence_limit must be > 0");
  }
};

template <typename Scalar>
struct SolveReport {
  bool converged = false;
  int outer_iterations = 0;
  std::vector<Scalar> residual_history;      // outer update norm per iteration
  std::vector<Scalar> discrepancy_history;   // |swept u_0 - endpoint u_0|, per iteration
  int newton_failures = 0;
  Scalar final_euler_residual = Scalar(0);
  std::string failure;  // empty unless a Newton failure stopped the iteration
};

// double-precision aliases used by the CLI and most tests
using GridD = Grid<double>;
using BoundaryConditionsD = BoundaryConditions<double>;
using OdeSystemD = OdeSystem<double>;
using TrajectoryD = Trajectory<double>;
using RelaxationParamsD = RelaxationParams<double>;
using SolveReportD = SolveReport<double>;

}  // namespace gml

#endif  // GML_TYPES_HPP
