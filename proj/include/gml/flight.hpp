// flight.hpp
//
// In-plane climb of a transport aircraft with constant thrust and angle of
// attack. State u = (h, gamma, V, x): altitude [m], flight-path angle [rad],
// airspeed [m/s], horizontal range [m].
//
//   h'     = V sin(gamma)
//   gamma' = (F sin(a + a_F) + L) / (m V) - g cos(gamma) / V
//   V'     = (F cos(a + a_F) - D) / m - g sin(gamma)
//   x'     = V cos(gamma)
//
// with L, D = 0.5 rho(h) V^2 S C_{L,D}, rho(h) = 1.225 (1 - 0.0065 h / 288.15)^4.225,
// C_L = C_L_alpha * a and the drag polar C_D = C_D0 + K1 C_L + K2 C_L^2.

#ifndef GML_FLIGHT_HPP
#define GML_FLIGHT_HPP

#include <cmath>
#include <map>
#include <sstream>
#include <string>

#include "gml/errors.hpp"
#include "gml/relaxation.hpp"
#include "gml/types.hpp"

namespace gml::flight {

/// Airframe and engine constants. Defaults are an A320-class airliner.
template <typename Scalar>
struct FlightParams {
  Scalar mass = Scalar(120000);      // m_f [kg]
  Scalar wing_area = Scalar(260);    // S_f [m^2]
  Scalar angle_of_attack = Scalar(0.0945);  // a [rad]
  Scalar thrust_offset = Scalar(0.03225);   // a_F [rad]
  Scalar gravity = Scalar(9.8);      // [m/s^2]
  Scalar cd0 = Scalar(0.0175);
  Scalar k1 = Scalar(0);
  Scalar k2 = Scalar(0.06);
  Scalar cl_alpha = Scalar(5);       // [1/rad]
  Scalar thrust = Scalar(240000);    // F [N]

  void validate() const {
    if (!(mass > Scalar(0))) throw InvalidInput("mass must be > 0");
    if (!(wing_area > Scalar(0))) throw InvalidInput("wing_area must be > 0");
    if (!(thrust >= Scalar(0))) throw InvalidInput("thrust must be >= 0");
    if (!(gravity > Scalar(0))) throw InvalidInput("gravity must be > 0");
  }
};

template <typename Scalar>
struct FlightState {
  Scalar altitude;    // h = u_1
  Scalar path_angle;  // gamma = u_2
  Scalar speed;       // V = u_3
  Scalar range;       // x = u_4

  static FlightState from(const Vector<Scalar>& u) {
    if (u.size() != 4) throw InvalidInput("flight state needs 4 components");
    return {u[0], u[1], u[2], u[3]};
  }

  Vector<Scalar> vector() const {
    Vector<Scalar> u(4);
    u << altitude, path_angle, speed, range;
    return u;
  }
};

inline constexpr double kMinSpeed = 1e-6;  // [m/s]
inline constexpr double kSeaLevelDensity = 1.225;
inline constexpr double kLapseRatio = 0.0065 / 288.15;  // [1/m]
inline constexpr double kDensityExponent = 4.225;

/// rho(h) in kg/m^3. Throws RhsError at or above the altitude where the
/// base of the power law reaches zero (about 44.3 km).
template <typename Scalar>
Scalar air_density(Scalar altitude) {
  const Scalar base = Scalar(1) - Scalar(kLapseRatio) * altitude;
  if (!(base > Scalar(0))) {
    std::ostringstream os;
    os << "air density undefined at altitude " << static_cast<double>(altitude) << " m";
    throw RhsError(os.str());
  }
  return Scalar(kSeaLevelDensity) * std::pow(base, Scalar(kDensityExponent));
}

/// d rho / d h.
template <typename Scalar>
Scalar air_density_slope(Scalar altitude) {
  const Scalar base = Scalar(1) - Scalar(kLapseRatio) * altitude;
  if (!(base > Scalar(0))) throw RhsError("air density undefined above the zero-base altitude");
  return -Scalar(kSeaLevelDensity) * Scalar(kDensityExponent) * Scalar(kLapseRatio) *
         std::pow(base, Scalar(kDensityExponent) - Scalar(1));
}

template <typename Scalar>
Scalar lift_coefficient(const FlightParams<Scalar>& p) {
  return p.cl_alpha * p.angle_of_attack;
}

template <typename Scalar>
Scalar drag_coefficient(const FlightParams<Scalar>& p) {
  const Scalar cl = lift_coefficient(p);
  return p.cd0 + p.k1 * cl + p.k2 * cl * cl;
}

namespace detail {

template <typename Scalar>
void check_speed(const FlightState<Scalar>& s) {
  if (!(s.speed >= Scalar(kMinSpeed))) {
    std::ostringstream os;
    os.precision(10);
    os << "speed too small for the flight model: V=" << static_cast<double>(s.speed)
       << " m/s at h=" << static_cast<double>(s.altitude)
       << " m, gamma=" << static_cast<double>(s.path_angle) << " rad";
    throw RhsError(os.str());
  }
}

template <typename Scalar>
Scalar dynamic_pressure_area(const FlightState<Scalar>& s, const FlightParams<Scalar>& p) {
  return Scalar(0.5) * air_density(s.altitude) * s.speed * s.speed * p.wing_area;
}

}  // namespace detail

template <typename Scalar>
Scalar lift(const FlightState<Scalar>& s, const FlightParams<Scalar>& p) {
  return detail::dynamic_pressure_area(s, p) * lift_coefficient(p);
}

template <typename Scalar>
Scalar drag(const FlightState<Scalar>& s, const FlightParams<Scalar>& p) {
  return detail::dynamic_pressure_area(s, p) * drag_coefficient(p);
}

template <typename Scalar>
Vector<Scalar> flight_rhs(const FlightState<Scalar>& s, const FlightParams<Scalar>& p) {
  detail::check_speed(s);
  const Scalar qs = detail::dynamic_pressure_area(s, p);
  const Scalar L = qs * lift_coefficient(p);
  const Scalar D = qs * drag_coefficient(p);
  const Scalar thrust_angle = p.angle_of_attack + p.thrust_offset;
  const Scalar sg = std::sin(s.path_angle);
  const Scalar cg = std::cos(s.path_angle);
  const Scalar V = s.speed;

  Vector<Scalar> f(4);
  f[0] = V * sg;
  f[1] = (p.thrust * std::sin(thrust_angle) + L) / (p.mass * V) - p.gravity * cg / V;
  f[2] = (p.thrust * std::cos(thrust_angle) - D) / p.mass - p.gravity * sg;
  f[3] = V * cg;
  return f;
}

/// Analytic d f / d u, rows and columns ordered (h, gamma, V, x).
template <typename Scalar>
Matrix<Scalar> flight_jacobian(const FlightState<Scalar>& s, const FlightParams<Scalar>& p) {
  detail::check_speed(s);
  const Scalar V = s.speed;
  const Scalar rho = air_density(s.altitude);
  const Scalar drho = air_density_slope(s.altitude);
  const Scalar cl = lift_coefficient(p);
  const Scalar cd = drag_coefficient(p);
  const Scalar half_sv2 = Scalar(0.5) * p.wing_area * V * V;
  const Scalar L = rho * half_sv2 * cl;
  const Scalar L_h = drho * half_sv2 * cl;
  const Scalar L_V = rho * p.wing_area * V * cl;
  const Scalar D_h = drho * half_sv2 * cd;
  const Scalar D_V = rho * p.wing_area * V * cd;
  const Scalar side_force = p.thrust * std::sin(p.angle_of_attack + p.thrust_offset);
  const Scalar sg = std::sin(s.path_angle);
  const Scalar cg = std::cos(s.path_angle);
  const Scalar m = p.mass;
  const Scalar g = p.gravity;

  Matrix<Scalar> J = Matrix<Scalar>::Zero(4, 4);
  J(0, 1) = V * cg;
  J(0, 2) = sg;
  J(1, 0) = L_h / (m * V);
  J(1, 1) = g * sg / V;
  J(1, 2) = -(side_force + L) / (m * V * V) + L_V / (m * V) + g * cg / (V * V);
  J(2, 0) = -D_h / m;
  J(2, 1) = -g * cg;
  J(2, 2) = -D_V / m;
  J(3, 1) = -V * sg;
  J(3, 2) = cg;
  return J;
}

template <typename Scalar>
OdeSystem<Scalar> flight_system(const FlightParams<Scalar>& params) {
  params.validate();
  OdeSystem<Scalar> sys;
  sys.dimension = 4;
  sys.rhs = [params](const Vector<Scalar>& u, Scalar) {
    return flight_rhs(FlightState<Scalar>::from(u), params);
  };
  sys.jacobian = [params](const Vector<Scalar>& u, Scalar) {
    return flight_jacobian(FlightState<Scalar>::from(u), params);
  };
  return sys;
}

// Canonical climb: 532 s from sea level at 150 m/s to 11 km.
inline constexpr double kClimbTime = 532.0;
inline constexpr Index kClimbNodes = 3000;
inline constexpr double kStartSpeed = 150.0;
inline constexpr double kTargetAltitude = 11000.0;
inline constexpr double kDefaultPathAngle = 0.05;

template <typename Scalar>
struct FlightProblem {
  BvpProblem<Scalar> problem;
  RelaxationParams<Scalar> relaxation;
  std::map<Index, Scalar> free_start_defaults;
};

template <typename Scalar>
BoundaryConditions<Scalar> climb_boundary_conditions() {
  BoundaryConditions<Scalar> bc;
  bc.dimension = 4;
  bc.fixed_at_start = {{1, Scalar(0)}, {3, Scalar(kStartSpeed)}, {4, Scalar(0)}};
  bc.fixed_at_end = {{1, Scalar(kTargetAltitude)}};
  return bc;
}

/// The canonical climb problem on [0, 532] s: h, V, x pinned at t=0, h pinned
/// at t_f, gamma(0) free. The horizon is fixed; build a BvpProblem directly
/// for anything else.
template <typename Scalar>
FlightProblem<Scalar> make_flight_problem(const FlightParams<Scalar>& params = {},
                                          Index n_nodes = kClimbNodes,
                                          RelaxationParams<Scalar> relaxation = {}) {
  relaxation.validate();
  return FlightProblem<Scalar>{
      BvpProblem<Scalar>(flight_system(params), climb_boundary_conditions<Scalar>(),
                         make_grid(n_nodes, Scalar(kClimbTime))),
      relaxation,
      {{2, Scalar(kDefaultPathAngle)}}};
}

}  // namespace gml::flight

#endif  // GML_FLIGHT_HPP
