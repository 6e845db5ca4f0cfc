#include <doctest.h>

#include <cmath>
#include <random>

#include "gml/flight.hpp"
#include "gml/newton.hpp"
#include "gml/shooting.hpp"

using namespace gml;
using namespace gml::flight;
using Vec = Vector<double>;
using State = FlightState<double>;

namespace {

const FlightParams<double> kParams{};

}  // namespace

TEST_CASE("air density reference values") {
  // high-precision reference values
  CHECK(air_density(0.0) == 1.225);
  CHECK(air_density(11000.0) == doctest::Approx(0.367136769478687798).epsilon(1e-12));
  CHECK(air_density(5000.0) == doctest::Approx(0.738840843135719005).epsilon(1e-12));
}

TEST_CASE("air density decreases monotonically up to 11 km") {
  double previous = air_density(0.0);
  for (int h = 1; h <= 11000; ++h) {
    const double rho = air_density(static_cast<double>(h));
    CHECK_MESSAGE(rho < previous, "h=" << h);
    previous = rho;
  }
}

TEST_CASE("air density slope matches a central difference") {
  for (double h : {0.0, 1234.5, 8000.0, 11000.0, 30000.0}) {
    const double step = 1e-3;
    const double fd = (air_density(h + step) - air_density(h - step)) / (2 * step);
    CHECK(air_density_slope(h) == doctest::Approx(fd).epsilon(1e-7));
  }
}

TEST_CASE("air density is undefined at and above the zero-base altitude") {
  const double ceiling = 1.0 / kLapseRatio;
  CHECK(ceiling == doctest::Approx(44330.769230769230769).epsilon(1e-14));
  CHECK_THROWS_AS(air_density(ceiling), RhsError);
  CHECK_THROWS_AS(air_density(50000.0), RhsError);
  CHECK_THROWS_AS(air_density_slope(50000.0), RhsError);
  CHECK(std::isfinite(air_density(44000.0)));
}

TEST_CASE("aerodynamic coefficients") {
  CHECK(lift_coefficient(kParams) == doctest::Approx(0.4725).epsilon(1e-15));
  CHECK(drag_coefficient(kParams) == doctest::Approx(0.030895375).epsilon(1e-15));
}

TEST_CASE("lift and drag at sea level, 150 m/s") {
  const State s{0.0, 0.0, 150.0, 0.0};
  CHECK(lift(s, kParams) == doctest::Approx(1693026.5625).epsilon(1e-14));
  CHECK(drag(s, kParams) == doctest::Approx(110701.990546875).epsilon(1e-14));
}

TEST_CASE("lift and drag scale with V squared") {
  for (double h : {0.0, 4000.0, 10500.0}) {
    const State slow{h, 0.1, 120.0, 0.0};
    const State fast{h, 0.1, 240.0, 0.0};
    CHECK(lift(fast, kParams) == doctest::Approx(4 * lift(slow, kParams)).epsilon(1e-14));
    CHECK(drag(fast, kParams) == doctest::Approx(4 * drag(slow, kParams)).epsilon(1e-14));
  }
}

TEST_CASE("flight_rhs reference values") {
  SUBCASE("launch state") {
    const Vec f = flight_rhs(State{0.0, 0.0, 150.0, 0.0}, kParams);
    CHECK(f[0] == 0.0);
    CHECK(f[1] == doctest::Approx(0.0304091764167797664).epsilon(1e-13));
    CHECK(f[2] == doctest::Approx(1.06143934661933057919).epsilon(1e-13));
    CHECK(f[3] == 150.0);
  }
  SUBCASE("climbing state") {
    const Vec f = flight_rhs(State{3000.0, 0.1, 180.0, 0.0}, kParams);
    CHECK(f[0] == doctest::Approx(17.97001499642906742).epsilon(1e-13));
    CHECK(f[1] == doctest::Approx(0.03117777614741590350).epsilon(1e-12));
    CHECK(f[2] == doctest::Approx(0.01757601824581153077).epsilon(1e-11));
    CHECK(f[3] == doctest::Approx(179.1007497500446379).epsilon(1e-13));
  }
}

TEST_CASE("kinematic rows satisfy dh^2 + dx^2 = V^2") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> h(0, 12000), g(-0.5, 0.5), v(50, 300), x(0, 1e5);
  for (int i = 0; i < 1000; ++i) {
    const State s{h(rng), g(rng), v(rng), x(rng)};
    const Vec f = flight_rhs(s, kParams);
    CHECK(f.allFinite());
    CHECK(f[0] * f[0] + f[3] * f[3] == doctest::Approx(s.speed * s.speed).epsilon(1e-12));
  }
}

TEST_CASE("analytic Jacobian agrees with finite differences") {
  const auto sys = flight_system(kParams);
  const VectorFunction<double> F = [&](const Vec& u) -> Vec { return sys.rhs(u, 0.0); };
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> h(0, 12000), g(-0.5, 0.5), v(50, 300), x(0, 1e5);
  for (int i = 0; i < 200; ++i) {
    const Vec u = State{h(rng), g(rng), v(rng), x(rng)}.vector();
    const Matrix<double> analytic = sys.jacobian(u, 0.0);
    const Matrix<double> fd = fd_jacobian(F, u);
    for (Index r = 0; r < 4; ++r) {
      for (Index c = 0; c < 4; ++c) {
        const double scale = std::max(1e-6, std::abs(analytic(r, c)));
        CHECK_MESSAGE(std::abs(analytic(r, c) - fd(r, c)) <= 1e-5 * scale, "entry " << r << "," << c);
      }
    }
  }
}

TEST_CASE("flight_rhs rejects stalled states") {
  CHECK_THROWS_AS(flight_rhs(State{1000.0, 0.1, 0.0, 0.0}, kParams), RhsError);
  CHECK_THROWS_AS(flight_rhs(State{1000.0, 0.1, -5.0, 0.0}, kParams), RhsError);
  CHECK_THROWS_AS(flight_jacobian(State{1000.0, 0.1, 1e-9, 0.0}, kParams), RhsError);
  CHECK(flight_rhs(State{1000.0, 0.1, 1e-3, 0.0}, kParams).allFinite());
  try {
    flight_rhs(State{1000.0, 0.1, 0.0, 0.0}, kParams);
  } catch (const RhsError& e) {
    CHECK(std::string(e.what()).find("V=0") != std::string::npos);
  }
}

TEST_CASE("flight params validate") {
  FlightParams<double> p;
  p.mass = 0.0;
  CHECK_THROWS_AS(flight_system(p), InvalidInput);
  CHECK_THROWS_AS(State::from(Vec::Zero(3)), InvalidInput);
}

TEST_CASE("make_flight_problem builds the canonical climb") {
  const auto fp = make_flight_problem<double>();
  CHECK(fp.problem.grid().n_nodes() == 3000);
  CHECK(fp.problem.grid().t_final() == 532.0);
  CHECK(fp.problem.dimension() == 4);
  CHECK(fp.problem.free_at_start() == std::vector<Index>{2});
  CHECK(fp.problem.free_at_end() == std::vector<Index>{2, 3, 4});
  CHECK(fp.problem.bc().fixed_at_start.at(3) == 150.0);
  CHECK(fp.problem.bc().fixed_at_end.at(1) == 11000.0);
  CHECK(fp.relaxation.relax_k == 509.0);
  CHECK(fp.free_start_defaults.at(2) == 0.05);

  CHECK(make_flight_problem<double>(kParams, 300).problem.grid().n_nodes() == 300);
  CHECK_THROWS_AS(make_flight_problem<double>(kParams, 0), InvalidInput);
}

// With the default parameters no initial path angle reaches 11 km in 532 s
// under explicit Euler; the terminal altitude peaks about 460 m short.
TEST_CASE("default climb falls short of the target altitude") {
  const auto fp = make_flight_problem<double>();
  const auto& p = fp.problem;
  double best = -1.0;
  int integrated = 0;
  for (int i = 0; i <= 80; ++i) {
    const double gamma0 = -0.1 + 0.005 * i;
    try {
      const auto path = euler_integrate(p.system(), State{0.0, gamma0, 150.0, 0.0}.vector(), p.grid());
      best = std::max(best, path(3000, 1));
      ++integrated;
    } catch (const RhsError&) {
      // stalled on the way up
    }
  }
  CHECK(integrated > 40);
  CHECK(best < 11000.0);
  CHECK(best > 10400.0);
}
