#include <doctest.h>

#include <cmath>
#include <random>

#include "gml/newton.hpp"

using namespace gml;
using Vec = Vector<double>;
using Mat = Matrix<double>;

TEST_CASE("fd_jacobian of a linear map returns the matrix") {
  Mat A(3, 3);
  A << 2, -1, 0.5, 3, 4, -2, 0, 1.5, 7;
  const VectorFunction<double> F = [&](const Vec& x) -> Vec { return A * x; };
  Vec x(3);
  x << 0.3, -1.2, 5.0;
  const Mat J = fd_jacobian(F, x);
  CHECK((J - A).cwiseAbs().maxCoeff() <= 1e-6 * A.cwiseAbs().maxCoeff());
}

TEST_CASE("fd_jacobian of the identity") {
  const VectorFunction<double> F = [](const Vec& x) -> Vec { return x; };
  const Mat J = fd_jacobian(F, Vec(Vec::Constant(4, 2.5)));
  CHECK((J - Mat::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-7);
}

TEST_CASE("fd_jacobian matches the analytic derivative") {
  // F = (x1^2, x2^3); dF = diag(2 x1, 3 x2^2) = diag(4, 3) at (2, 1)
  const VectorFunction<double> F = [](const Vec& x) -> Vec {
    Vec y(2);
    y << x[0] * x[0], x[1] * x[1] * x[1];
    return y;
  };
  Vec x(2);
  x << 2.0, 1.0;
  const Mat J = fd_jacobian(F, x);
  CHECK(J(0, 0) == doctest::Approx(4.0).epsilon(1e-7));
  CHECK(J(1, 1) == doctest::Approx(3.0).epsilon(1e-7));
  CHECK(std::abs(J(0, 1)) < 1e-12);
  CHECK(std::abs(J(1, 0)) < 1e-12);
}

TEST_CASE("fd_jacobian of random affine maps") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = 1 + static_cast<Index>(rng() % 6);
    Mat A(n, n);
    Vec b(n), x(n);
    for (Index i = 0; i < n; ++i) {
      b[i] = u(rng);
      x[i] = u(rng);
      for (Index j = 0; j < n; ++j) A(i, j) = u(rng);
    }
    const VectorFunction<double> F = [&](const Vec& v) -> Vec { return A * v + b; };
    CHECK((fd_jacobian(F, x) - A).cwiseAbs().maxCoeff() <= 1e-6 * A.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("fd_jacobian reports non-finite evaluations") {
  const VectorFunction<double> F = [](const Vec& x) -> Vec {
    Vec y(2);
    y << x[0], x[1] > 1.0 ? std::log(-1.0) : x[1];
    return y;
  };
  Vec x(2);
  x << 0.0, 1.0;
  try {
    fd_jacobian(F, x);
    FAIL("expected RhsError");
  } catch (const RhsError& e) {
    const std::string what = e.what();
    CHECK(what.find("component 2") != std::string::npos);
    CHECK(what.find("variable 2") != std::string::npos);
  }
}

TEST_CASE("lu_solve small cases") {
  Vec b(3);
  b << 1, -2, 3;
  CHECK(lu_solve(Mat::Identity(3, 3), b) == b);

  Mat D(2, 2);
  D << 2, 0, 0, 4;
  Vec rhs(2);
  rhs << 2, 8;
  const Vec x = lu_solve(D, rhs);
  CHECK(x[0] == 1.0);
  CHECK(x[1] == 2.0);

  // needs a row swap
  Mat P(2, 2);
  P << 0, 1, 1, 0;
  const Vec y = lu_solve(P, rhs);
  CHECK(y[0] == 8.0);
  CHECK(y[1] == 2.0);
}

TEST_CASE("lu_solve recovers known solutions of diagonally dominant systems") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 300; ++trial) {
    const Index n = 1 + static_cast<Index>(rng() % 8);
    Mat A(n, n);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) A(i, j) = u(rng);
      A(i, i) += (A.row(i).cwiseAbs().sum() + 1.0) * (u(rng) > 0 ? 1 : -1);
    }
    Vec x(n);
    for (Index i = 0; i < n; ++i) x[i] = static_cast<double>(i + 1);
    const Vec got = lu_solve(A, A * x);
    CHECK((got - x).cwiseAbs().maxCoeff() <= 1e-10 * x.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("lu_solve on a well-conditioned 4x4") {
  Mat A(4, 4);
  A << 4, 1, 0.5, -1, 1, 5, 1, 0, -0.5, 1, 6, 2, 1, 0, 2, 7;
  Vec x(4);
  x << 1, 2, 3, 4;
  const Vec b = A * x;
  const Vec got = lu_solve(A, b);
  CHECK((got - x).cwiseAbs().maxCoeff() <= 1e-10);
  const double norm_inf = A.cwiseAbs().rowwise().sum().maxCoeff();
  CHECK((A * got - b).cwiseAbs().maxCoeff() <=
        1e-10 * (norm_inf * got.cwiseAbs().maxCoeff() + b.cwiseAbs().maxCoeff()));
}

TEST_CASE("lu_solve rejects singular and malformed input") {
  Mat S(3, 3);
  S << 1, 2, 3, 2, 4, 6, 1, 0, 1;
  CHECK_THROWS_AS(lu_solve(S, Vec::Ones(3)), SingularMatrix);
  CHECK_THROWS_AS(lu_solve(Mat::Zero(2, 2), Vec::Ones(2)), SingularMatrix);
  CHECK_THROWS_AS(lu_solve(Mat::Identity(2, 3), Vec::Ones(2)), InvalidInput);
  CHECK_THROWS_AS(lu_solve(Mat::Identity(3, 3), Vec::Ones(2)), InvalidInput);
  // tiny pivot relative to the norm
  Mat T(2, 2);
  T << 1, 0, 0, 1e-16;
  CHECK_THROWS_AS(lu_solve(T, Vec::Ones(2)), SingularMatrix);
}

namespace {

Vec scalar(double v) { return Vec::Constant(1, v); }

const VectorFunction<double> square_minus_four = [](const Vec& x) -> Vec { return scalar(x[0] * x[0] - 4.0); };

}  // namespace

TEST_CASE("newton_solve finds sqrt(4)") {
  NewtonOptions<double> opts;
  opts.tol = 1e-14;
  const auto r = newton_solve(square_minus_four, scalar(3.0), opts);
  CHECK(r.converged);
  CHECK(std::abs(r.solution[0] - 2.0) <= 1e-12);
  CHECK(r.iterations <= 8);
}

TEST_CASE("newton_solve converges quadratically on x^2 - 4") {
  // Replay the iteration one step at a time; the run is deterministic.
  std::vector<double> errors;
  for (int k = 0; k <= 6; ++k) {
    NewtonOptions<double> opts;
    opts.tol = 1e-300;
    opts.max_iter = std::max(k, 1);
    const double x = k == 0 ? 3.0 : newton_solve(square_minus_four, scalar(3.0), opts).solution[0];
    errors.push_back(std::abs(x - 2.0));
  }
  for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
    if (errors[k] < 1e-7) break;  // next error is at round-off
    CHECK(errors[k + 1] <= 1.0 * errors[k] * errors[k]);
  }
}

TEST_CASE("newton_solve is exact in one step on linear systems") {
  Mat A(3, 3);
  A << 3, 1, 0, 1, 4, 1, 0, 1, 5;
  Vec b(3);
  b << 1, 2, 3;
  const VectorFunction<double> F = [&](const Vec& x) -> Vec { return A * x - b; };
  const MatrixFunction<double> J = [&](const Vec&) { return A; };
  const auto r = newton_solve(F, Vec(Vec::Zero(3)), NewtonOptions<double>{}, J);
  CHECK(r.converged);
  CHECK(r.iterations == 1);

  const auto fd = newton_solve(F, Vec(Vec::Zero(3)));
  CHECK(fd.converged);
  CHECK(fd.iterations <= 2);
}

TEST_CASE("newton_solve on a double root stays bounded") {
  const VectorFunction<double> F = [](const Vec& x) -> Vec { return scalar(x[0] * x[0]); };
  NewtonOptions<double> tight;
  tight.tol = 1e-300;
  tight.max_iter = 25;
  const auto r = newton_solve(F, scalar(1.0), tight);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 25);
  // linear convergence: x halves per step
  CHECK(r.solution[0] == doctest::Approx(std::ldexp(1.0, -25)).epsilon(1e-6));

  NewtonOptions<double> loose;
  loose.tol = 1e-10;
  const auto ok = newton_solve(F, scalar(1.0), loose);
  CHECK(ok.converged);
  CHECK(ok.iterations <= loose.max_iter);
}

TEST_CASE("newton_solve never exceeds max_iter") {
  // no real root: x^2 + 1
  const VectorFunction<double> F = [](const Vec& x) -> Vec { return scalar(x[0] * x[0] + 1.0); };
  for (int cap : {1, 2, 7, 40}) {
    NewtonOptions<double> opts;
    opts.max_iter = cap;
    int linearizations = 0;
    const MatrixFunction<double> J = [&](const Vec& x) {
      ++linearizations;
      return Mat::Constant(1, 1, 2.0 * x[0]);
    };
    const auto r = newton_solve(F, scalar(0.7), opts, J);
    CHECK_FALSE(r.converged);
    CHECK(r.iterations <= cap);
    CHECK(linearizations <= cap);
  }
}

TEST_CASE("newton_solve surfaces a singular Jacobian") {
  const VectorFunction<double> F = [](const Vec& x) -> Vec { return scalar(x[0] * x[0] - 4.0); };
  CHECK_THROWS_AS(newton_solve(F, scalar(0.0)), SingularMatrix);
}

TEST_CASE("damping keeps the residual monotone") {
  // atan has a tiny basin for undamped Newton
  const VectorFunction<double> F = [](const Vec& x) -> Vec { return scalar(std::atan(x[0])); };
  NewtonOptions<double> undamped;
  undamped.max_damping_halvings = 0;
  undamped.max_iter = 3;
  const auto wild = newton_solve(F, scalar(3.0), undamped);
  CHECK(std::abs(wild.solution[0]) > 1000.0);
  CHECK_FALSE(wild.converged);

  const auto damped = newton_solve(F, scalar(3.0));
  CHECK(damped.converged);
  CHECK(std::abs(damped.solution[0]) < 1e-10);
}

TEST_CASE("damping backs off from rhs domain errors") {
  // F undefined for x <= 0; undamped first step from x0 = 10 lands at x < 0
  const VectorFunction<double> F = [](const Vec& x) -> Vec {
    if (x[0] <= 0) throw RhsError("log of non-positive");
    return scalar(std::log(x[0]));
  };
  const auto r = newton_solve(F, scalar(10.0));
  CHECK(r.converged);
  CHECK(r.solution[0] == doctest::Approx(1.0));

  NewtonOptions<double> undamped;
  undamped.max_damping_halvings = 0;
  CHECK_THROWS_AS(newton_solve(F, scalar(10.0), undamped), RhsError);
}

TEST_CASE("newton options validate") {
  NewtonOptions<double> o;
  o.fd_step_relative = 1.5;
  CHECK_THROWS_AS(newton_solve(square_minus_four, scalar(3.0), o), InvalidInput);
  CHECK(NewtonOptions<double>{}.fd_step_relative == doctest::Approx(1.4901161193847656e-8));
}
