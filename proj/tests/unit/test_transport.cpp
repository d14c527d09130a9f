#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "hypstab/error.hpp"
#include "hypstab/transport.hpp"

using namespace hypstab;
using namespace hypstab::transport;

namespace {

Coefficient constant_speed(double a) {
  return Coefficient::from_function([a](double, double) { return a; },
                                    a > 0 ? Direction::positive : Direction::negative,
                                    std::abs(a), 0.0, [](double, double) { return 0.0; });
}

Coefficient sine_speed() {
  return Coefficient::from_function([](double, double x) { return 1.0 + 0.1 * std::sin(x); },
                                    Direction::positive, 1.1, 0.1,
                                    [](double, double x) { return 0.1 * std::cos(x); });
}

// Composite Simpson on [a, b] with n (even) panels.
template <class F>
double simpson(F f, double a, double b, int n = 2000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

const Domain kUnit{1.0, 1.0, 1.0};

}  // namespace

TEST_CASE("extension operator") {
  const Domain d{1.0, 1.0, 0.5};
  const auto one = extend_coefficient(constant_speed(1.0), d);
  CHECK(one(3.0, -7.2) == 1.0);
  const auto ramp = extend_coefficient(
      Coefficient::from_function([](double, double x) { return x; }, Direction::positive, 1.0, 1.0),
      d);
  CHECK(ramp(0.5, 1.5) == doctest::Approx(0.5));
  CHECK(ramp(0.5, 2.3) == doctest::Approx(0.3));
  CHECK(ramp(0.5, -0.4) == doctest::Approx(0.4));
  CHECK(ramp(9.0, 0.25) == doctest::Approx(0.25));  // frozen in t outside [0, T]
  CHECK(ramp.sup_norm() == 1.0);
  CHECK(ramp.lipschitz() == 1.0);
}

TEST_CASE("constant-speed characteristics") {
  const auto a = constant_speed(1.0);
  const double step = 0.01;
  auto r1 = integrate_characteristic(a, 0.5, 0.8, kUnit, step);
  CHECK(r1.entrance_class == EntranceClass::I);
  CHECK(r1.entrance_time == 0.0);
  CHECK(r1.foot == doctest::Approx(0.3).epsilon(1e-12));
  auto r2 = integrate_characteristic(a, 0.8, 0.5, kUnit, step);
  CHECK(r2.entrance_class == EntranceClass::J);
  CHECK(r2.entrance_time == doctest::Approx(0.3).epsilon(1e-8));
  CHECK(r2.foot == 0.0);
  auto r3 = integrate_characteristic(a, 0.7, 0.7, kUnit, step);
  CHECK(r3.entrance_class == EntranceClass::P);
  CHECK(r3.path.front().first == 0.7);

  const auto two = constant_speed(2.0);
  auto [e, cls] = entrance_time(two, 1.0, 0.5, kUnit, 0.005);
  CHECK(cls == EntranceClass::J);
  CHECK(e == doctest::Approx(0.75).epsilon(1e-8));
  CHECK(entrance_time(a, 0.2, 0.9, kUnit, step).first == 0.0);

  // negative speed: inflow at x = L
  const auto back = constant_speed(-1.0);
  auto rb = integrate_characteristic(back, 0.8, 0.5, kUnit, step);
  CHECK(rb.entrance_class == EntranceClass::J);
  CHECK(rb.entrance_time == doctest::Approx(0.3).epsilon(1e-8));
  CHECK(rb.foot == 1.0);
  auto ri = integrate_characteristic(back, 0.2, 0.5, kUnit, step);
  CHECK(ri.foot == doctest::Approx(0.7));
}

TEST_CASE("entrance time against quadrature") {
  // autonomous speed: the time to travel from 0 to x is the integral of 1 / a
  const auto a = sine_speed();
  const double travel = simpson([](double p) { return 1.0 / (1.0 + 0.1 * std::sin(p)); }, 0.0, 0.4);
  auto [e, cls] = entrance_time(a, 0.9, 0.4, kUnit, 0.01);
  CHECK(cls == EntranceClass::J);
  CHECK(e == doctest::Approx(0.9 - travel).epsilon(1e-9));
}

TEST_CASE("step guard") {
  CHECK_THROWS_AS(integrate_characteristic(constant_speed(2.0), 0.5, 0.5, kUnit, 0.6), Error);
  try {
    entrance_time(constant_speed(2.0), 0.5, 0.5, kUnit, 0.6);
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::StepTooLarge);
  }
}

TEST_CASE("entrance derivatives") {
  auto [dt1, dx1] = entrance_derivatives(constant_speed(1.0), 0.8, 0.3, kUnit, 0.01);
  CHECK(dt1 == doctest::Approx(1.0));
  CHECK(dx1 == doctest::Approx(-1.0));
  auto [dt2, dx2] = entrance_derivatives(constant_speed(2.0), 0.8, 0.3, kUnit, 0.01);
  CHECK(dt2 == doctest::Approx(1.0));
  CHECK(dx2 == doctest::Approx(-0.5));
  CHECK_THROWS_AS(entrance_derivatives(constant_speed(1.0), 0.2, 0.5, kUnit, 0.01), Error);

  const auto lin = Coefficient::from_function([](double, double x) { return 1.0 + 0.1 * x; },
                                              Direction::positive, 1.1, 0.1,
                                              [](double, double) { return 0.1; });
  const double step = 1e-3, h = 1e-4, t = 0.9, x = 0.4;
  auto [dte, dxe] = entrance_derivatives(lin, t, x, kUnit, step);
  const double fd_t =
      (entrance_time(lin, t + h, x, kUnit, step).first - entrance_time(lin, t - h, x, kUnit, step).first) /
      (2 * h);
  const double fd_x =
      (entrance_time(lin, t, x + h, kUnit, step).first - entrance_time(lin, t, x - h, kUnit, step).first) /
      (2 * h);
  CHECK(std::abs(dte - fd_t) <= 1e-4);
  CHECK(std::abs(dxe - fd_x) <= 1e-4);
}

TEST_CASE("flow semigroup") {
  const auto a = sine_speed();
  const Domain d{1.0, 1.0, 0.9};
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const double s = U(rng), r = U(rng), t = U(rng), x = U(rng);
    const double direct = flow(a, s, t, x, d, 1e-3);
    const double composed = flow(a, s, r, flow(a, r, t, x, d, 1e-3), d, 1e-3);
    CHECK(std::abs(direct - composed) <= 1e-8);
  }
}

TEST_CASE("linear transport solve") {
  const UniformGrid g{1.0, 1.0, 41, 41};
  const Profile y0([](double x) { return x; }, 1.0);
  const Profile yb([](double t) { return -t; }, 1.0);
  const Field y = solve_linear_transport(constant_speed(1.0), y0, yb, g);
  for (std::size_t k = 0; k < g.nt; ++k)
    for (std::size_t j = 0; j < g.nx; ++j) CHECK(y(k, j) == doctest::Approx(g.x(j) - g.t(k)));

  const Field z = solve_linear_transport(constant_speed(1.0), Profile::constant(0.0),
                                         Profile::constant(0.0), g);
  CHECK(z.sup_norm() == 0.0);

  CHECK_THROWS_AS(solve_linear_transport(constant_speed(1.0), Profile::constant(1.0),
                                         Profile::constant(0.0), g),
                  Error);
}

TEST_CASE("parallel kernel matches serial reference") {
  const double two_pi = 2.0 * std::numbers::pi;
  const auto a = Coefficient::from_function(
      [two_pi](double, double x) { return -(1.0 + 0.1 * std::sin(two_pi * x)); },
      Direction::negative, 1.1, 0.1 * two_pi);
  const Profile y0([](double x) { return std::cos(std::numbers::pi * x); }, std::numbers::pi);
  const Profile yb([](double t) { return -std::cos(3.0 * t); }, 3.0);
  const UniformGrid g{1.5, 1.0, 61, 41};
  const Field par = solve_linear_transport(a, y0, yb, g);
  const Field ser = solve_linear_transport_serial(a, y0, yb, g);
  CHECK(sup_distance(par, ser) <= 1e-12);
  // maximum principle
  CHECK(par.sup_norm() <= 1.0 + 1e-12);
}

TEST_CASE("Lipschitz bound") {
  const auto one = constant_speed(1.0);
  CHECK(lipschitz_bound(one, 0.0, 1.0, Domain{3.0, 1.0, 1.0}) == doctest::Approx(1.0));
  CHECK(lipschitz_bound(constant_speed(2.0), 2.0, 1.0, Domain{1.0, 1.0, 1.0}) ==
        doctest::Approx(4.0));
  const auto a = sine_speed();
  const Domain d{1.0, 1.0, 0.9};
  CHECK(flow_lipschitz_constant(a, d) == doctest::Approx(1.1 * std::exp(0.1)));
  CHECK(entrance_lipschitz_constant(a, d) == doctest::Approx(1.1 * std::exp(0.1) / 0.9));

  const Profile y0([](double x) { return std::sin(2.0 * x); }, 2.0);
  const Profile yb([](double t) { return std::sin(-3.0 * t); }, 3.0);
  const Field y = solve_linear_transport(a, y0, yb, UniformGrid{1.0, 1.0, 101, 101});
  CHECK(discrete_lipschitz(y) <= lipschitz_bound(a, 3.0, 2.0, d) * 1.01);
}

TEST_CASE("entrance time depends continuously on the coefficient") {
  const auto a = sine_speed();
  std::vector<double> gaps;
  for (int n : {1, 2, 4, 8}) {
    const double eps = 0.1 / n;
    const auto an = Coefficient::from_function(
        [eps](double t, double x) { return 1.0 + 0.1 * std::sin(x) + eps * std::cos(3.0 * t + x); },
        Direction::positive, 1.1 + eps, 0.1 + eps);
    double gap = 0.0;
    for (int k = 0; k <= 10; ++k)
      for (int j = 0; j <= 10; ++j) {
        const double t = 0.1 * k, x = 0.1 * j;
        gap = std::max(gap, std::abs(entrance_time(an, t, x, kUnit, 0.005).first -
                                     entrance_time(a, t, x, kUnit, 0.005).first));
      }
    gaps.push_back(gap);
  }
  for (std::size_t i = 1; i < gaps.size(); ++i) {
    CHECK(gaps[i] < gaps[i - 1]);
    CHECK(gaps[i] / gaps[i - 1] == doctest::Approx(0.5).epsilon(0.1));
  }
}
