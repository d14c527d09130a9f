#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "hypstab/error.hpp"
#include "hypstab/saint_venant.hpp"

using namespace hypstab;
using namespace hypstab::saint_venant;

namespace {

const CanalParams kCanal{1.0, 0.5, 9.81, 1.0};

// F_i(u, v) written directly from the depth and velocity formulas.
double node_residual(double u, double v, const CanalParams& p) {
  const double root = std::sqrt(p.h_star) + (u - v) / (4.0 * std::sqrt(p.g));
  return root * root * (p.v_star + (u + v) / 2.0) - p.h_star * p.v_star;
}

}  // namespace

TEST_CASE("Riemann transforms") {
  const auto eq = to_riemann({1.0, 0.5}, kCanal);
  CHECK(eq.u == 0.0);
  CHECK(eq.v == 0.0);
  const auto r = to_riemann({1.1, 0.5}, kCanal);
  const double expected = 2.0 * (std::sqrt(10.791) - std::sqrt(9.81));
  CHECK(r.u == doctest::Approx(expected).epsilon(1e-13));
  CHECK(r.v == doctest::Approx(-expected).epsilon(1e-13));
  const auto back = from_riemann(r, kCanal);
  CHECK(back.h == doctest::Approx(1.1).epsilon(1e-13));
  CHECK(back.v == doctest::Approx(0.5).epsilon(1e-13));

  const auto st = from_riemann({0.1, -0.1}, kCanal);
  const double h = std::pow(1.0 + 0.2 / (4.0 * std::sqrt(9.81)), 2);
  CHECK(st.h == doctest::Approx(h).epsilon(1e-14));
  CHECK(st.v == doctest::Approx(0.5));
  const auto zero = from_riemann({0.0, 0.0}, kCanal);
  CHECK(zero.h == 1.0);
  CHECK(zero.v == 0.5);

  CHECK_THROWS_AS(to_riemann({0.0, 0.5}, kCanal), Error);
  try {
    from_riemann({-4.0 * std::sqrt(9.81), 4.0 * std::sqrt(9.81)}, kCanal);
    FAIL("expected DepthCollapse");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DepthCollapse);
  }
}

TEST_CASE("round trip and speed identities on random subcritical states") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> H(0.5, 1.5), V(0.1, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const PhysicalState s{H(rng), V(rng)};
    const auto back = from_riemann(to_riemann(s, kCanal), kCanal);
    CHECK(std::abs(back.h - s.h) <= 1e-12);
    CHECK(std::abs(back.v - s.v) <= 1e-12);
    const auto r = to_riemann(s, kCanal);
    const auto [lam, mu] = char_speeds(r, kCanal);
    const auto phys = from_riemann(r, kCanal);
    CHECK(std::abs(lam - (phys.v + std::sqrt(9.81 * phys.h))) <= 1e-12);
    CHECK(std::abs(mu - (phys.v - std::sqrt(9.81 * phys.h))) <= 1e-12);
    CHECK(std::abs(flux(r.u, r.v, kCanal) - phys.h * phys.v) <= 1e-12);
  }
}

TEST_CASE("speeds and the uniform floor") {
  const auto [lam, mu] = char_speeds({0.0, 0.0}, kCanal);
  CHECK(lam == doctest::Approx(3.63209).epsilon(1e-5));
  CHECK(mu == doctest::Approx(-2.63209).epsilon(1e-5));

  const std::vector<CanalParams> one{kCanal};
  const double c = pick_c(one);
  CHECK(c == doctest::Approx((std::sqrt(9.81) - 0.5) / 2.0).epsilon(1e-8));
  CHECK(c < (std::sqrt(9.81) - 0.5) / 2.0);

  const std::vector<CanalParams> two{kCanal, CanalParams{0.5, 0.8, 9.81, 2.0}};
  CHECK(pick_c(two) == doctest::Approx((std::sqrt(9.81 * 0.5) - 0.8) / 2.0).epsilon(1e-8));

  const std::vector<CanalParams> critical{CanalParams{1.0, std::sqrt(9.81), 9.81, 1.0}};
  CHECK_THROWS_AS(pick_c(critical), Error);
  CHECK_THROWS_AS(CanalParams({1.0, 4.0, 9.81, 1.0}).validate(), Error);

  // max(|u|, |v|) <= c keeps the speeds outside [-c, c]
  const auto sys = diagonal_system(kCanal, c);
  for (int i = 0; i <= 40; ++i)
    for (int j = 0; j <= 40; ++j) {
      const double u = -c + 2.0 * c * i / 40.0, v = -c + 2.0 * c * j / 40.0;
      CHECK(sys.lambda(u, v) > c);
      CHECK(sys.mu(u, v) < -c);
    }
}

TEST_CASE("boundary devices") {
  CHECK(controlled_flow_rate(Side::right, 1.0, 0.0, kCanal) == doctest::Approx(0.5));
  CHECK(controlled_flow_rate(Side::right, 1.0, -0.1, kCanal) == doctest::Approx(0.4));
  CHECK(controlled_flow_rate(Side::left, 1.0, 0.1, kCanal) == doctest::Approx(0.6));
  CHECK_THROWS_AS(controlled_flow_rate(Side::left, -1.0, 0.1, kCanal), Error);

  // device law evaluated on the state it produces gives back H V
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> U(-0.3, 0.3);
  for (int i = 0; i < 200; ++i) {
    const RiemannPair r{U(rng), U(rng)};
    const auto s = from_riemann(r, kCanal);
    CHECK(std::abs(controlled_flow_rate(Side::right, s.h, r.v, kCanal) - s.h * s.v) <= 1e-12);
    CHECK(std::abs(controlled_flow_rate(Side::left, s.h, r.u, kCanal) - s.h * s.v) <= 1e-12);
  }
}

TEST_CASE("flux deviation and gradient") {
  CHECK(flux_deviation(0.0, 0.0, kCanal) == 0.0);
  const auto [fu, fv] = flux_gradient(0.0, 0.0, kCanal);
  const double expected = 0.5 * std::sqrt(1.0) * (std::sqrt(1.0) + 0.5 / std::sqrt(9.81));
  CHECK(fu == doctest::Approx(expected).epsilon(1e-14));
  const double h = 1e-6;
  CHECK(fv == doctest::Approx((node_residual(0, h, kCanal) - node_residual(0, -h, kCanal)) / (2 * h))
                  .epsilon(1e-8));
  CHECK(flux_deviation(0.03, -0.02, kCanal) ==
        doctest::Approx(node_residual(0.03, -0.02, kCanal)).epsilon(1e-13));
}

TEST_CASE("simple node map") {
  const double c = pick_c(std::vector<CanalParams>{kCanal});
  const auto map = simple_node_map(kCanal, c);
  CHECK(map.h(0.0, 0.0) == 0.0);
  CHECK(map.d2 == 0.0);
  CHECK(map.settle_time == 0.0);
  const double delta = node_box_radius(kCanal, c);
  double d1 = 0.0;
  for (int i = 0; i <= 200; ++i) {
    const double v = -delta + 2.0 * delta * i / 200.0;
    const double u = map.h(v, 0.3);
    CHECK(std::abs(node_residual(u, v, kCanal)) <= 1e-12);
    if (i > 0) {
      const double vp = -delta + 2.0 * delta * (i - 1) / 200.0;
      d1 = std::max(d1, std::abs(u - map.h(vp, 0.3)) / (v - vp));
    }
  }
  CHECK(map.d1 >= d1 * (1.0 - 1e-3));
  CHECK(map.d1 <= d1 * 1.05);
}

TEST_CASE("scalar solver") {
  auto f = [](double x) { return x * x * x - 2.0; };
  auto df = [](double x) { return 3.0 * x * x; };
  CHECK(solve_scalar(f, df, 1.0, 1.0) == doctest::Approx(std::cbrt(2.0)).epsilon(1e-12));
  // flat derivative forces the bisection fallback
  auto flat = [](double) { return 0.0; };
  CHECK(solve_scalar(f, flat, 1.2, 0.5) == doctest::Approx(std::cbrt(2.0)).epsilon(1e-10));
  try {
    solve_scalar([](double x) { return x * x + 1.0; }, [](double x) { return 2.0 * x; }, 0.0, 1.0);
    FAIL("expected NewtonFailure");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NewtonFailure);
  }
}
