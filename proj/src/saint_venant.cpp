#include "hypstab/saint_venant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hypstab/error.hpp"

namespace hypstab::saint_venant {

double CanalParams::celerity() const { return std::sqrt(g * h_star); }

void CanalParams::validate() const {
  if (!(h_star > 0.0) || !(g > 0.0) || !(length > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "canal needs H* > 0, g > 0 and l > 0");
  }
  if (!(v_star > 0.0) || !(v_star < celerity())) {
    throw Error(ErrorKind::NotSubcritical, "need 0 < V* < sqrt(g H*), got V* = " +
                                               std::to_string(v_star) + ", sqrt(g H*) = " +
                                               std::to_string(celerity()));
  }
}

RiemannPair to_riemann(PhysicalState s, const CanalParams& p) {
  if (!(s.h > 0.0)) throw Error(ErrorKind::NonpositiveDepth, "depth " + std::to_string(s.h));
  // sqrt(gH) - sqrt(gH*) = g (H - H*) / (sqrt(gH) + sqrt(gH*)) keeps small deviations accurate
  const double a = std::sqrt(p.g * s.h);
  const double a_star = p.celerity();
  const double da = p.g * (s.h - p.h_star) / (a + a_star);
  const double dv = s.v - p.v_star;
  return {dv + 2.0 * da, dv - 2.0 * da};
}

PhysicalState from_riemann(RiemannPair r, const CanalParams& p) {
  const double root = std::sqrt(p.h_star) + (r.u - r.v) / (4.0 * std::sqrt(p.g));
  if (!(root > 0.0)) {
    throw Error(ErrorKind::DepthCollapse, "depth collapses at (u, v) = (" + std::to_string(r.u) +
                                              ", " + std::to_string(r.v) + ")");
  }
  return {root * root, p.v_star + 0.5 * (r.u + r.v)};
}

std::pair<double, double> char_speeds(RiemannPair r, const CanalParams& p) {
  const double a = p.celerity();
  return {p.v_star + a + 0.25 * (3.0 * r.u + r.v), p.v_star - a + 0.25 * (r.u + 3.0 * r.v)};
}

double pick_c(std::span<const CanalParams> canals) {
  if (canals.empty()) throw Error(ErrorKind::InvalidArgument, "no canals");
  double gap = std::numeric_limits<double>::infinity();
  for (const auto& p : canals) {
    p.validate();
    gap = std::min(gap, p.celerity() - p.v_star);
  }
  return 0.5 * gap * (1.0 - 1e-9);
}

double controlled_flow_rate(Side side, double depth, double trace, const CanalParams& p) {
  if (!(depth > 0.0)) throw Error(ErrorKind::NonpositiveDepth, "depth " + std::to_string(depth));
  const double a = std::sqrt(p.g * depth);
  const double a_star = p.celerity();
  if (side == Side::right) return depth * (trace + 2.0 * a + p.v_star - 2.0 * a_star);
  return depth * (trace - 2.0 * a + p.v_star + 2.0 * a_star);
}

double flux(double u, double v, const CanalParams& p) {
  const PhysicalState s = from_riemann({u, v}, p);
  return s.h * s.v;
}

double flux_deviation(double u, double v, const CanalParams& p) {
  // (sqrt(H*) + s)^2 (V* + m) - H* V* = H* m + (2 sqrt(H*) s + s^2)(V* + m)
  const double s = (u - v) / (4.0 * std::sqrt(p.g));
  const double m = 0.5 * (u + v);
  const double r = std::sqrt(p.h_star);
  return p.h_star * m + (2.0 * r * s + s * s) * (p.v_star + m);
}

std::pair<double, double> flux_gradient(double u, double v, const CanalParams& p) {
  const double sg = 4.0 * std::sqrt(p.g);
  const double root = std::sqrt(p.h_star) + (u - v) / sg;
  const double vel = p.v_star + 0.5 * (u + v);
  const double a = 2.0 * root * vel / sg;
  const double b = 0.5 * root * root;
  return {a + b, -a + b};
}

quasilinear::DiagonalSystem diagonal_system(const CanalParams& p, double c) {
  p.validate();
  const double a = p.celerity();
  return quasilinear::affine_system(p.v_star + a, 0.75, 0.25, p.v_star - a, 0.25, 0.75, c);
}

double node_box_radius(const CanalParams& p, double c) {
  return 0.5 * std::min(c, 2.0 * p.celerity());
}

double solve_scalar(const std::function<double(double)>& f,
                    const std::function<double(double)>& df, double seed, double half_width,
                    const NewtonPolicy& policy) {
  const double lo0 = seed - half_width, hi0 = seed + half_width;
  double x = seed;
  double fx = f(x);
  for (int it = 0; it < policy.max_iter && std::isfinite(fx); ++it) {
    if (std::abs(fx) <= policy.tol) {
      // one polishing step, kept only if it does not make things worse
      const double d = df(x);
      if (d != 0.0 && std::isfinite(d)) {
        const double y = x - fx / d;
        const double fy = f(y);
        if (std::isfinite(fy) && std::abs(fy) < std::abs(fx)) return y;
      }
      return x;
    }
    const double d = df(x);
    if (d == 0.0 || !std::isfinite(d)) break;
    const double next = x - fx / d;
    if (half_width > 0.0 && (next < lo0 || next > hi0)) break;
    x = next;
    fx = f(x);
  }

  // bisection fallback
  double lo = lo0, hi = hi0;
  double flo = f(lo), fhi = f(hi);
  if (!std::isfinite(flo) || !std::isfinite(fhi) || (flo > 0.0) == (fhi > 0.0)) {
    throw Error(ErrorKind::NewtonFailure, "no root in [" + std::to_string(lo) + ", " +
                                              std::to_string(hi) + "]");
  }
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (std::abs(fm) <= policy.tol || mid == lo || mid == hi) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

quasilinear::BoundaryMap simple_node_map(const CanalParams& p, double c,
                                         const NewtonPolicy& policy) {
  p.validate();
  const auto [fu0, fv0] = flux_gradient(0.0, 0.0, p);
  const double slope0 = -fv0 / fu0;
  quasilinear::BoundaryMap map;
  map.h = [p, slope0, policy](double v, double) {
    if (v == 0.0) return 0.0;
    const auto f = [&](double u) { return flux_deviation(u, v, p); };
    const auto df = [&](double u) { return flux_gradient(u, v, p).first; };
    return solve_scalar(f, df, slope0 * v, 2.0 * std::abs(v), policy);
  };

  const double delta = node_box_radius(p, c);
  constexpr int n = 401;
  double prev = map.h(-delta, 0.0);
  double d1 = 0.0;
  const double dv = 2.0 * delta / (n - 1);
  for (int i = 1; i < n; ++i) {
    const double cur = map.h(-delta + i * dv, 0.0);
    d1 = std::max(d1, std::abs(cur - prev) / dv);
    prev = cur;
  }
  map.d1 = d1;
  map.d2 = 0.0;
  map.settle_time = 0.0;
  return map;
}

}  // namespace hypstab::saint_venant
