#pragma once

#include <functional>
#include <span>
#include <utility>

#include "hypstab/quasilinear.hpp"

// Shallow-water canal physics in Riemann coordinates relative to an equilibrium (H*, V*).
namespace hypstab::saint_venant {

struct CanalParams {
  double h_star = 1.0;  // H*
  double v_star = 0.5;  // V*
  double g = 9.81;
  double length = 1.0;

  double q_star() const { return h_star * v_star; }
  double celerity() const;  // sqrt(g H*)
  // Throws InvalidArgument for non-positive H*, g, l and NotSubcritical unless 0 < V* < sqrt(g H*).
  void validate() const;
};

struct PhysicalState {
  double h = 0.0;  // depth
  double v = 0.0;  // velocity
};

struct RiemannPair {
  double u = 0.0;
  double v = 0.0;
};

// u = V + 2 sqrt(gH) - (V* + 2 sqrt(gH*)),  v = V - 2 sqrt(gH) - (V* - 2 sqrt(gH*)).
RiemannPair to_riemann(PhysicalState s, const CanalParams& p);
// H = (sqrt(H*) + (u - v) / (4 sqrt g))^2,  V = V* + (u + v) / 2.
PhysicalState from_riemann(RiemannPair r, const CanalParams& p);

// (lambda, mu) = (V* + sqrt(gH*) + (3u + v)/4,  V* - sqrt(gH*) + (u + 3v)/4)
std::pair<double, double> char_speeds(RiemannPair r, const CanalParams& p);

// Half the smallest sqrt(gH*) - V*, shrunk by 1e-9 so the strict inequality holds.
double pick_c(std::span<const CanalParams> canals);

enum class Side { left, right };

// Flow rate the boundary device prescribes from the measured depth and the feedback trace.
double controlled_flow_rate(Side side, double depth, double trace, const CanalParams& p);

// H V at (u, v), and H V - H* V* written so that it vanishes exactly at (0, 0).
double flux(double u, double v, const CanalParams& p);
double flux_deviation(double u, double v, const CanalParams& p);
// (d/du, d/dv) of the flux.
std::pair<double, double> flux_gradient(double u, double v, const CanalParams& p);

quasilinear::DiagonalSystem diagonal_system(const CanalParams& p, double c);

// Radius of the (u, v) box on which node maps are built: min(c, 2 sqrt(gH*)) / 2.
double node_box_radius(const CanalParams& p, double c);

struct NewtonPolicy {
  double tol = 1e-12;  // absolute, on the residual
  int max_iter = 50;
};

// Root of f near `seed`: Newton first, bisection on [seed - half_width, seed + half_width]
// if Newton stalls. Throws NewtonFailure when the bracket holds no sign change.
double solve_scalar(const std::function<double(double)>& f,
                    const std::function<double(double)>& df, double seed, double half_width,
                    const NewtonPolicy& policy = {});

// u = h(v) with Q(t, 0) = Q*, i.e. flux_deviation(h(v), v) = 0. D1 is measured on the node box.
quasilinear::BoundaryMap simple_node_map(const CanalParams& p, double c,
                                         const NewtonPolicy& policy = {});

}  // namespace hypstab::saint_venant
