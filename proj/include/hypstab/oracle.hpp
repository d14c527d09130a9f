#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <utility>

#include "hypstab/feedback.hpp"
#include "hypstab/field.hpp"
#include "hypstab/profile.hpp"
#include "hypstab/quasilinear.hpp"
#include "hypstab/transport.hpp"

// First-order explicit upwind (donor-cell) schemes on vertex-centred grids, kept
// independent of the characteristics code for cross-checks.
namespace hypstab::oracle {

struct UpwindGrid {
  double horizon = 1.0;
  double length = 1.0;
  std::size_t cells = 100;  // J; nodes x_j = j dx, j = 0..J
  std::size_t steps = 100;  // dt = horizon / steps

  double dx() const { return length / static_cast<double>(cells); }
  double dt() const { return horizon / static_cast<double>(steps); }
  double cfl(double max_speed) const { return max_speed * dt() / dx(); }
  // Field layout of the output: steps + 1 time levels, cells + 1 nodes.
  UniformGrid field_grid() const { return {horizon, length, steps + 1, cells + 1}; }

  // Fewest steps keeping max_speed dt / dx <= cfl.
  static UpwindGrid with_cfl(double horizon, double length, std::size_t cells, double max_speed,
                             double cfl = 0.9);
};

constexpr double kMaxCfl = 0.9;

// Inflow value from y_bnd; throws CFLViolation when sup|a| dt / dx > 0.9.
Field upwind_linear(const transport::Coefficient& a, const Profile& y0, const Profile& y_bnd,
                    const UpwindGrid& grid);

struct ClosedLoopBoundary {
  std::function<double(double v_left, double t)> left;  // u(t, 0)
  std::function<double(double t)> right;                // v(t, L)
};

// Feedback traces at both ends, started from the data as in the Picard solver.
ClosedLoopBoundary two_control_boundary(const Profile& u0, const Profile& v0,
                                        const feedback::PowerFeedback& fb, double length);
// u(t, 0) = h(v(t, 0), t) and a feedback trace at x = L.
ClosedLoopBoundary one_control_boundary(const quasilinear::BoundaryMap& map, const Profile& v0,
                                        const feedback::PowerFeedback& fb, double length);

// Speeds frozen at the current level. Order per step: v everywhere but x = L,
// then v(L); u everywhere but x = 0, then u(0) from the new v(0).
// Throws CFLViolation, or BoxExit when |u| > u_radius or |v| > v_radius (1% slack).
std::pair<Field, Field> upwind_closed_loop(
    const quasilinear::DiagonalSystem& system, const Profile& u0, const Profile& v0,
    const ClosedLoopBoundary& boundary, const UpwindGrid& grid,
    double u_radius = std::numeric_limits<double>::infinity(),
    double v_radius = std::numeric_limits<double>::infinity());

// Bilinear resampling of f onto another grid over the same rectangle.
Field resample(const Field& f, const UniformGrid& target);

}  // namespace hypstab::oracle
