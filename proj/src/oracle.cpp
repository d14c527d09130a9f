#include "hypstab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "hypstab/error.hpp"

namespace hypstab::oracle {

namespace {

void check_grid(const UpwindGrid& g) {
  if (!(g.horizon > 0.0) || !(g.length > 0.0) || g.cells < 1 || g.steps < 1) {
    throw Error(ErrorKind::InvalidArgument, "upwind grid needs T, L > 0 and at least one cell/step");
  }
}

void check_cfl(double cfl) {
  if (cfl > kMaxCfl * (1.0 + 1e-12)) {
    throw Error(ErrorKind::CFLViolation, "CFL number " + std::to_string(cfl) + " exceeds 0.9");
  }
}

}  // namespace

UpwindGrid UpwindGrid::with_cfl(double horizon, double length, std::size_t cells,
                                double max_speed, double cfl) {
  UpwindGrid g{horizon, length, cells, 1};
  const double dt_max = cfl * g.dx() / max_speed;
  g.steps = static_cast<std::size_t>(std::ceil(horizon / dt_max - 1e-12));
  if (g.steps == 0) g.steps = 1;
  return g;
}

Field upwind_linear(const transport::Coefficient& a, const Profile& y0, const Profile& y_bnd,
                    const UpwindGrid& grid) {
  check_grid(grid);
  check_cfl(grid.cfl(a.sup_norm()));
  const std::size_t nx = grid.cells + 1;
  const double dx = grid.dx(), dt = grid.dt();
  const bool positive = a.direction() == transport::Direction::positive;
  Field out(grid.field_grid());
  for (std::size_t j = 0; j < nx; ++j) out(0, j) = y0(out.grid().x(j));

  std::vector<double> cur(nx), next(nx);
  for (std::size_t j = 0; j < nx; ++j) cur[j] = out(0, j);
  for (std::size_t n = 0; n < grid.steps; ++n) {
    const double t = dt * static_cast<double>(n);
    const double t_next = n + 1 == grid.steps ? grid.horizon : t + dt;
    for (std::size_t j = 0; j < nx; ++j) {
      const double x = out.grid().x(j);
      const double r = a(t, x) * dt / dx;
      if (positive) {
        next[j] = j == 0 ? y_bnd(t_next) : cur[j] - r * (cur[j] - cur[j - 1]);
      } else {
        next[j] = j + 1 == nx ? y_bnd(t_next) : cur[j] - r * (cur[j + 1] - cur[j]);
      }
    }
    cur.swap(next);
    for (std::size_t j = 0; j < nx; ++j) out(n + 1, j) = cur[j];
  }
  return out;
}

ClosedLoopBoundary two_control_boundary(const Profile& u0, const Profile& v0,
                                        const feedback::PowerFeedback& fb, double length) {
  const feedback::FeedbackTrace left(u0(0.0), fb);
  const feedback::FeedbackTrace right(v0(length), fb);
  return {[left](double, double t) { return left(t); }, [right](double t) { return right(t); }};
}

ClosedLoopBoundary one_control_boundary(const quasilinear::BoundaryMap& map, const Profile& v0,
                                        const feedback::PowerFeedback& fb, double length) {
  const feedback::FeedbackTrace right(v0(length), fb);
  auto h = map.h;
  return {[h](double v, double t) { return h(v, t); }, [right](double t) { return right(t); }};
}

std::pair<Field, Field> upwind_closed_loop(const quasilinear::DiagonalSystem& system,
                                           const Profile& u0, const Profile& v0,
                                           const ClosedLoopBoundary& boundary,
                                           const UpwindGrid& grid, double u_radius,
                                           double v_radius) {
  check_grid(grid);
  if (!boundary.left || !boundary.right) {
    throw Error(ErrorKind::InvalidArgument, "closed loop needs both boundary closures");
  }
  const std::size_t nx = grid.cells + 1;
  const double dx = grid.dx(), dt = grid.dt();
  const UniformGrid fg = grid.field_grid();
  Field u(fg), v(fg);
  std::vector<double> uc(nx), vc(nx), un(nx), vn(nx), lam(nx), mu(nx);
  for (std::size_t j = 0; j < nx; ++j) {
    uc[j] = u(0, j) = u0(fg.x(j));
    vc[j] = v(0, j) = v0(fg.x(j));
  }
  const double u_lim = u_radius * 1.01, v_lim = v_radius * 1.01;

  for (std::size_t n = 0; n < grid.steps; ++n) {
    const double t_next = n + 1 == grid.steps ? grid.horizon : dt * static_cast<double>(n + 1);
    double vmax = 0.0;
    for (std::size_t j = 0; j < nx; ++j) {
      lam[j] = system.lambda(uc[j], vc[j]);
      mu[j] = system.mu(uc[j], vc[j]);
      vmax = std::max({vmax, std::abs(lam[j]), std::abs(mu[j])});
    }
    check_cfl(vmax * dt / dx);

    for (std::size_t j = 0; j + 1 < nx; ++j) vn[j] = vc[j] - mu[j] * dt / dx * (vc[j + 1] - vc[j]);
    vn[nx - 1] = boundary.right(t_next);
    for (std::size_t j = 1; j < nx; ++j) un[j] = uc[j] - lam[j] * dt / dx * (uc[j] - uc[j - 1]);
    un[0] = boundary.left(vn[0], t_next);

    for (std::size_t j = 0; j < nx; ++j) {
      if (!(std::abs(un[j]) <= u_lim) || !(std::abs(vn[j]) <= v_lim)) {
        throw Error(ErrorKind::BoxExit, "upwind state left the working box at t = " +
                                            std::to_string(t_next));
      }
    }
    uc.swap(un);
    vc.swap(vn);
    for (std::size_t j = 0; j < nx; ++j) {
      u(n + 1, j) = uc[j];
      v(n + 1, j) = vc[j];
    }
  }
  return {std::move(u), std::move(v)};
}

Field resample(const Field& f, const UniformGrid& target) {
  Field out(target);
  for (std::size_t k = 0; k < target.nt; ++k) {
    const double t = target.t(k);
    for (std::size_t j = 0; j < target.nx; ++j) out(k, j) = f.sample(t, target.x(j));
  }
  return out;
}

}  // namespace hypstab::oracle
