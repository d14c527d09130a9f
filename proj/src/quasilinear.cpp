#include "hypstab/quasilinear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <string>

#include "hypstab/error.hpp"
#include "hypstab/transport.hpp"

namespace hypstab::quasilinear {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double central_difference(const SpeedFn& f, double u, double v, bool in_u, double scale) {
  const double h = 1e-6 * std::max(1.0, scale);
  if (in_u) return (f(u + h, v) - f(u - h, v)) / (2.0 * h);
  return (f(u, v + h) - f(u, v - h)) / (2.0 * h);
}

double partial(const SpeedFn& exact, const SpeedFn& f, double u, double v, bool in_u,
               double scale) {
  return exact ? exact(u, v) : central_difference(f, u, v, in_u, scale);
}

// exp(2 T M2 C3) with the limit convention for M2 = 0 (C3 = 1/(2TM2) branch).
double growth_factor(double horizon, double m2, double c3) {
  if (m2 == 0.0 || std::isinf(c3)) return std::numbers::e;
  return std::exp(2.0 * horizon * m2 * c3);
}

}  // namespace

DiagonalSystem affine_system(double l0, double lu, double lv, double m0, double mu_u, double mu_v,
                             double speed_floor) {
  DiagonalSystem s;
  s.lambda = [=](double u, double v) { return l0 + lu * u + lv * v; };
  s.mu = [=](double u, double v) { return m0 + mu_u * u + mu_v * v; };
  s.dlambda_du = [=](double, double) { return lu; };
  s.dlambda_dv = [=](double, double) { return lv; };
  s.dmu_du = [=](double, double) { return mu_u; };
  s.dmu_dv = [=](double, double) { return mu_v; };
  s.speed_floor = speed_floor;
  return s;
}

BoxBounds box_bounds(const DiagonalSystem& system, double u_radius, double v_radius,
                     int resolution) {
  if (!system.lambda || !system.mu) {
    throw Error(ErrorKind::InvalidArgument, "system needs lambda and mu");
  }
  if (resolution < 2) throw Error(ErrorKind::InvalidArgument, "box resolution must be >= 2");
  const double scale = std::max(u_radius, v_radius);
  BoxBounds out;
  for (int i = 0; i < resolution; ++i) {
    const double u = -u_radius + 2.0 * u_radius * i / (resolution - 1);
    for (int j = 0; j < resolution; ++j) {
      const double v = -v_radius + 2.0 * v_radius * j / (resolution - 1);
      const double l = system.lambda(u, v);
      const double m = system.mu(u, v);
      const double d[4] = {
          partial(system.dlambda_du, system.lambda, u, v, true, scale),
          partial(system.dlambda_dv, system.lambda, u, v, false, scale),
          partial(system.dmu_du, system.mu, u, v, true, scale),
          partial(system.dmu_dv, system.mu, u, v, false, scale),
      };
      bool finite = std::isfinite(l) && std::isfinite(m);
      for (double x : d) finite = finite && std::isfinite(x);
      if (!finite) {
        throw Error(ErrorKind::BoxEvaluationFailure,
                    "speed not finite at (" + std::to_string(u) + ", " + std::to_string(v) + ")");
      }
      out.m1 = std::max({out.m1, std::abs(l), std::abs(m)});
      for (double x : d) out.m2 = std::max(out.m2, std::abs(x));
    }
  }
  return out;
}

ConstantsLedger build_ledger(const DiagonalSystem& system, double c1, double c2,
                             const feedback::PowerFeedback& fb, const BoundaryMap* map,
                             const LedgerOptions& options) {
  if (!(c1 > 0.0) || !(c2 > 0.0)) throw Error(ErrorKind::InvalidArgument, "C1, C2 must be > 0");
  if (!(system.speed_floor > 0.0)) throw Error(ErrorKind::InvalidArgument, "c must be > 0");
  if (!(options.length > 0.0)) throw Error(ErrorKind::InvalidArgument, "length must be > 0");
  const feedback::PowerFeedback params(fb.gain, fb.exponent);

  ConstantsLedger led;
  led.one_control = map != nullptr;
  led.c1 = c1;
  led.c2 = c2;
  led.gain = params.gain;
  led.exponent = params.exponent;
  led.speed_floor = system.speed_floor;
  led.length = options.length;
  led.t_star = feedback::extinction_time(c1, params);
  const double crossing = options.length / system.speed_floor;
  const double slope = params.gain * std::pow(c1, params.exponent) / system.speed_floor;

  if (!led.one_control) {
    led.c1_prime = c1;
    led.horizon = crossing + led.t_star;
    const BoxBounds box = box_bounds(system, c1, c1, options.resolution);
    led.m1 = box.m1;
    led.m2 = box.m2;
    led.c3 = led.m2 == 0.0 ? kInf : 1.0 / (2.0 * led.horizon * led.m2);
    led.c3_prime = std::max(slope, c2) * std::max(1.0, led.m1) *
                   growth_factor(led.horizon, led.m2, led.c3);
    return led;
  }

  if (!map->h) throw Error(ErrorKind::InvalidArgument, "boundary map has no h");
  led.d1 = map->d1;
  led.d2 = map->d2;
  led.settle_time = map->settle_time;
  led.horizon = crossing + std::max(map->settle_time, crossing + led.t_star);

  // sup |h| over v in [-C1, C1], t in [0, T]
  double sup_h = 0.0;
  const int n = options.resolution;
  for (int i = 0; i < n; ++i) {
    const double v = -c1 + 2.0 * c1 * i / (n - 1);
    for (int k = 0; k < n; ++k) {
      const double t = led.horizon * k / (n - 1);
      const double h = map->h(v, t);
      if (!std::isfinite(h)) throw Error(ErrorKind::BoxEvaluationFailure, "h not finite on box");
      sup_h = std::max(sup_h, std::abs(h));
    }
  }
  led.c1_prime = std::max(c1, sup_h);

  const BoxBounds box = box_bounds(system, led.c1_prime, c1, options.resolution);
  led.m1 = box.m1;
  led.m2 = box.m2;
  led.c3 = led.m2 == 0.0 ? kInf : std::max(1.0 / (2.0 * led.horizon * led.m2), c2);
  const double growth = std::max(1.0, led.m1) * growth_factor(led.horizon, led.m2, led.c3);
  led.c3_prime = std::max(slope, c2) * growth;
  led.c3_dblprime =
      std::max((led.d1 * led.c3_prime + led.d2) / system.speed_floor, c2) * growth;
  return led;
}

ConditionCheck check_two_control(const ConstantsLedger& ledger) {
  if (ledger.m2 == 0.0) return {true, 0.0};
  const double slope =
      ledger.gain * std::pow(ledger.c1, ledger.exponent) / ledger.speed_floor;
  const double left =
      ledger.horizon * ledger.m2 * std::max(1.0, ledger.m1) * std::max(slope, ledger.c2);
  const double margin = left * 2.0 * std::numbers::e;
  return {margin <= 1.0, margin};
}

OneControlCheck check_one_control(const ConstantsLedger& ledger) {
  OneControlCheck out;
  if (std::isinf(ledger.c3)) {
    out.k12 = out.k13 = true;
    return out;
  }
  out.margin_k12 = ledger.c3_prime / ledger.c3;
  out.margin_k13 = ledger.c3_dblprime / ledger.c3;
  out.k12 = ledger.c3_prime <= ledger.c3;
  out.k13 = ledger.c3_dblprime <= ledger.c3;
  return out;
}

ClosedLoopOperator::ClosedLoopOperator(const DiagonalSystem& system, Profile u0, Profile v0,
                                       LeftBoundary left, feedback::FeedbackTrace right,
                                       UniformGrid grid, PicardOptions options, double u_radius,
                                       double v_radius)
    : system_(system),
      u0_(std::move(u0)),
      v0_(std::move(v0)),
      left_(std::move(left)),
      right_(std::move(right)),
      grid_(grid),
      options_(std::move(options)),
      u_radius_(u_radius),
      v_radius_(v_radius) {
  grid_.validate();
  if (!left_.trace && !left_.map) {
    throw Error(ErrorKind::InvalidArgument, "left boundary needs a trace or a map");
  }
}

std::pair<Field, Field> ClosedLoopOperator::initial_guess() const {
  Field u(grid_), v(grid_);
  if (options_.initial_guess == InitialGuess::zero) return {u, v};
  for (std::size_t j = 0; j < grid_.nx; ++j) {
    const double x = grid_.x(j);
    const double a = u0_(x), b = v0_(x);
    for (std::size_t k = 0; k < grid_.nt; ++k) {
      u(k, j) = a;
      v(k, j) = b;
    }
  }
  return {u, v};
}

Profile ClosedLoopOperator::left_trace(const Field& v_tilde) const {
  const BoundaryMap* map = left_.map;
  auto column = std::make_shared<std::vector<double>>(v_tilde.column(0));
  const double horizon = grid_.horizon;
  return Profile(
      [map, column, horizon](double t) {
        const double v = interpolate_uniform(*column, horizon, t);
        return map->h(v, t);
      },
      0.0);
}

namespace {

// Frozen speeds are bilinear tables, so RK4 gains nothing from steps below a few
// cells; four cells per step, capped so a step never spans the edge.
double frozen_step(const transport::Coefficient& a, const UniformGrid& grid) {
  const double sup = a.sup_norm();
  return std::min(kFrozenStepCells * grid.dx(), grid.length) / sup;
}

}  // namespace

std::pair<Field, Field> ClosedLoopOperator::apply(const Field& u_tilde,
                                                  const Field& v_tilde) const {
  const double c = system_.speed_floor;
  const double tol_u = u_radius_ * (1.0 + options_.box_slack) + 1e-14;
  const double tol_v = v_radius_ * (1.0 + options_.box_slack) + 1e-14;
  Field lam(grid_), mu(grid_);
  const auto uu = u_tilde.values();
  const auto vv = v_tilde.values();
  auto lv = lam.values();
  auto mv = mu.values();
  for (std::size_t i = 0; i < uu.size(); ++i) {
    double a = uu[i], b = vv[i];
    if (!std::isfinite(a) || !std::isfinite(b)) {
      throw Error(ErrorKind::WorkingBoxExit, "iterate is not finite");
    }
    if (options_.box_extension) {
      a = std::clamp(a, -u_radius_, u_radius_);
      b = std::clamp(b, -v_radius_, v_radius_);
    } else if (std::abs(a) > tol_u || std::abs(b) > tol_v) {
      throw Error(ErrorKind::WorkingBoxExit,
                  "iterate left the working box: |u| = " + std::to_string(std::abs(a)) +
                      ", |v| = " + std::to_string(std::abs(b)));
    }
    lv[i] = system_.lambda(a, b);
    mv[i] = system_.mu(a, b);
    const double slack = 1e-12 * std::max(1.0, c);
    if (!(lv[i] >= c - slack) || !(mv[i] <= -c + slack)) {
      throw Error(ErrorKind::CoefficientSignLoss,
                  "frozen speeds (" + std::to_string(lv[i]) + ", " + std::to_string(mv[i]) +
                      ") violate the floor c = " + std::to_string(c));
    }
  }

  const auto a_u = transport::Coefficient::from_field(std::move(lam), transport::Direction::positive);
  const auto a_v = transport::Coefficient::from_field(std::move(mu), transport::Direction::negative);
  transport::SolveOptions so_u, so_v;
  so_u.tol_compat = so_v.tol_compat = options_.tol_compat;
  so_u.step = options_.step > 0.0 ? options_.step : frozen_step(a_u, grid_);
  so_v.step = options_.step > 0.0 ? options_.step : frozen_step(a_v, grid_);

  Profile u_bnd;
  if (left_.trace) {
    const feedback::FeedbackTrace tr = *left_.trace;
    u_bnd = Profile([tr](double t) { return tr(t); }, 0.0);
  } else {
    u_bnd = left_trace(v_tilde);
  }
  const feedback::FeedbackTrace right = right_;
  const Profile v_bnd([right](double t) { return right(t); }, 0.0);

  Field u = transport::solve_linear_transport(a_u, u0_, u_bnd, grid_, so_u);
  Field v = transport::solve_linear_transport(a_v, v0_, v_bnd, grid_, so_v);
  return {std::move(u), std::move(v)};
}

namespace {

double data_sup(const Profile& p, double length) { return p.sampled_sup(0.0, length); }

ClosedLoopSolution iterate(const ClosedLoopOperator& op, const PicardOptions& options,
                           ConstantsLedger ledger) {
  ClosedLoopSolution sol;
  sol.ledger = ledger;
  auto [u_t, v_t] = op.initial_guess();
  double last = kInf;
  for (std::size_t it = 1; it <= options.max_iter; ++it) {
    auto [u, v] = op.apply(u_t, v_t);
    if (!u.all_finite() || !v.all_finite()) throw Error::no_convergence(it, kInf);
    const double r = std::max(sup_distance(u, u_t), sup_distance(v, v_t));
    sol.residual_history.push_back(r);
    if (options.observer) options.observer(it, u, v);
    u_t = std::move(u);
    v_t = std::move(v);
    last = r;
    if (r < options.tol) {
      sol.u = std::move(u_t);
      sol.v = std::move(v_t);
      sol.iterations = it;
      return sol;
    }
  }
  throw Error::no_convergence(options.max_iter, last);
}

}  // namespace

ClosedLoopSolution picard_two_control(const DiagonalSystem& system, const Profile& u0,
                                      const Profile& v0, const feedback::PowerFeedback& fb,
                                      const UniformGrid& grid, const PicardOptions& options) {
  grid.validate();
  const double c1 = options.c1.value_or(
      std::max({data_sup(u0, grid.length), data_sup(v0, grid.length), 1e-300}));
  const double c2 =
      options.c2.value_or(std::max({u0.lipschitz(), v0.lipschitz(), 1e-300}));
  const ConstantsLedger ledger = build_ledger(system, c1, c2, fb, nullptr, {grid.length, 200});
  const auto w1 = check_two_control(ledger);

  const feedback::FeedbackTrace left(u0(0.0), fb);
  const feedback::FeedbackTrace right(v0(grid.length), fb);
  const ClosedLoopOperator op(system, u0, v0, LeftBoundary{left, nullptr}, right, grid, options,
                              ledger.c1, ledger.c1);
  ClosedLoopSolution sol = iterate(op, options, ledger);
  if (!w1.holds) {
    sol.warnings.push_back("stability condition W1 fails (margin " + std::to_string(w1.margin) +
                           ")");
  }
  return sol;
}

ClosedLoopSolution picard_one_control(const DiagonalSystem& system, const Profile& u0,
                                      const Profile& v0, const BoundaryMap& map,
                                      const feedback::PowerFeedback& fb, const UniformGrid& grid,
                                      const PicardOptions& options) {
  grid.validate();
  if (!map.h) throw Error(ErrorKind::InvalidArgument, "boundary map has no h");
  const double gap = std::abs(u0(0.0) - map.h(v0(0.0), 0.0));
  if (gap > options.tol_compat) {
    throw Error(ErrorKind::CompatibilityViolation,
                "u0(0) differs from h(v0(0), 0) by " + std::to_string(gap));
  }
  const double c1 = options.c1.value_or(
      std::max({data_sup(u0, grid.length), data_sup(v0, grid.length), 1e-300}));
  const double c2 =
      options.c2.value_or(std::max({u0.lipschitz(), v0.lipschitz(), 1e-300}));
  const ConstantsLedger ledger = build_ledger(system, c1, c2, fb, &map, {grid.length, 200});
  const auto k = check_one_control(ledger);

  const feedback::FeedbackTrace right(v0(grid.length), fb);
  const ClosedLoopOperator op(system, u0, v0, LeftBoundary{std::nullopt, &map}, right, grid,
                              options, ledger.c1_prime, ledger.c1);
  ClosedLoopSolution sol = iterate(op, options, ledger);
  if (!k.k12) sol.warnings.push_back("K12 fails (C3'/C3 = " + std::to_string(k.margin_k12) + ")");
  if (!k.k13) sol.warnings.push_back("K13 fails (C3''/C3 = " + std::to_string(k.margin_k13) + ")");
  return sol;
}

std::vector<double> row_at(const Field& f, double t) {
  const auto& g = f.grid();
  const double pos = std::clamp(t / g.dt(), 0.0, static_cast<double>(g.nt - 1));
  const auto k0 = std::min(static_cast<std::size_t>(pos), g.nt - 2);
  const double w = pos - static_cast<double>(k0);
  std::vector<double> out(g.nx);
  for (std::size_t j = 0; j < g.nx; ++j) out[j] = (1.0 - w) * f(k0, j) + w * f(k0 + 1, j);
  return out;
}

double settle_time(const std::vector<double>& times, const std::vector<double>& series,
                   double tol) {
  if (times.empty() || times.size() != series.size()) {
    throw Error(ErrorKind::InvalidArgument, "settle_time needs matching non-empty series");
  }
  std::size_t first = series.size();
  while (first > 0 && std::abs(series[first - 1]) <= tol) --first;
  return first == series.size() ? kInf : times[first];
}

ExtinctionReport verify_extinction(const ClosedLoopSolution& sol, double t_check, double tol) {
  const auto& g = sol.u.grid();
  if (t_check > g.horizon * (1.0 + 1e-12)) {
    throw Error(ErrorKind::InvalidArgument, "t_check beyond the horizon");
  }
  ExtinctionReport rep;
  rep.t_check = t_check;
  for (double x : row_at(sol.u, t_check)) rep.sup_u = std::max(rep.sup_u, std::abs(x));
  for (double x : row_at(sol.v, t_check)) rep.sup_v = std::max(rep.sup_v, std::abs(x));

  const auto times = g.t_nodes();
  std::vector<double> su(g.nt), sv(g.nt);
  for (std::size_t k = 0; k < g.nt; ++k) {
    double a = 0.0, b = 0.0;
    for (double x : sol.u.row(k)) a = std::max(a, std::abs(x));
    for (double x : sol.v.row(k)) b = std::max(b, std::abs(x));
    su[k] = a;
    sv[k] = b;
  }
  rep.u_left_settles = settle_time(times, sol.u.column(0), tol);
  rep.v_right_settles = settle_time(times, sol.v.column(g.nx - 1), tol);
  rep.u_settles = settle_time(times, su, tol);
  rep.v_settles = settle_time(times, sv, tol);
  return rep;
}

}  // namespace hypstab::quasilinear
