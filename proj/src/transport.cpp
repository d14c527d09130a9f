#include "hypstab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hypstab/error.hpp"

namespace hypstab::transport {

void Domain::validate() const {
  if (!(horizon > 0.0) || !(length > 0.0) || !(speed_floor > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "domain needs T > 0, L > 0 and c > 0");
  }
}

const char* to_string(EntranceClass cls) {
  switch (cls) {
    case EntranceClass::I: return "I";
    case EntranceClass::J: return "J";
    case EntranceClass::P: return "P";
  }
  return "?";
}

namespace {

inline double reflect(double x, double length) {
  if (x >= 0.0 && x <= length) return x;
  const double period = 2.0 * length;
  double y = std::fmod(x, period);
  if (y < 0.0) y += period;
  return y > length ? period - y : y;
}

}  // namespace

Coefficient Coefficient::from_function(Fn speed, Direction direction, double sup_norm,
                                       double lipschitz, Fn dx_speed) {
  if (!speed) throw Error(ErrorKind::InvalidArgument, "coefficient needs a callable");
  if (!(sup_norm > 0.0) || lipschitz < 0.0) {
    throw Error(ErrorKind::InvalidArgument, "coefficient needs sup norm > 0, Lipschitz >= 0");
  }
  Coefficient a;
  a.fn_ = std::move(speed);
  a.dx_ = std::move(dx_speed);
  a.direction_ = direction;
  a.sup_norm_ = sup_norm;
  a.lipschitz_ = lipschitz;
  return a;
}

Coefficient Coefficient::from_field(Field speed, Direction direction) {
  if (!speed.all_finite()) throw Error(ErrorKind::InvalidArgument, "tabulated speed not finite");
  Coefficient a;
  a.direction_ = direction;
  a.sup_norm_ = speed.sup_norm();
  const double inv_dx = 1.0 / speed.grid().dx();
  double lip = 0.0;
  for (std::size_t k = 0; k < speed.nt(); ++k) {
    auto r = speed.row(k);
    for (std::size_t j = 1; j < r.size(); ++j) lip = std::max(lip, std::abs(r[j] - r[j - 1]) * inv_dx);
  }
  a.lipschitz_ = lip;
  a.table_ = std::make_shared<const Field>(std::move(speed));
  return a;
}

void Coefficient::fold(double& t, double& x) const {
  if (!extended_) return;
  t = std::clamp(t, 0.0, ext_horizon_);
  x = reflect(x, ext_length_);
}

double Coefficient::operator()(double t, double x) const {
  fold(t, x);
  return table_ ? table_->sample(t, x) : fn_(t, x);
}

double Coefficient::dx(double t, double x) const {
  double sign = 1.0;
  if (extended_) {
    // Even reflection flips the sign of the x-derivative on odd half-periods.
    const double period = 2.0 * ext_length_;
    double y = std::fmod(x, period);
    if (y < 0.0) y += period;
    if (y > ext_length_) sign = -1.0;
  }
  fold(t, x);
  if (table_) {
    const auto& g = table_->grid();
    const double h = g.dx();
    const double xl = std::max(0.0, x - 0.5 * h);
    const double xr = std::min(g.length, x + 0.5 * h);
    return sign * (table_->sample(t, xr) - table_->sample(t, xl)) / (xr - xl);
  }
  if (!dx_) throw Error(ErrorKind::InvalidArgument, "coefficient has no x-derivative");
  return sign * dx_(t, x);
}

Coefficient extend_coefficient(const Coefficient& a, const Domain& domain) {
  domain.validate();
  Coefficient ext = a;
  ext.extended_ = true;
  ext.ext_horizon_ = domain.horizon;
  ext.ext_length_ = domain.length;
  return ext;
}

// Positive-direction view of the extended coefficient in reduced coordinates:
// for a negative speed, x' = L - x and a'(t, x') = -a(t, L - x').
class SpeedView {
 public:
  SpeedView(const Coefficient& a, double horizon, double length)
      : fn_(a.fn_ ? &a.fn_ : nullptr),
        table_(a.table_.get()),
        flip_(a.direction_ == Direction::negative),
        horizon_(horizon),
        length_(length) {}

  double operator()(double t, double x) const {
    if (t < 0.0) t = 0.0;
    if (t > horizon_) t = horizon_;
    x = reflect(x, length_);
    if (flip_) x = length_ - x;
    const double v = table_ ? table_->sample(t, x) : (*fn_)(t, x);
    return flip_ ? -v : v;
  }

  bool flipped() const { return flip_; }
  double length() const { return length_; }
  double to_reduced(double x) const { return flip_ ? length_ - x : x; }
  double to_physical(double x) const { return flip_ ? length_ - x : x; }

 private:
  const Coefficient::Fn* fn_;
  const Field* table_;
  bool flip_;
  double horizon_;
  double length_;
};

namespace {

constexpr double kBisectionRelTol = 1e-6;

struct Trace {
  double entrance = 0.0;
  EntranceClass cls = EntranceClass::I;
  double foot = 0.0;  // reduced coordinates
};

// One RK4 step of d phi / ds = a(s, phi) from (s, phi) over signed step h.
template <class Speed>
inline double rk4(const Speed& a, double s, double phi, double h) {
  const double k1 = a(s, phi);
  const double k2 = a(s + 0.5 * h, phi + 0.5 * h * k1);
  const double k3 = a(s + 0.5 * h, phi + 0.5 * h * k2);
  const double k4 = a(s + h, phi + h * k3);
  return phi + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Backward characteristic in reduced coordinates (inflow at x = 0).
// `path`, when non-null, receives reduced (s, phi) samples.
template <class Speed>
Trace trace_back(const Speed& a, double t, double x, double step,
                 std::vector<std::pair<double, double>>* path) {
  Trace out;
  if (path) path->emplace_back(t, x);
  if (t <= 0.0) {
    out.entrance = 0.0;
    out.foot = x;
    out.cls = x <= 0.0 ? EntranceClass::P : EntranceClass::I;
    return out;
  }
  if (x <= 0.0) {
    out.entrance = t;
    out.foot = 0.0;
    out.cls = EntranceClass::J;
    return out;
  }

  const auto n = static_cast<std::size_t>(std::ceil(t / step - 1e-12));
  const double h = t / static_cast<double>(n == 0 ? 1 : n);
  const double tol_bisect = h * kBisectionRelTol;
  const double tol_p = 10.0 * tol_bisect;

  double s = t;
  double phi = x;
  for (std::size_t i = 0; i < n; ++i) {
    const double s_next = (i + 1 == n) ? 0.0 : s - h;
    const double phi_next = rk4(a, s, phi, s_next - s);
    if (phi_next < 0.0) {
      // Bracket [lo, hi] with phi(lo) < 0 <= phi(hi).
      double lo = s_next, hi = s;
      double phi_lo = phi_next, phi_hi = phi;
      while (hi - lo > tol_bisect) {
        const double mid = 0.5 * (lo + hi);
        const double phi_mid = rk4(a, s, phi, mid - s);
        if (phi_mid < 0.0) {
          lo = mid;
          phi_lo = phi_mid;
        } else {
          hi = mid;
          phi_hi = phi_mid;
        }
      }
      double e = hi - (hi - lo) * phi_hi / (phi_hi - phi_lo);
      e = std::clamp(e, lo, hi);
      if (e < 0.0) e = 0.0;
      out.entrance = e;
      out.foot = 0.0;
      out.cls = e < tol_p ? EntranceClass::P : EntranceClass::J;
      if (path) path->emplace_back(e, 0.0);
      return out;
    }
    s = s_next;
    phi = phi_next;
    if (path) path->emplace_back(s, phi);
  }
  out.entrance = 0.0;
  out.foot = phi;
  out.cls = phi < tol_p ? EntranceClass::P : EntranceClass::I;
  return out;
}

void check_point(double t, double x, const Domain& domain) {
  const double slack = 1e-12 * std::max(1.0, domain.length);
  if (!(t >= 0.0 && t <= domain.horizon * (1.0 + 1e-12)) || !(x >= -slack) ||
      !(x <= domain.length + slack)) {
    throw Error(ErrorKind::InvalidArgument, "query point outside [0,T] x [0,L]");
  }
}

void check_step(const Coefficient& a, double step, double length) {
  if (!(step > 0.0)) throw Error(ErrorKind::InvalidArgument, "step must be positive");
  if (step * a.sup_norm() > length) {
    throw Error(ErrorKind::StepTooLarge,
                "one step at the maximal speed would cross the whole domain (step " +
                    std::to_string(step) + ")");
  }
}

double inflow_point(const Coefficient& a, double length) {
  return a.direction() == Direction::positive ? 0.0 : length;
}

}  // namespace

CharacteristicRecord integrate_characteristic(const Coefficient& a, double t, double x,
                                              const Domain& domain, double step) {
  domain.validate();
  check_point(t, x, domain);
  check_step(a, step, domain.length);
  t = std::min(t, domain.horizon);
  x = std::clamp(x, 0.0, domain.length);

  const SpeedView view(a, domain.horizon, domain.length);
  std::vector<std::pair<double, double>> reduced_path;
  const Trace tr = trace_back(view, t, view.to_reduced(x), step, &reduced_path);

  CharacteristicRecord rec;
  rec.entrance_time = tr.entrance;
  rec.entrance_class = tr.cls;
  rec.foot = tr.cls == EntranceClass::J ? inflow_point(a, domain.length)
                                        : view.to_physical(tr.foot);
  rec.path.reserve(reduced_path.size());
  for (const auto& [s, p] : reduced_path) rec.path.emplace_back(s, view.to_physical(p));
  return rec;
}

std::pair<double, EntranceClass> entrance_time(const Coefficient& a, double t, double x,
                                               const Domain& domain, double step) {
  domain.validate();
  check_point(t, x, domain);
  check_step(a, step, domain.length);
  t = std::min(t, domain.horizon);
  x = std::clamp(x, 0.0, domain.length);
  const SpeedView view(a, domain.horizon, domain.length);
  const Trace tr = trace_back(view, t, view.to_reduced(x), step, nullptr);
  return {tr.entrance, tr.cls};
}

std::pair<double, double> entrance_derivatives(const Coefficient& a, double t, double x,
                                               const Domain& domain, double step) {
  if (!a.has_dx()) throw Error(ErrorKind::InvalidArgument, "coefficient has no x-derivative");
  const CharacteristicRecord rec = integrate_characteristic(a, t, x, domain, step);
  if (rec.entrance_class != EntranceClass::J) {
    throw Error(ErrorKind::NotInJ, std::string("point is in class ") +
                                       to_string(rec.entrance_class));
  }
  const Coefficient ext = extend_coefficient(a, domain);
  // Trapezoid rule for the integral of d_x a along the stored path (s decreasing).
  double integral = 0.0;
  for (std::size_t i = 1; i < rec.path.size(); ++i) {
    const auto& [s0, p0] = rec.path[i - 1];
    const auto& [s1, p1] = rec.path[i];
    integral += 0.5 * (s0 - s1) * (ext.dx(s0, p0) + ext.dx(s1, p1));
  }
  const double damp = std::exp(-integral);
  const double a_in = ext(rec.entrance_time, inflow_point(a, domain.length));
  return {ext(t, x) * damp / a_in, -damp / a_in};
}

double flow(const Coefficient& a, double s, double t, double x, const Domain& domain,
            double step) {
  domain.validate();
  if (!(step > 0.0)) throw Error(ErrorKind::InvalidArgument, "step must be positive");
  const Coefficient ext = extend_coefficient(a, domain);
  const double span = s - t;
  if (span == 0.0) return x;
  const auto n = static_cast<std::size_t>(std::ceil(std::abs(span) / step - 1e-12));
  const double h = span / static_cast<double>(n == 0 ? 1 : n);
  double r = t;
  double phi = x;
  for (std::size_t i = 0; i < n; ++i) {
    const double r_next = (i + 1 == n) ? s : r + h;
    phi = rk4(ext, r, phi, r_next - r);
    r = r_next;
  }
  return phi;
}

namespace {

void check_compatibility(const Coefficient& a, const Profile& y0, const Profile& y_bnd,
                         const UniformGrid& grid, double tol) {
  const double inflow = inflow_point(a, grid.length);
  const double gap = std::abs(y_bnd(0.0) - y0(inflow));
  if (gap > tol) {
    throw Error(ErrorKind::CompatibilityViolation,
                "boundary and initial data disagree at the inflow corner by " +
                    std::to_string(gap));
  }
}

}  // namespace

double default_step(const Coefficient& a, const UniformGrid& grid) {
  return grid.dx() / a.sup_norm();
}

Field solve_linear_transport(const Coefficient& a, const Profile& y0, const Profile& y_bnd,
                             const UniformGrid& grid, const SolveOptions& options) {
  grid.validate();
  check_compatibility(a, y0, y_bnd, grid, options.tol_compat);
  const double step = options.step > 0.0 ? options.step : default_step(a, grid);
  check_step(a, step, grid.length);

  const SpeedView view(a, grid.horizon, grid.length);
  Field out(grid);
  const auto nx = static_cast<std::ptrdiff_t>(grid.nx);
  const auto total = static_cast<std::ptrdiff_t>(grid.nt * grid.nx);
  const double inflow = inflow_point(a, grid.length);

#pragma omp parallel for schedule(dynamic, 256)
  for (std::ptrdiff_t idx = 0; idx < total; ++idx) {
    const auto k = static_cast<std::size_t>(idx / nx);
    const auto j = static_cast<std::size_t>(idx % nx);
    const double t = grid.t(k);
    const double x = grid.x(j);
    const Trace tr = trace_back(view, t, view.to_reduced(x), step, nullptr);
    out(k, j) = tr.cls == EntranceClass::J ? y_bnd(tr.entrance)
                                           : y0(tr.cls == EntranceClass::P ? inflow
                                                                           : view.to_physical(tr.foot));
  }
  return out;
}

Field solve_linear_transport_serial(const Coefficient& a, const Profile& y0,
                                    const Profile& y_bnd, const UniformGrid& grid,
                                    const SolveOptions& options) {
  grid.validate();
  check_compatibility(a, y0, y_bnd, grid, options.tol_compat);
  const double step = options.step > 0.0 ? options.step : default_step(a, grid);
  const Domain domain{grid.horizon, grid.length, 1.0};
  const double inflow = inflow_point(a, grid.length);

  Field out(grid);
  for (std::size_t k = 0; k < grid.nt; ++k) {
    for (std::size_t j = 0; j < grid.nx; ++j) {
      const double t = grid.t(k);
      const double x = grid.x(j);
      const auto [e, cls] = entrance_time(a, t, x, domain, step);
      if (cls == EntranceClass::J) {
        out(k, j) = y_bnd(e);
      } else if (cls == EntranceClass::P) {
        out(k, j) = y0(inflow);
      } else {
        out(k, j) = y0(integrate_characteristic(a, t, x, domain, step).foot);
      }
    }
  }
  return out;
}

double flow_lipschitz_constant(const Coefficient& a, const Domain& domain) {
  return std::max(1.0, a.sup_norm()) * std::exp(a.lipschitz() * domain.horizon);
}

double entrance_lipschitz_constant(const Coefficient& a, const Domain& domain) {
  return flow_lipschitz_constant(a, domain) / domain.speed_floor;
}

double lipschitz_bound(const Coefficient& a, double boundary_lipschitz, double initial_lipschitz,
                       const Domain& domain) {
  return std::max(boundary_lipschitz / domain.speed_floor, initial_lipschitz) *
         flow_lipschitz_constant(a, domain);
}

}  // namespace hypstab::transport
