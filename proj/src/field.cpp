#include "hypstab/field.hpp"

#include <algorithm>
#include <cmath>

#include "hypstab/error.hpp"

namespace hypstab {

double UniformGrid::t(std::size_t k) const {
  return k + 1 == nt ? horizon : horizon * static_cast<double>(k) / static_cast<double>(nt - 1);
}

double UniformGrid::x(std::size_t j) const {
  return j + 1 == nx ? length : length * static_cast<double>(j) / static_cast<double>(nx - 1);
}

std::vector<double> UniformGrid::t_nodes() const {
  std::vector<double> out(nt);
  for (std::size_t k = 0; k < nt; ++k) out[k] = t(k);
  return out;
}

std::vector<double> UniformGrid::x_nodes() const {
  std::vector<double> out(nx);
  for (std::size_t j = 0; j < nx; ++j) out[j] = x(j);
  return out;
}

void UniformGrid::validate() const {
  if (!(horizon > 0.0) || !(length > 0.0) || nt < 2 || nx < 2 || !std::isfinite(horizon) ||
      !std::isfinite(length)) {
    throw Error(ErrorKind::InvalidArgument,
                "grid needs horizon > 0, length > 0, nt >= 2 and nx >= 2");
  }
}

Field::Field(UniformGrid grid, double fill)
    : grid_(grid),
      values_(grid.nt * grid.nx, fill),
      t_scale_(static_cast<double>(grid.nt - 1) / grid.horizon),
      x_scale_(static_cast<double>(grid.nx - 1) / grid.length) {
  grid_.validate();
}

std::vector<double> Field::column(std::size_t j) const {
  std::vector<double> out(grid_.nt);
  for (std::size_t k = 0; k < grid_.nt; ++k) out[k] = (*this)(k, j);
  return out;
}

namespace {

// Cell index and fraction for a clamped coordinate on n uniform nodes over [0, span].
inline void locate(double x, double span, std::size_t n, std::size_t& i, double& w) {
  const double h = span / static_cast<double>(n - 1);
  double s = x / h;
  if (!(s > 0.0)) {
    i = 0;
    w = 0.0;
    return;
  }
  const double last = static_cast<double>(n - 1);
  if (s >= last) {
    i = n - 2;
    w = 1.0;
    return;
  }
  i = static_cast<std::size_t>(s);
  if (i > n - 2) i = n - 2;
  w = s - static_cast<double>(i);
}

}  // namespace

double Field::sample_row(std::size_t k, double x) const {
  return interpolate_uniform(row(k), grid_.length, x);
}

double Field::sup_norm() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool Field::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double interpolate_uniform(std::span<const double> samples, double span_length, double x) {
  if (samples.size() == 1) return samples[0];
  std::size_t i;
  double w;
  locate(x, span_length, samples.size(), i, w);
  return samples[i] + w * (samples[i + 1] - samples[i]);
}

namespace {
void require_same_grid(const Field& a, const Field& b) {
  const auto& ga = a.grid();
  const auto& gb = b.grid();
  if (ga.nt != gb.nt || ga.nx != gb.nx || ga.horizon != gb.horizon || ga.length != gb.length) {
    throw Error(ErrorKind::InvalidArgument, "fields live on different grids");
  }
}
}  // namespace

double sup_distance(const Field& a, const Field& b) {
  require_same_grid(a, b);
  double m = 0.0;
  auto va = a.values();
  auto vb = b.values();
  for (std::size_t i = 0; i < va.size(); ++i) m = std::max(m, std::abs(va[i] - vb[i]));
  return m;
}

double l1_distance(const Field& a, const Field& b) {
  require_same_grid(a, b);
  const auto& g = a.grid();
  double total = 0.0;
  for (std::size_t k = 0; k < g.nt; ++k) {
    const double wt = (k == 0 || k + 1 == g.nt) ? 0.5 : 1.0;
    for (std::size_t j = 0; j < g.nx; ++j) {
      const double wx = (j == 0 || j + 1 == g.nx) ? 0.5 : 1.0;
      total += wt * wx * std::abs(a(k, j) - b(k, j));
    }
  }
  return total * g.dt() * g.dx();
}

double discrete_lipschitz(const Field& f) {
  const auto& g = f.grid();
  const double inv_dt = 1.0 / g.dt();
  const double inv_dx = 1.0 / g.dx();
  double m = 0.0;
  for (std::size_t k = 0; k < g.nt; ++k) {
    for (std::size_t j = 0; j < g.nx; ++j) {
      if (j + 1 < g.nx) m = std::max(m, std::abs(f(k, j + 1) - f(k, j)) * inv_dx);
      if (k + 1 < g.nt) m = std::max(m, std::abs(f(k + 1, j) - f(k, j)) * inv_dt);
    }
  }
  return m;
}

}  // namespace hypstab
