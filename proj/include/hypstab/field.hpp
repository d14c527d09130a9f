#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

namespace hypstab {

// Uniform tensor grid on [0, horizon] x [0, length]; nt time nodes, nx space nodes.
struct UniformGrid {
  double horizon = 1.0;
  double length = 1.0;
  std::size_t nt = 2;
  std::size_t nx = 2;

  double dt() const { return horizon / static_cast<double>(nt - 1); }
  double dx() const { return length / static_cast<double>(nx - 1); }
  double t(std::size_t k) const;
  double x(std::size_t j) const;
  std::vector<double> t_nodes() const;
  std::vector<double> x_nodes() const;

  // Throws InvalidArgument unless horizon, length > 0 and nt, nx >= 2.
  void validate() const;
};

// Row-major samples y(t_k, x_j); row k is one time level.
class Field {
 public:
  Field() = default;
  explicit Field(UniformGrid grid, double fill = 0.0);

  const UniformGrid& grid() const { return grid_; }
  std::size_t nt() const { return grid_.nt; }
  std::size_t nx() const { return grid_.nx; }

  double& operator()(std::size_t k, std::size_t j) { return values_[k * grid_.nx + j]; }
  double operator()(std::size_t k, std::size_t j) const { return values_[k * grid_.nx + j]; }

  std::span<double> row(std::size_t k) { return {values_.data() + k * grid_.nx, grid_.nx}; }
  std::span<const double> row(std::size_t k) const {
    return {values_.data() + k * grid_.nx, grid_.nx};
  }
  std::vector<double> column(std::size_t j) const;

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  // Bilinear interpolation, clamped to the grid rectangle.
  double sample(double t, double x) const {
    std::size_t k, j;
    double wt, wx;
    locate(t * t_scale_, grid_.nt, k, wt);
    locate(x * x_scale_, grid_.nx, j, wx);
    const double* r0 = values_.data() + k * grid_.nx + j;
    const double* r1 = r0 + grid_.nx;
    const double a = r0[0] + wx * (r0[1] - r0[0]);
    const double b = r1[0] + wx * (r1[1] - r1[0]);
    return a + wt * (b - a);
  }
  // Linear interpolation of row k in x (clamped).
  double sample_row(std::size_t k, double x) const;

  double sup_norm() const;
  bool all_finite() const;

 private:
  // Cell index and fraction of a coordinate already scaled to node units (clamped).
  static void locate(double s, std::size_t n, std::size_t& i, double& w) {
    const double last = static_cast<double>(n - 1);
    if (!(s > 0.0)) {
      i = 0;
      w = 0.0;
    } else if (s >= last) {
      i = n - 2;
      w = 1.0;
    } else {
      i = std::min(static_cast<std::size_t>(s), n - 2);
      w = s - static_cast<double>(i);
    }
  }

  UniformGrid grid_;
  std::vector<double> values_;
  double t_scale_ = 1.0;
  double x_scale_ = 1.0;
};

// Linear interpolation of samples on the uniform nodes of [0, span_length] (clamped).
double interpolate_uniform(std::span<const double> samples, double span_length, double x);

// max |a - b| over all nodes; grids must match.
double sup_distance(const Field& a, const Field& b);
// Trapezoidal L1 norm of a - b over [0,T] x [0,L].
double l1_distance(const Field& a, const Field& b);

// Discrete Lipschitz constant in the metric |dt| + |dx|. Any pair of nodes is
// joined by a monotone staircase of adjacent nodes, so the max over adjacent
// pairs equals the max over all pairs.
double discrete_lipschitz(const Field& f);

}  // namespace hypstab
