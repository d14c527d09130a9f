#include "hypstab/profile.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include "hypstab/error.hpp"
#include "hypstab/field.hpp"

namespace hypstab {

Profile Profile::constant(double value) {
  return Profile([value](double) { return value; }, 0.0);
}

Profile Profile::flattened_sine(double offset, double amplitude, double frequency, double phase,
                                double flatten, double length) {
  if (!(length > 0.0) || flatten < 0.0 || flatten >= 0.5) {
    throw Error(ErrorKind::InvalidArgument, "flattened sine needs length > 0, 0 <= flatten < 0.5");
  }
  const double w = flatten * length;
  const double k = 2.0 * std::numbers::pi * frequency / length;
  auto fn = [=](double x) {
    const double xi = std::clamp(x, w, length - w);
    return offset + amplitude * std::sin(k * xi + phase);
  };
  return Profile(fn, std::abs(amplitude * k));
}

Profile Profile::samples(std::vector<double> values, double length) {
  if (values.empty()) throw Error(ErrorKind::InvalidArgument, "sampled profile needs values");
  double lip = 0.0;
  if (values.size() > 1) {
    const double h = length / static_cast<double>(values.size() - 1);
    for (std::size_t i = 1; i < values.size(); ++i) {
      lip = std::max(lip, std::abs(values[i] - values[i - 1]) / h);
    }
  }
  auto data = std::make_shared<const std::vector<double>>(std::move(values));
  auto fn = [data, length](double x) { return interpolate_uniform(*data, length, x); };
  return Profile(fn, lip);
}

double Profile::sampled_sup(double a, double b, int n) const {
  double m = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    m = std::max(m, std::abs(fn_(x)));
  }
  return m;
}

}  // namespace hypstab
