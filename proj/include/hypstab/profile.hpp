#pragma once

#include <functional>
#include <vector>

namespace hypstab {

// A Lipschitz function of one variable (an initial profile or a boundary trace)
// together with its Lipschitz constant.
class Profile {
 public:
  using Fn = std::function<double(double)>;

  Profile() : Profile(constant(0.0)) {}
  Profile(Fn fn, double lipschitz) : fn_(std::move(fn)), lipschitz_(lipschitz) {}

  static Profile constant(double value);
  // offset + amplitude * sin(2 pi frequency xi / length + phase) with
  // xi = clamp(x, w, length - w), w = flatten * length. The profile is flat
  // near both endpoints.
  static Profile flattened_sine(double offset, double amplitude, double frequency, double phase,
                                double flatten, double length);
  // Piecewise linear through samples on uniform nodes of [0, length].
  static Profile samples(std::vector<double> values, double length);

  double operator()(double x) const { return fn_(x); }
  double lipschitz() const { return lipschitz_; }
  const Fn& fn() const { return fn_; }

  // max |y| over n uniform samples of [a, b].
  double sampled_sup(double a, double b, int n = 2001) const;

 private:
  Fn fn_;
  double lipschitz_ = 0.0;
};

}  // namespace hypstab
