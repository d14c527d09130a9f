#include "hypstab/feedback.hpp"

#include <cmath>
#include <string>

#include "hypstab/error.hpp"

namespace hypstab::feedback {

PowerFeedback::PowerFeedback(double gain, double exponent) : gain(gain), exponent(exponent) {
  if (!(gain > 0.0) || !std::isfinite(gain)) {
    throw Error(ErrorKind::InvalidArgument, "feedback gain must be positive");
  }
  if (!(exponent > 0.0 && exponent < 1.0)) {
    throw Error(ErrorKind::InvalidArgument,
                "feedback exponent must lie strictly inside (0, 1), got " +
                    std::to_string(exponent));
  }
}

double extinction_time(double initial, const PowerFeedback& params) {
  const double q = 1.0 - params.exponent;
  return std::pow(std::abs(initial), q) / (q * params.gain);
}

FeedbackTrace::FeedbackTrace(double initial, PowerFeedback params)
    : initial_(initial), params_(PowerFeedback(params.gain, params.exponent)) {
  if (!std::isfinite(initial)) throw Error(ErrorKind::InvalidArgument, "initial value not finite");
  extinction_ = extinction_time(initial_, params_);
}

double FeedbackTrace::operator()(double t) const {
  if (initial_ == 0.0 || t >= extinction_) return 0.0;
  if (t <= 0.0) return initial_;
  const double q = 1.0 - params_.exponent;
  const double base = std::pow(std::abs(initial_), q) - q * params_.gain * t;
  if (base <= 0.0) return 0.0;
  return std::copysign(std::pow(base, 1.0 / q), initial_);
}

double FeedbackTrace::derivative(double t) const {
  const double w = (*this)(t);
  if (w == 0.0) return 0.0;
  return -params_.gain * std::copysign(std::pow(std::abs(w), params_.exponent), w);
}

std::pair<double, double> trace_bounds(double c1, const PowerFeedback& params) {
  if (c1 < 0.0) throw Error(ErrorKind::InvalidArgument, "C1 must be non-negative");
  return {c1, params.gain * std::pow(c1, params.exponent)};
}

}  // namespace hypstab::feedback
