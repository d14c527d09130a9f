#pragma once

#include <utility>

// Boundary law  dw/dt = -K sgn(w) |w|^gamma,  0 < gamma < 1, which drives w to
// zero in finite time. Only the closed form is used by the solvers.
namespace hypstab::feedback {

struct PowerFeedback {
  double gain = 1.0;      // K > 0
  double exponent = 0.5;  // gamma in (0, 1)

  PowerFeedback() = default;
  PowerFeedback(double gain, double exponent);  // validates
};

class FeedbackTrace {
 public:
  FeedbackTrace(double initial, PowerFeedback params);

  double initial() const { return initial_; }
  const PowerFeedback& params() const { return params_; }
  double extinction() const { return extinction_; }

  // sgn(w0) (|w0|^(1-g) - (1-g) K t)^(1/(1-g)) before extinction, 0 after.
  double operator()(double t) const;
  // d/dt of the trace, i.e. -K sgn(w) |w|^gamma.
  double derivative(double t) const;

 private:
  double initial_;
  PowerFeedback params_;
  double extinction_;
};

inline double eval_trace(const FeedbackTrace& trace, double t) { return trace(t); }

// |w0|^(1-g) / ((1-g) K)
double extinction_time(double initial, const PowerFeedback& params);
inline double extinction_time(const FeedbackTrace& trace) { return trace.extinction(); }

// (C1, K C1^gamma): sup and slope bounds for any trace started in [-C1, C1].
std::pair<double, double> trace_bounds(double c1, const PowerFeedback& params);

}  // namespace hypstab::feedback
