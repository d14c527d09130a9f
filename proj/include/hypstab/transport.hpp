#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "hypstab/field.hpp"
#include "hypstab/profile.hpp"

// Linear transport  y_t + a(t,x) y_x = 0  on [0,T] x [0,L] solved by backward
// characteristics. A positive speed takes boundary data at x = 0, a negative
// speed at x = L.
namespace hypstab::transport {

struct Domain {
  double horizon = 1.0;      // T
  double length = 1.0;       // L
  double speed_floor = 1.0;  // c, with |a| >= c on the domain

  void validate() const;
};

enum class Direction { positive, negative };
enum class EntranceClass { I, J, P };

const char* to_string(EntranceClass cls);

class Coefficient {
 public:
  using Fn = std::function<double(double t, double x)>;

  // `lipschitz` is the uniform-in-time Lipschitz constant in x. `dx_speed`
  // (optional) is the x-derivative, needed only by entrance_derivatives.
  static Coefficient from_function(Fn speed, Direction direction, double sup_norm,
                                   double lipschitz, Fn dx_speed = {});
  // A tabulated speed, bilinearly interpolated; metadata is measured from the table.
  static Coefficient from_field(Field speed, Direction direction);

  double operator()(double t, double x) const;
  double dx(double t, double x) const;
  bool has_dx() const { return static_cast<bool>(dx_) || table_ != nullptr; }

  Direction direction() const { return direction_; }
  double sup_norm() const { return sup_norm_; }
  double lipschitz() const { return lipschitz_; }
  bool extended() const { return extended_; }
  const Field* table() const { return table_.get(); }

 private:
  friend Coefficient extend_coefficient(const Coefficient&, const Domain&);
  friend class SpeedView;

  // Maps (t, x) into [0,T] x [0,L] when the extension is active.
  void fold(double& t, double& x) const;

  Fn fn_;
  Fn dx_;
  std::shared_ptr<const Field> table_;
  Direction direction_ = Direction::positive;
  double sup_norm_ = 0.0;
  double lipschitz_ = 0.0;
  bool extended_ = false;
  double ext_horizon_ = 0.0;
  double ext_length_ = 0.0;
};

// Even reflection about x = L, 2L-periodic in x, frozen in t outside [0,T].
// Preserves the sup norm, the Lipschitz constant in x and the lower bound.
Coefficient extend_coefficient(const Coefficient& a, const Domain& domain);

struct CharacteristicRecord {
  double entrance_time = 0.0;
  EntranceClass entrance_class = EntranceClass::I;
  double foot = 0.0;  // phi(0,t,x) on I and P, the inflow boundary point on J
  std::vector<std::pair<double, double>> path;  // (s, phi(s,t,x)), s decreasing from t
};

// Backward RK4 from s = t toward s = 0; a boundary crossing is located by
// bisection to step * 1e-6 and finished with one secant step inside the bracket.
// Throws StepTooLarge when step * sup|a| > L.
CharacteristicRecord integrate_characteristic(const Coefficient& a, double t, double x,
                                              const Domain& domain, double step);

std::pair<double, EntranceClass> entrance_time(const Coefficient& a, double t, double x,
                                               const Domain& domain, double step);

// Closed-form (d/dt e, d/dx e) at a point of J; throws NotInJ elsewhere.
std::pair<double, double> entrance_derivatives(const Coefficient& a, double t, double x,
                                               const Domain& domain, double step);

// The flow of the extended coefficient, phi(s, t, x); s may lie on either side of t.
double flow(const Coefficient& a, double s, double t, double x, const Domain& domain,
            double step);

struct SolveOptions {
  double step = 0.0;           // characteristic step; 0 selects dx / sup|a|
  double tol_compat = 1e-8;    // allowed |y_bnd(0) - y0(inflow)|
};

// Evaluates y = y_bnd(e) on J and y = y0(phi(0,t,x)) on I and P at every node.
// The node loop runs under OpenMP.
Field solve_linear_transport(const Coefficient& a, const Profile& y0, const Profile& y_bnd,
                             const UniformGrid& grid, const SolveOptions& options = {});

// Single-threaded reference built on the public entrance_time/integrate_characteristic
// calls; kept for testing the parallel kernel.
Field solve_linear_transport_serial(const Coefficient& a, const Profile& y0,
                                    const Profile& y_bnd, const UniformGrid& grid,
                                    const SolveOptions& options = {});

// K = max(1, |a|_inf) exp(L T): Lipschitz constant of the flow.
double flow_lipschitz_constant(const Coefficient& a, const Domain& domain);
// K / c: Lipschitz constant of the entrance time.
double entrance_lipschitz_constant(const Coefficient& a, const Domain& domain);
// M = max(L_l / c, L_0) max(1, |a|_inf) exp(L T).
double lipschitz_bound(const Coefficient& a, double boundary_lipschitz, double initial_lipschitz,
                       const Domain& domain);

// Characteristic step used by the solvers when none is given.
double default_step(const Coefficient& a, const UniformGrid& grid);

}  // namespace hypstab::transport
