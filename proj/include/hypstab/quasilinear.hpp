#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hypstab/feedback.hpp"
#include "hypstab/field.hpp"
#include "hypstab/profile.hpp"

// Closed-loop 2x2 diagonal system
//   u_t + lambda(u,v) u_x = 0,   v_t + mu(u,v) v_x = 0   on [0,L],
// with finite-time feedback at the boundaries, solved as the fixed point of the
// frozen-coefficient transport operator.
namespace hypstab::quasilinear {

using SpeedFn = std::function<double(double u, double v)>;

struct DiagonalSystem {
  SpeedFn lambda;
  SpeedFn mu;
  double speed_floor = 1.0;  // c: mu <= -c < 0 < c <= lambda on the working box

  // Optional exact partials. Missing ones are replaced by central differences.
  SpeedFn dlambda_du, dlambda_dv, dmu_du, dmu_dv;
};

// lambda = l0 + lu u + lv v,  mu = m0 + mu_u u + mu_v v, with exact partials.
DiagonalSystem affine_system(double l0, double lu, double lv, double m0, double mu_u, double mu_v,
                             double speed_floor);

// u(t,0) = h(v(t,0), t). d1, d2 bound |dh/dv| and |dh/dt|; h(0,t) = 0 for t >= settle_time.
struct BoundaryMap {
  std::function<double(double v, double t)> h;
  double d1 = 0.0;
  double d2 = 0.0;
  double settle_time = 0.0;  // T_h
};

struct BoxBounds {
  double m1 = 0.0;  // sup |lambda|, |mu|
  double m2 = 0.0;  // sup of the four first partials
};

// Dense sampling of [-u_radius, u_radius] x [-v_radius, v_radius].
BoxBounds box_bounds(const DiagonalSystem& system, double u_radius, double v_radius,
                     int resolution = 200);

struct ConstantsLedger {
  bool one_control = false;
  double c1 = 0.0;
  double c2 = 0.0;
  double c1_prime = 0.0;
  double c3 = 0.0;           // +inf when M2 = 0
  double c3_prime = 0.0;     // Lipschitz bound of the feedback-driven component
  double c3_dblprime = 0.0;  // one-control only
  double d1 = 0.0;
  double d2 = 0.0;
  double settle_time = 0.0;  // T_h
  double horizon = 0.0;      // T
  double t_star = 0.0;       // C1^(1-g) / ((1-g) K)
  double m1 = 0.0;
  double m2 = 0.0;
  double gain = 1.0;
  double exponent = 0.5;
  double speed_floor = 1.0;
  double length = 1.0;
};

struct LedgerOptions {
  double length = 1.0;    // L; every 1/c becomes L/c
  int resolution = 200;   // box sampling per axis
};

// Two-control ledger when `map` is null, one-control ledger otherwise.
// Throws BoxEvaluationFailure when lambda or mu is not finite on the box.
ConstantsLedger build_ledger(const DiagonalSystem& system, double c1, double c2,
                             const feedback::PowerFeedback& fb, const BoundaryMap* map = nullptr,
                             const LedgerOptions& options = {});

struct ConditionCheck {
  bool holds = false;
  double margin = 0.0;  // (left side) * 2e for the two-control condition
};

struct OneControlCheck {
  bool k12 = false;
  bool k13 = false;
  double margin_k12 = 0.0;  // C3' / C3
  double margin_k13 = 0.0;  // C3'' / C3
  bool holds() const { return k12 && k13; }
};

// T M2 max(1,M1) max(K C1^g / c, C2) <= 1/(2e)
ConditionCheck check_two_control(const ConstantsLedger& ledger);
// C3' <= C3 and C3'' <= C3
OneControlCheck check_one_control(const ConstantsLedger& ledger);

enum class InitialGuess { data_extension, zero };

inline constexpr double kFrozenStepCells = 4.0;

struct PicardOptions {
  double tol = 1e-8;
  std::size_t max_iter = 50;
  double step = 0.0;         // characteristic step, 0 = kFrozenStepCells * dx / sup speed
  double tol_compat = 1e-8;
  bool box_extension = false;  // continue lambda, mu by their values on the box boundary
  double box_slack = 1e-2;     // relative tolerance on the working box
  std::optional<double> c1;    // default: sup of the initial data
  std::optional<double> c2;    // default: Lipschitz constant of the initial data
  InitialGuess initial_guess = InitialGuess::data_extension;
  std::function<void(std::size_t iteration, const Field& u, const Field& v)> observer;
};

struct ClosedLoopSolution {
  Field u;
  Field v;
  std::size_t iterations = 0;
  std::vector<double> residual_history;
  ConstantsLedger ledger;
  std::vector<std::string> warnings;
};

// Left boundary of the u-equation: a feedback trace or a boundary map on the previous iterate.
struct LeftBoundary {
  std::optional<feedback::FeedbackTrace> trace;
  const BoundaryMap* map = nullptr;
};

// One application of the fixed-point operator: freeze lambda, mu at (u~, v~) and
// solve the two transport problems.
class ClosedLoopOperator {
 public:
  ClosedLoopOperator(const DiagonalSystem& system, Profile u0, Profile v0, LeftBoundary left,
                     feedback::FeedbackTrace right, UniformGrid grid, PicardOptions options,
                     double u_radius, double v_radius);

  std::pair<Field, Field> apply(const Field& u_tilde, const Field& v_tilde) const;
  std::pair<Field, Field> initial_guess() const;

  // y(t) = h(v~(t,0), t) for the one-control case.
  Profile left_trace(const Field& v_tilde) const;

 private:
  DiagonalSystem system_;
  Profile u0_, v0_;
  LeftBoundary left_;
  feedback::FeedbackTrace right_;
  UniformGrid grid_;
  PicardOptions options_;
  double u_radius_, v_radius_;
};

ClosedLoopSolution picard_two_control(const DiagonalSystem& system, const Profile& u0,
                                      const Profile& v0, const feedback::PowerFeedback& fb,
                                      const UniformGrid& grid, const PicardOptions& options = {});

// Throws CompatibilityViolation unless u0(0) = h(v0(0), 0) within options.tol_compat.
ClosedLoopSolution picard_one_control(const DiagonalSystem& system, const Profile& u0,
                                      const Profile& v0, const BoundaryMap& map,
                                      const feedback::PowerFeedback& fb, const UniformGrid& grid,
                                      const PicardOptions& options = {});

struct ExtinctionReport {
  double t_check = 0.0;
  double sup_u = 0.0;  // sup_x |u(t_check, .)|
  double sup_v = 0.0;
  // First times after which the quantity stays in [-tol, tol] up to the horizon (+inf if never).
  double u_left_settles = 0.0;   // u(., 0)
  double v_right_settles = 0.0;  // v(., L)
  double u_settles = 0.0;        // sup_x |u|
  double v_settles = 0.0;
};

ExtinctionReport verify_extinction(const ClosedLoopSolution& sol, double t_check, double tol);

// First grid time after which every sample of `series` stays within tol (+inf if none).
double settle_time(const std::vector<double>& times, const std::vector<double>& series, double tol);

// Row of the field at time t by linear interpolation between time levels.
std::vector<double> row_at(const Field& f, double t);

}  // namespace hypstab::quasilinear
