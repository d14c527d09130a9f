#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hypstab/error.hpp"
#include "hypstab/field.hpp"
#include "hypstab/network.hpp"
#include "hypstab/quasilinear.hpp"
#include "hypstab/scenario.hpp"

namespace hypstab::cli {

enum ExitCode : int { kSuccess = 0, kConditionFailure = 2, kNonConvergence = 3, kIoFailure = 4 };

int exit_code_for(ErrorKind kind);

struct Overrides {
  std::optional<std::size_t> grid_nx;
  std::optional<double> tol;
  std::optional<double> horizon;
};

void apply_overrides(scenario::Scenario& s, const Overrides& o);

struct EdgeLedger {
  int edge = 0;
  bool two_control = true;
  quasilinear::ConstantsLedger ledger;
  bool holds = false;
  double margin_w1 = 0.0;
  double margin_k12 = 0.0;
  double margin_k13 = 0.0;
};

struct VerifyReport {
  std::vector<EdgeLedger> edges;
  bool all_pass = true;
};

// A priori ledgers: multiple-node edges use the node map with zero upstream traces (D2 = 0).
VerifyReport verify(const scenario::Scenario& s);
std::string format_verify(const VerifyReport& r);
nlohmann::json to_json(const VerifyReport& r);
nlohmann::json to_json(const quasilinear::ConstantsLedger& l);

// Time at which the theory guarantees extinction: p max l / c + t* for two-control
// networks, 2 L / c + t* for a single edge with one control.
double extinction_bound(const scenario::Scenario& s);
double default_horizon(const scenario::Scenario& s);
// nt from the grid section, resolving a CFL request against the horizon.
std::size_t resolve_nt(const scenario::Scenario& s, double horizon);

struct EdgeRun {
  int edge = 0;
  bool two_control = true;
  Field u, v;
  std::optional<Field> depth, velocity;  // Saint-Venant only
  std::size_t iterations = 0;
  std::vector<double> residual_history;
  quasilinear::ConstantsLedger ledger;
  double margin_w1 = 0.0, margin_k12 = 0.0, margin_k13 = 0.0;
  bool conditions_hold = false;
  double extinction_time = 0.0;
  std::vector<std::string> warnings;
};

struct RunResult {
  std::vector<EdgeRun> edges;
  std::vector<network::NodeResidual> nodes;
  std::vector<double> times;
  double horizon = 0.0;
  double speed_floor = 0.0;
  double t_star = 0.0;
  double bound = 0.0;
  int depth = 1;
  double extinction_time = 0.0;
};

RunResult simulate(const scenario::Scenario& s);

// edge_<i>_{u,v}.csv (and _H, _V), boundary_traces.csv, report.json. Files written
// before a failure are removed.
std::vector<std::filesystem::path> write_artifacts(const RunResult& r, const scenario::Scenario& s,
                                                   const std::filesystem::path& out);
nlohmann::json report_json(const RunResult& r, const scenario::Scenario& s);

struct CompareRow {
  std::size_t nx = 0;
  double dx = 0.0;
  double l1 = 0.0;    // max over t of the spatial L1 distance, u and v summed
  double linf = 0.0;  // sup distance, max of u and v
  std::size_t upwind_steps = 0;
};

// Characteristics vs upwind on a single edge, one row per refinement level.
std::vector<CompareRow> compare(const scenario::Scenario& s);
std::string format_compare(const std::vector<CompareRow>& rows);
nlohmann::json to_json(const std::vector<CompareRow>& rows);

// Entry point of the hypstab tool; returns the process exit code.
int run(int argc, char** argv);

}  // namespace hypstab::cli
