#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hypstab/feedback.hpp"
#include "hypstab/network.hpp"
#include "hypstab/profile.hpp"
#include "hypstab/quasilinear.hpp"
#include "hypstab/saint_venant.hpp"

// JSON scenario files:
//   system   {"type": "saint_venant", "g": 9.81}
//            {"type": "affine", "lambda": [l0, lu, lv], "mu": [m0, mu_u, mu_v], "c": c}
//            {"type": "tabulated", "u_range": [a, b], "v_range": [a, b],
//             "lambda": [[...]], "mu": [[...]], "c": c}      rows follow u, columns v
//   tree     {"nodes": N, "edges": [{"id": i, "to": n, "length": l, "H_star": .., "V_star": ..}],
//             "left": "feedback" | "reflection" | "flow_rate"}
//   initial  {"<id>": {"H": profile, "V": profile}} or {"<id>": {"u": profile, "v": profile}}
//            profile = {"type": "constant", "value": y}
//                    | {"type": "sine", "offset", "amplitude", "frequency", "phase", "flatten"}
//                    | {"type": "samples", "values": [...]}
//   feedback {"K": 1, "gamma": 0.5}
//   grid     {"nx": 201, "nt": 801}  or  {"nx": 201, "cfl": 0.5}
//   run      {"tol", "max_iter", "horizon", "extinction_tol", "coupling_tol", "levels"}
namespace hypstab::scenario {

using json = nlohmann::json;

enum class SystemKind { saint_venant, affine, tabulated };
enum class LeftControl { feedback, reflection, flow_rate };

struct EdgeInput {
  int id = 1;
  int to = 2;
  saint_venant::CanalParams params;  // H*, V* used by Saint-Venant systems only
  Profile first;   // H or u
  Profile second;  // V or v
};

struct Scenario {
  json source;
  SystemKind kind = SystemKind::saint_venant;
  quasilinear::DiagonalSystem system;  // affine and tabulated kinds
  double g = 9.81;
  network::CanalTree tree;
  std::vector<EdgeInput> edges;  // edges[i - 1] is edge i
  LeftControl left = LeftControl::feedback;
  feedback::PowerFeedback feedback;
  std::size_t nx = 201;
  std::size_t nt = 801;
  std::optional<double> cfl;
  std::optional<double> tol;  // default: picard_tol
  std::size_t max_iter = 100;
  std::optional<double> horizon;
  double extinction_tol = 1e-9;
  double coupling_tol = 1e-9;
  std::vector<std::size_t> levels{101, 201, 401};

  bool physical() const { return kind == SystemKind::saint_venant; }
  bool single_edge() const { return edges.size() == 1; }
};

Profile parse_profile(const json& spec, double length);

// Throws ScenarioError naming the offending JSON path.
Scenario parse_scenario(const json& doc);
// Throws IoError if unreadable, ScenarioError (with line and column) on malformed JSON.
Scenario load_scenario(const std::filesystem::path& path);

// Riemann-coordinate data of an edge (identity for the generic systems).
std::pair<Profile, Profile> riemann_data(const Scenario& s, int edge);
quasilinear::DiagonalSystem edge_system(const Scenario& s, int edge, double c);
// pick_c for Saint-Venant, the declared c otherwise.
double speed_floor(const Scenario& s);
network::NetworkScenario to_network(const Scenario& s);

// 1e-8 for single edges, 1e-12 when a node couples edges (keeps the node
// conservation residual below the coupling tolerance).
double picard_tol(const Scenario& s);

}  // namespace hypstab::scenario
