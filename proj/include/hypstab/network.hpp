#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "hypstab/feedback.hpp"
#include "hypstab/field.hpp"
#include "hypstab/profile.hpp"
#include "hypstab/quasilinear.hpp"
#include "hypstab/saint_venant.hpp"

// Tree-shaped canal networks. Nodes are 1..N, the root is N, and edge i runs
// from node i (x = 0) to final_node[i - 1] (x = l_i).
namespace hypstab::network {

struct CanalTree {
  int node_count = 2;
  std::vector<int> final_node;  // size N - 1

  int edge_count() const { return static_cast<int>(final_node.size()); }
};

struct TreeReport {
  bool valid = false;
  std::vector<std::string> violations;
  std::vector<int> simple_nodes;    // one incident edge
  std::vector<int> multiple_nodes;  // several incident edges
  int depth = 0;
  // epsilon[i-1][n-1] = 1 if node n is the final node of edge i, 0 if it is the
  // initial node, -1 if edge i does not touch n.
  std::vector<std::vector<int>> incidence;
};

TreeReport validate_tree(const CanalTree& tree);
// Throws InvalidTree listing every violation.
TreeReport require_valid(const CanalTree& tree);
int tree_depth(const CanalTree& tree);

// Edges ending at node n.
std::vector<int> upstream_edges(const CanalTree& tree, int node);
// Leaves-to-root order: every edge appears after all edges upstream of it.
std::vector<int> solve_order(const CanalTree& tree);

// u and v of an upstream edge at x = l_i, sampled on the shared time grid.
struct UpstreamTrace {
  saint_venant::CanalParams params;
  std::vector<double> u;
  std::vector<double> v;
};

// u_{i0}(t, 0) = h(v, t) from flow conservation at a multiple node. `settle_time`
// is the measured time after which every upstream trace is zero.
quasilinear::BoundaryMap multiple_node_map(const saint_venant::CanalParams& outgoing,
                                           const std::vector<UpstreamTrace>& upstream,
                                           double horizon, double c, double settle_time,
                                           const saint_venant::NewtonPolicy& policy = {});

struct EdgeSpec {
  saint_venant::CanalParams params;
  Profile depth0;     // H_{i,0} on [0, l_i]
  Profile velocity0;  // V_{i,0} on [0, l_i]
};

struct NetworkScenario {
  CanalTree tree;
  std::vector<EdgeSpec> edges;  // edges[i - 1] is edge i
  feedback::PowerFeedback feedback;
  std::size_t nx = 201;
  std::size_t nt = 801;
  std::optional<double> horizon;      // default: 1.2 (p max l / c + t*)
  std::optional<double> speed_floor;  // default: pick_c
};

struct NetworkOptions {
  double tol = 1e-12;            // Picard sup-norm gap
  std::size_t max_iter = 200;
  double step = 0.0;
  bool box_extension = false;
  double coupling_tol = 1e-9;    // node conservation residual
  double extinction_tol = 1e-10; // threshold used to time extinction
  double balance_tol = 1e-9;     // relative, for equilibrium and initial flow balance
};

struct EdgeResult {
  int edge = 0;
  bool two_control = true;
  quasilinear::ClosedLoopSolution riemann;
  Field depth;
  Field velocity;
  double margin_w1 = 0.0;   // two-control edges
  double margin_k12 = 0.0;  // one-control edges
  double margin_k13 = 0.0;
  bool conditions_hold = false;
  double extinction_time = 0.0;  // first time after which max(|u|, |v|) <= extinction_tol
};

struct NodeResidual {
  int node = 0;
  std::vector<double> residual;  // Q_{i0}(t, 0) - sum Q_i(t, l_i)
  double max_abs = 0.0;
};

struct NetworkSolution {
  std::vector<EdgeResult> edges;  // indexed by edge - 1
  std::vector<NodeResidual> nodes;
  std::vector<double> times;
  double horizon = 0.0;
  double speed_floor = 0.0;
  int depth = 0;
  double t_star = 0.0;
  double bound = 0.0;  // p max l / c + t*
  double extinction_time = 0.0;
};

// Riemann-coordinate initial profiles of an edge, with measured Lipschitz constants.
std::pair<Profile, Profile> riemann_profiles(const EdgeSpec& edge);

// Largest |u0|, |v0| over all edges.
double data_radius(const NetworkScenario& scenario);

// Throws InvalidArgument when equilibrium flows or initial flows do not balance at a multiple node.
void check_balance(const NetworkScenario& scenario, double rel_tol = 1e-9);

NetworkSolution simulate_network(const NetworkScenario& scenario,
                                 const NetworkOptions& options = {});

}  // namespace hypstab::network
