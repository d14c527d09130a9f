#include "hypstab/network.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <string>

#include "hypstab/error.hpp"

namespace hypstab::network {

namespace sv = saint_venant;

TreeReport validate_tree(const CanalTree& tree) {
  TreeReport rep;
  const int n = tree.node_count;
  auto fail = [&](std::string msg) { rep.violations.push_back(std::move(msg)); };

  if (n < 2) {
    fail("a tree needs at least 2 nodes");
    return rep;
  }
  if (tree.edge_count() != n - 1) {
    fail("edge count " + std::to_string(tree.edge_count()) + " != N - 1 = " +
         std::to_string(n - 1));
    return rep;
  }
  for (int i = 1; i <= n - 1; ++i) {
    const int to = tree.final_node[i - 1];
    if (to < 1 || to > n) fail("edge " + std::to_string(i) + " ends at unknown node " +
                               std::to_string(to));
    if (to == i) fail("edge " + std::to_string(i) + " has epsilon(i,i) = 1 (loop at node i)");
  }
  if (!rep.violations.empty()) return rep;
  if (tree.final_node[n - 2] != n) fail("edge N-1 must end at the root N");

  // Following final nodes from any node must reach the root without revisiting.
  for (int start = 1; start < n; ++start) {
    int node = start;
    int hops = 0;
    while (node != n && hops <= n) {
      node = tree.final_node[node - 1];
      ++hops;
    }
    if (node != n) {
      fail("node " + std::to_string(start) + " lies on a cycle");
      break;
    }
  }

  rep.incidence.assign(n - 1, std::vector<int>(n, -1));
  std::vector<int> degree(n + 1, 0);
  for (int i = 1; i <= n - 1; ++i) {
    rep.incidence[i - 1][i - 1] = 0;
    rep.incidence[i - 1][tree.final_node[i - 1] - 1] = 1;
    ++degree[i];
    ++degree[tree.final_node[i - 1]];
  }
  for (int node = 1; node <= n; ++node) {
    if (degree[node] == 1) rep.simple_nodes.push_back(node);
    else rep.multiple_nodes.push_back(node);
  }
  if (degree[n] != 1) fail("the root must be a simple node (one incoming edge)");

  if (rep.violations.empty()) {
    rep.valid = true;
    rep.depth = tree_depth(tree);
  }
  return rep;
}

TreeReport require_valid(const CanalTree& tree) {
  TreeReport rep = validate_tree(tree);
  if (!rep.valid) {
    std::string msg;
    for (const auto& v : rep.violations) msg += (msg.empty() ? "" : "; ") + v;
    throw Error(ErrorKind::InvalidTree, msg);
  }
  return rep;
}

int tree_depth(const CanalTree& tree) {
  const int n = tree.node_count;
  std::vector<int> incoming(n + 1, 0);
  for (int to : tree.final_node) ++incoming[to];
  int depth = 0;
  for (int node = 1; node < n; ++node) {
    if (incoming[node] != 0) continue;  // only leaves start a path
    int len = 0;
    for (int cur = node; cur != n && len <= n; cur = tree.final_node[cur - 1]) ++len;
    depth = std::max(depth, len);
  }
  return depth;
}

std::vector<int> upstream_edges(const CanalTree& tree, int node) {
  std::vector<int> out;
  for (int i = 1; i <= tree.edge_count(); ++i) {
    if (tree.final_node[i - 1] == node) out.push_back(i);
  }
  return out;
}

std::vector<int> solve_order(const CanalTree& tree) {
  // height(i) = 1 + max height of the edges ending at node i
  const int m = tree.edge_count();
  std::vector<int> height(m + 1, -1);
  std::function<int(int)> h = [&](int i) {
    if (height[i] >= 0) return height[i];
    int best = 0;
    for (int up : upstream_edges(tree, i)) best = std::max(best, h(up) + 1);
    return height[i] = best;
  };
  std::vector<int> order(m);
  for (int i = 1; i <= m; ++i) {
    order[i - 1] = i;
    h(i);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return height[a] < height[b]; });
  return order;
}

quasilinear::BoundaryMap multiple_node_map(const sv::CanalParams& outgoing,
                                           const std::vector<UpstreamTrace>& upstream,
                                           double horizon, double c, double settle_time,
                                           const sv::NewtonPolicy& policy) {
  outgoing.validate();
  if (upstream.empty()) throw Error(ErrorKind::MissingTrace, "multiple node without upstream edges");
  const std::size_t ns = upstream.front().u.size();
  double q_in = 0.0;
  for (const auto& tr : upstream) {
    tr.params.validate();
    if (tr.u.size() < 2 || tr.u.size() != tr.v.size() || tr.u.size() != ns) {
      throw Error(ErrorKind::MissingTrace, "upstream trace missing or mis-sized");
    }
    q_in += tr.params.q_star();
  }
  if (std::abs(q_in - outgoing.q_star()) > 1e-9 * std::max(1.0, outgoing.q_star())) {
    throw Error(ErrorKind::InvalidArgument, "equilibrium flows are not balanced at the node");
  }

  // Upstream flow deviation as a function of time, sampled then interpolated.
  auto rhs = std::make_shared<std::vector<double>>(ns, 0.0);
  for (std::size_t k = 0; k < ns; ++k) {
    double s = 0.0;
    for (const auto& tr : upstream) s += sv::flux_deviation(tr.u[k], tr.v[k], tr.params);
    (*rhs)[k] = s;
  }
  const auto [fu0, fv0] = sv::flux_gradient(0.0, 0.0, outgoing);

  quasilinear::BoundaryMap map;
  map.h = [outgoing, rhs, horizon, fu0, fv0, policy](double v, double t) {
    const double r = interpolate_uniform(*rhs, horizon, t);
    if (v == 0.0 && r == 0.0) return 0.0;
    const auto f = [&](double u) { return sv::flux_deviation(u, v, outgoing) - r; };
    const auto df = [&](double u) { return sv::flux_gradient(u, v, outgoing).first; };
    const double seed = (r - fv0 * v) / fu0;
    return sv::solve_scalar(f, df, seed, 2.0 * std::abs(v) + 2.0 * std::abs(r / fu0), policy);
  };
  map.settle_time = settle_time;

  // D1 and D2 by finite differences on the node box and the trace samples.
  const double delta = sv::node_box_radius(outgoing, c);
  constexpr int nv = 21;
  const double dt = horizon / static_cast<double>(ns - 1);
  const std::size_t stride = std::max<std::size_t>(1, ns / 50);
  double d1 = 0.0, d2 = 0.0;
  for (int i = 0; i < nv; ++i) {
    const double v = -delta + 2.0 * delta * i / (nv - 1);
    double prev = map.h(v, 0.0);
    for (std::size_t k = 1; k < ns; ++k) {
      const double cur = map.h(v, dt * static_cast<double>(k));
      d2 = std::max(d2, std::abs(cur - prev) / dt);
      prev = cur;
    }
  }
  constexpr int n1 = 201;
  const double dv = 2.0 * delta / (n1 - 1);
  for (std::size_t k = 0; k < ns; k += stride) {
    const double t = dt * static_cast<double>(k);
    double prev = map.h(-delta, t);
    for (int i = 1; i < n1; ++i) {
      const double cur = map.h(-delta + i * dv, t);
      d1 = std::max(d1, std::abs(cur - prev) / dv);
      prev = cur;
    }
  }
  map.d1 = d1;
  map.d2 = d2;
  return map;
}

std::pair<Profile, Profile> riemann_profiles(const EdgeSpec& edge) {
  const auto p = edge.params;
  const Profile h0 = edge.depth0, v0 = edge.velocity0;
  auto u_fn = [p, h0, v0](double x) { return sv::to_riemann({h0(x), v0(x)}, p).u; };
  auto v_fn = [p, h0, v0](double x) { return sv::to_riemann({h0(x), v0(x)}, p).v; };
  constexpr int n = 4001;
  const double dx = p.length / (n - 1);
  double lu = 0.0, lv = 0.0;
  double pu = u_fn(0.0), pv = v_fn(0.0);
  for (int j = 1; j < n; ++j) {
    const double x = j == n - 1 ? p.length : j * dx;
    const double cu = u_fn(x), cv = v_fn(x);
    lu = std::max(lu, std::abs(cu - pu) / dx);
    lv = std::max(lv, std::abs(cv - pv) / dx);
    pu = cu;
    pv = cv;
  }
  return {Profile(u_fn, lu), Profile(v_fn, lv)};
}

double data_radius(const NetworkScenario& scenario) {
  double r = 0.0;
  for (const auto& e : scenario.edges) {
    const auto [u0, v0] = riemann_profiles(e);
    r = std::max({r, u0.sampled_sup(0.0, e.params.length), v0.sampled_sup(0.0, e.params.length)});
  }
  return r;
}

void check_balance(const NetworkScenario& scenario, double rel_tol) {
  const CanalTree& tree = scenario.tree;
  for (int node = 1; node < tree.node_count; ++node) {
    const auto ups = upstream_edges(tree, node);
    if (ups.empty()) continue;
    const auto& out = scenario.edges[node - 1];
    double q_star = 0.0, q0 = 0.0;
    for (int i : ups) {
      const auto& e = scenario.edges[i - 1];
      q_star += e.params.q_star();
      q0 += e.depth0(e.params.length) * e.velocity0(e.params.length);
    }
    const double scale = std::max(1.0, out.params.q_star());
    if (std::abs(q_star - out.params.q_star()) > rel_tol * scale) {
      throw Error(ErrorKind::InvalidArgument,
                  "equilibrium flows not balanced at node " + std::to_string(node));
    }
    const double q_out0 = out.depth0(0.0) * out.velocity0(0.0);
    if (std::abs(q0 - q_out0) > rel_tol * scale) {
      throw Error(ErrorKind::InvalidArgument,
                  "initial flows not balanced at node " + std::to_string(node) + " (gap " +
                      std::to_string(q0 - q_out0) + ")");
    }
  }
}

namespace {

std::vector<double> row_sup(const Field& u, const Field& v) {
  std::vector<double> out(u.nt(), 0.0);
  for (std::size_t k = 0; k < u.nt(); ++k) {
    double m = 0.0;
    for (double x : u.row(k)) m = std::max(m, std::abs(x));
    for (double x : v.row(k)) m = std::max(m, std::abs(x));
    out[k] = m;
  }
  return out;
}

}  // namespace

NetworkSolution simulate_network(const NetworkScenario& scenario, const NetworkOptions& options) {
  const TreeReport rep = require_valid(scenario.tree);
  const int m = scenario.tree.edge_count();
  if (static_cast<int>(scenario.edges.size()) != m) {
    throw Error(ErrorKind::InvalidArgument, "scenario defines " +
                                                std::to_string(scenario.edges.size()) +
                                                " edges, tree has " + std::to_string(m));
  }
  std::vector<sv::CanalParams> params;
  for (const auto& e : scenario.edges) {
    e.params.validate();
    params.push_back(e.params);
  }
  check_balance(scenario, options.balance_tol);

  NetworkSolution sol;
  sol.speed_floor = scenario.speed_floor.value_or(sv::pick_c(params));
  sol.depth = rep.depth;
  double max_len = 0.0;
  for (const auto& p : params) max_len = std::max(max_len, p.length);
  const feedback::PowerFeedback fb(scenario.feedback.gain, scenario.feedback.exponent);
  sol.t_star = feedback::extinction_time(data_radius(scenario), fb);
  sol.bound = sol.depth * max_len / sol.speed_floor + sol.t_star;
  sol.horizon = scenario.horizon.value_or(1.2 * sol.bound);
  if (!(sol.horizon > 0.0)) throw Error(ErrorKind::InvalidArgument, "horizon must be positive");

  UniformGrid time_grid{sol.horizon, 1.0, scenario.nt, scenario.nx};
  time_grid.validate();
  sol.times = time_grid.t_nodes();
  sol.edges.resize(m);

  quasilinear::PicardOptions po;
  po.tol = options.tol;
  po.max_iter = options.max_iter;
  po.step = options.step;
  po.box_extension = options.box_extension;

  // Upstream traces are settled once max(|u|, |v|) at x = l stays below the threshold.
  auto trace_settle = [&](const EdgeResult& r) {
    const auto uc = r.riemann.u.column(r.riemann.u.nx() - 1);
    const auto vc = r.riemann.v.column(r.riemann.v.nx() - 1);
    std::vector<double> s(uc.size());
    for (std::size_t k = 0; k < s.size(); ++k) s[k] = std::max(std::abs(uc[k]), std::abs(vc[k]));
    const double t = quasilinear::settle_time(sol.times, s, options.extinction_tol);
    return std::isinf(t) ? sol.horizon : t;
  };

  for (int i : solve_order(scenario.tree)) {
    const EdgeSpec& spec = scenario.edges[i - 1];
    EdgeResult& res = sol.edges[i - 1];
    res.edge = i;
    try {
      const UniformGrid grid{sol.horizon, spec.params.length, scenario.nt, scenario.nx};
      const auto [u0, v0] = riemann_profiles(spec);
      const quasilinear::DiagonalSystem system = sv::diagonal_system(spec.params, sol.speed_floor);
      const auto ups = upstream_edges(scenario.tree, i);
      if (ups.empty()) {
        res.two_control = true;
        res.riemann = quasilinear::picard_two_control(system, u0, v0, fb, grid, po);
        const auto w1 = quasilinear::check_two_control(res.riemann.ledger);
        res.margin_w1 = w1.margin;
        res.conditions_hold = w1.holds;
      } else {
        res.two_control = false;
        std::vector<UpstreamTrace> traces;
        double settle = 0.0;
        for (int up : ups) {
          const EdgeResult& r = sol.edges[up - 1];
          traces.push_back({params[up - 1], r.riemann.u.column(r.riemann.u.nx() - 1),
                            r.riemann.v.column(r.riemann.v.nx() - 1)});
          settle = std::max(settle, trace_settle(r));
        }
        const quasilinear::BoundaryMap map =
            multiple_node_map(spec.params, traces, sol.horizon, sol.speed_floor, settle);
        res.riemann = quasilinear::picard_one_control(system, u0, v0, map, fb, grid, po);
        const auto k = quasilinear::check_one_control(res.riemann.ledger);
        res.margin_k12 = k.margin_k12;
        res.margin_k13 = k.margin_k13;
        res.conditions_hold = k.holds();
      }
      res.depth = Field(grid);
      res.velocity = Field(grid);
      for (std::size_t k = 0; k < grid.nt; ++k) {
        for (std::size_t j = 0; j < grid.nx; ++j) {
          const auto s = sv::from_riemann({res.riemann.u(k, j), res.riemann.v(k, j)}, spec.params);
          res.depth(k, j) = s.h;
          res.velocity(k, j) = s.v;
        }
      }
      res.extinction_time = quasilinear::settle_time(
          sol.times, row_sup(res.riemann.u, res.riemann.v), options.extinction_tol);
    } catch (const Error& e) {
      if (e.edge()) throw;
      throw e.with_edge(i);
    }
    sol.extinction_time = std::max(sol.extinction_time, res.extinction_time);
  }

  for (int node : rep.multiple_nodes) {
    NodeResidual nr;
    nr.node = node;
    const EdgeResult& out = sol.edges[node - 1];
    const auto ups = upstream_edges(scenario.tree, node);
    nr.residual.resize(sol.times.size());
    for (std::size_t k = 0; k < sol.times.size(); ++k) {
      double q = out.depth(k, 0) * out.velocity(k, 0);
      for (int up : ups) {
        const EdgeResult& r = sol.edges[up - 1];
        const std::size_t j = r.depth.nx() - 1;
        q -= r.depth(k, j) * r.velocity(k, j);
      }
      nr.residual[k] = q;
      nr.max_abs = std::max(nr.max_abs, std::abs(q));
    }
    if (nr.max_abs > options.coupling_tol) {
      throw Error(ErrorKind::CouplingResidualExceeded,
                  "flow conservation residual " + std::to_string(nr.max_abs) + " at node " +
                      std::to_string(node));
    }
    sol.nodes.push_back(std::move(nr));
  }
  return sol;
}

}  // namespace hypstab::network
