#include "hypstab/cli.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "hypstab/feedback.hpp"
#include "hypstab/oracle.hpp"
#include "hypstab/saint_venant.hpp"

namespace hypstab::cli {

using json = nlohmann::json;
using scenario::LeftControl;
using scenario::Scenario;

namespace {

constexpr double kTiny = 1e-300;

json num_json(double x) {
  if (std::isfinite(x)) return x;
  return x > 0 ? "inf" : (x < 0 ? "-inf" : "nan");
}

std::string fmt(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string fixed(double x, int prec = 6) {
  if (std::isinf(x)) return "inf";
  std::ostringstream os;
  os.precision(prec);
  os << x;
  return os.str();
}

struct EdgeData {
  Profile u0, v0;
  double c1 = kTiny;
  double c2 = kTiny;
};

EdgeData edge_data(const Scenario& s, int edge) {
  EdgeData d;
  std::tie(d.u0, d.v0) = scenario::riemann_data(s, edge);
  const double len = s.edges[edge - 1].params.length;
  d.c1 = std::max({d.u0.sampled_sup(0.0, len), d.v0.sampled_sup(0.0, len), kTiny});
  d.c2 = std::max({d.u0.lipschitz(), d.v0.lipschitz(), kTiny});
  return d;
}

double global_radius(const Scenario& s) {
  double r = 0.0;
  for (const auto& e : s.edges) r = std::max(r, edge_data(s, e.id).c1);
  return r;
}

double max_length(const Scenario& s) {
  double m = 0.0;
  for (const auto& e : s.edges) m = std::max(m, e.params.length);
  return m;
}

bool single_one_control(const Scenario& s) {
  return s.single_edge() && s.left != LeftControl::feedback;
}

// Left boundary map of a single-edge one-control scenario.
quasilinear::BoundaryMap single_edge_map(const Scenario& s, double c) {
  if (s.left == LeftControl::flow_rate) return saint_venant::simple_node_map(s.edges[0].params, c);
  quasilinear::BoundaryMap map;
  map.h = [](double v, double) { return v; };
  map.d1 = 1.0;
  return map;
}

// Longest chain of edges from a leaf up to and including the edges ending at `node`.
int height_at(const network::CanalTree& tree, int node) {
  int best = 0;
  for (int up : network::upstream_edges(tree, node)) best = std::max(best, 1 + height_at(tree, up));
  return best;
}

void fill_margins(EdgeLedger& e) {
  if (e.two_control) {
    const auto w1 = quasilinear::check_two_control(e.ledger);
    e.holds = w1.holds;
    e.margin_w1 = w1.margin;
  } else {
    const auto k = quasilinear::check_one_control(e.ledger);
    e.holds = k.holds();
    e.margin_k12 = k.margin_k12;
    e.margin_k13 = k.margin_k13;
  }
}

void write_text(const std::filesystem::path& p, const std::string& text,
                std::vector<std::filesystem::path>& written) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + p.string());
  written.push_back(p);
  out << text;
  out.flush();
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + p.string());
}

std::string field_csv(const Field& f) {
  std::string s = "t\\x";
  const auto& g = f.grid();
  for (std::size_t j = 0; j < g.nx; ++j) s += "," + fmt(g.x(j));
  s += "\n";
  for (std::size_t k = 0; k < g.nt; ++k) {
    s += fmt(g.t(k));
    for (double y : f.row(k)) s += "," + fmt(y);
    s += "\n";
  }
  return s;
}

double spatial_l1(std::span<const double> a, std::span<const double> b, double dx) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double w = (j == 0 || j + 1 == a.size()) ? 0.5 : 1.0;
    s += w * std::abs(a[j] - b[j]);
  }
  return s * dx;
}

}  // namespace

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NoConvergence:
    case ErrorKind::NewtonFailure:
    case ErrorKind::StepTooLarge:
    case ErrorKind::CFLViolation:
      return kNonConvergence;
    case ErrorKind::IoError:
    case ErrorKind::ScenarioError:
      return kIoFailure;
    default:
      return kConditionFailure;
  }
}

void apply_overrides(Scenario& s, const Overrides& o) {
  if (o.grid_nx) {
    if (*o.grid_nx < 2) throw Error(ErrorKind::ScenarioError, "--grid-nx must be >= 2");
    s.nx = *o.grid_nx;
  }
  if (o.tol) {
    if (!(*o.tol > 0.0)) throw Error(ErrorKind::ScenarioError, "--tol must be positive");
    s.tol = *o.tol;
  }
  if (o.horizon) {
    if (!(*o.horizon > 0.0)) throw Error(ErrorKind::ScenarioError, "--horizon must be positive");
    s.horizon = *o.horizon;
  }
}

double extinction_bound(const Scenario& s) {
  const double c = scenario::speed_floor(s);
  const double t_star = feedback::extinction_time(global_radius(s), s.feedback);
  if (s.single_edge()) {
    const double crossing = s.edges[0].params.length / c;
    return (single_one_control(s) ? 2.0 : 1.0) * crossing + t_star;
  }
  return network::tree_depth(s.tree) * max_length(s) / c + t_star;
}

double default_horizon(const Scenario& s) { return s.horizon.value_or(1.2 * extinction_bound(s)); }

std::size_t resolve_nt(const Scenario& s, double horizon) {
  if (!s.cfl) return s.nt;
  const double c = scenario::speed_floor(s);
  double speed = 0.0, dx = std::numeric_limits<double>::infinity();
  for (const auto& e : s.edges) {
    const EdgeData d = edge_data(s, e.id);
    const auto sys = scenario::edge_system(s, e.id, c);
    speed = std::max(speed, quasilinear::box_bounds(sys, d.c1, d.c1, 50).m1);
    dx = std::min(dx, e.params.length / static_cast<double>(s.nx - 1));
  }
  return static_cast<std::size_t>(std::ceil(horizon * speed / (*s.cfl * dx))) + 1;
}

VerifyReport verify(const Scenario& s) {
  VerifyReport rep;
  const double c = scenario::speed_floor(s);
  const double t_star = feedback::extinction_time(global_radius(s), s.feedback);
  const double horizon = default_horizon(s);
  for (const auto& e : s.edges) {
    EdgeLedger el;
    el.edge = e.id;
    const EdgeData d = edge_data(s, e.id);
    const auto sys = scenario::edge_system(s, e.id, c);
    const quasilinear::LedgerOptions lo{e.params.length, 200};
    const auto ups = network::upstream_edges(s.tree, e.id);
    if (s.single_edge() ? s.left == LeftControl::feedback : ups.empty()) {
      el.two_control = true;
      el.ledger = quasilinear::build_ledger(sys, d.c1, d.c2, s.feedback, nullptr, lo);
    } else {
      el.two_control = false;
      quasilinear::BoundaryMap map;
      if (s.single_edge()) {
        map = single_edge_map(s, c);
      } else {
        std::vector<network::UpstreamTrace> zero;
        for (int up : ups) zero.push_back({s.edges[up - 1].params, {0.0, 0.0}, {0.0, 0.0}});
        const double settle = height_at(s.tree, e.id) * max_length(s) / c + t_star;
        map = network::multiple_node_map(e.params, zero, horizon, c, settle);
        map.d2 = 0.0;
      }
      el.ledger = quasilinear::build_ledger(sys, d.c1, d.c2, s.feedback, &map, lo);
    }
    fill_margins(el);
    rep.all_pass = rep.all_pass && el.holds;
    rep.edges.push_back(el);
  }
  return rep;
}

json to_json(const quasilinear::ConstantsLedger& l) {
  return json{{"one_control", l.one_control}, {"C1", num_json(l.c1)},
              {"C2", num_json(l.c2)},         {"C1_prime", num_json(l.c1_prime)},
              {"C3", num_json(l.c3)},         {"C3_prime", num_json(l.c3_prime)},
              {"C3_dblprime", num_json(l.c3_dblprime)}, {"D1", num_json(l.d1)},
              {"D2", num_json(l.d2)},         {"T_h", num_json(l.settle_time)},
              {"T", num_json(l.horizon)},     {"t_star", num_json(l.t_star)},
              {"M1", num_json(l.m1)},         {"M2", num_json(l.m2)},
              {"K", l.gain},                  {"gamma", l.exponent},
              {"c", num_json(l.speed_floor)}, {"length", l.length}};
}

json to_json(const VerifyReport& r) {
  json edges = json::array();
  for (const auto& e : r.edges) {
    json j{{"edge", e.edge}, {"control", e.two_control ? "two" : "one"}, {"holds", e.holds},
           {"ledger", to_json(e.ledger)}};
    if (e.two_control) j["W1_margin"] = num_json(e.margin_w1);
    else {
      j["K12_margin"] = num_json(e.margin_k12);
      j["K13_margin"] = num_json(e.margin_k13);
    }
    edges.push_back(j);
  }
  return json{{"all_pass", r.all_pass}, {"edges", edges}};
}

std::string format_verify(const VerifyReport& r) {
  std::ostringstream os;
  for (const auto& e : r.edges) {
    const auto& l = e.ledger;
    os << "edge " << e.edge << " (" << (e.two_control ? "two controls" : "one control") << ")\n";
    os << "  C1 = " << fixed(l.c1) << "  C2 = " << fixed(l.c2) << "  C1' = " << fixed(l.c1_prime)
       << "\n";
    os << "  M1 = " << fixed(l.m1) << "  M2 = " << fixed(l.m2) << "  c = " << fixed(l.speed_floor)
       << "  K = " << fixed(l.gain) << "  gamma = " << fixed(l.exponent) << "\n";
    os << "  T = " << fixed(l.horizon) << "  t* = " << fixed(l.t_star) << "  C3 = " << fixed(l.c3)
       << "  C3' = " << fixed(l.c3_prime);
    if (!e.two_control) {
      os << "  C3'' = " << fixed(l.c3_dblprime) << "\n  D1 = " << fixed(l.d1)
         << "  D2 = " << fixed(l.d2) << "  T_h = " << fixed(l.settle_time);
    }
    os << "\n";
    if (e.two_control) {
      os << "  W1  " << (e.holds ? "PASS" : "FAIL") << "  margin " << fixed(e.margin_w1) << "\n";
    } else {
      os << "  K12 " << (e.margin_k12 <= 1.0 ? "PASS" : "FAIL") << "  margin "
         << fixed(e.margin_k12) << "\n";
      os << "  K13 " << (e.margin_k13 <= 1.0 ? "PASS" : "FAIL") << "  margin "
         << fixed(e.margin_k13) << "\n";
    }
  }
  os << (r.all_pass ? "all conditions hold\n" : "some conditions fail\n");
  return os.str();
}

RunResult simulate(const Scenario& s) {
  RunResult rr;
  rr.horizon = default_horizon(s);
  const std::size_t nt = resolve_nt(s, rr.horizon);
  rr.speed_floor = scenario::speed_floor(s);

  if (s.physical() && !single_one_control(s)) {
    network::NetworkScenario ns = scenario::to_network(s);
    ns.nt = nt;
    ns.horizon = rr.horizon;
    network::NetworkOptions no;
    no.tol = scenario::picard_tol(s);
    no.max_iter = s.max_iter;
    no.coupling_tol = s.coupling_tol;
    no.extinction_tol = s.extinction_tol;
    network::NetworkSolution sol = network::simulate_network(ns, no);
    rr.times = sol.times;
    rr.t_star = sol.t_star;
    rr.bound = sol.bound;
    rr.depth = sol.depth;
    rr.extinction_time = sol.extinction_time;
    rr.nodes = std::move(sol.nodes);
    for (auto& e : sol.edges) {
      EdgeRun er;
      er.edge = e.edge;
      er.two_control = e.two_control;
      er.u = std::move(e.riemann.u);
      er.v = std::move(e.riemann.v);
      er.depth = std::move(e.depth);
      er.velocity = std::move(e.velocity);
      er.iterations = e.riemann.iterations;
      er.residual_history = e.riemann.residual_history;
      er.ledger = e.riemann.ledger;
      er.margin_w1 = e.margin_w1;
      er.margin_k12 = e.margin_k12;
      er.margin_k13 = e.margin_k13;
      er.conditions_hold = e.conditions_hold;
      er.extinction_time = e.extinction_time;
      er.warnings = e.riemann.warnings;
      rr.edges.push_back(std::move(er));
    }
    return rr;
  }

  const auto& in = s.edges[0];
  const EdgeData d = edge_data(s, 1);
  const auto sys = scenario::edge_system(s, 1, rr.speed_floor);
  const UniformGrid grid{rr.horizon, in.params.length, nt, s.nx};
  quasilinear::PicardOptions po;
  po.tol = scenario::picard_tol(s);
  po.max_iter = s.max_iter;

  EdgeRun er;
  er.edge = 1;
  quasilinear::ClosedLoopSolution sol;
  try {
    if (s.left == LeftControl::feedback) {
      sol = quasilinear::picard_two_control(sys, d.u0, d.v0, s.feedback, grid, po);
    } else {
      er.two_control = false;
      const auto map = single_edge_map(s, rr.speed_floor);
      sol = quasilinear::picard_one_control(sys, d.u0, d.v0, map, s.feedback, grid, po);
    }
  } catch (const Error& e) {
    throw e.with_edge(1);
  }
  EdgeLedger el{1, er.two_control, sol.ledger};
  fill_margins(el);
  er.margin_w1 = el.margin_w1;
  er.margin_k12 = el.margin_k12;
  er.margin_k13 = el.margin_k13;
  er.conditions_hold = el.holds;
  er.iterations = sol.iterations;
  er.residual_history = sol.residual_history;
  er.ledger = sol.ledger;
  er.warnings = sol.warnings;

  rr.times = grid.t_nodes();
  std::vector<double> sup(grid.nt);
  for (std::size_t k = 0; k < grid.nt; ++k) {
    double m = 0.0;
    for (double x : sol.u.row(k)) m = std::max(m, std::abs(x));
    for (double x : sol.v.row(k)) m = std::max(m, std::abs(x));
    sup[k] = m;
  }
  er.extinction_time = quasilinear::settle_time(rr.times, sup, s.extinction_tol);
  if (s.physical()) {
    Field h(grid), vel(grid);
    for (std::size_t k = 0; k < grid.nt; ++k) {
      for (std::size_t j = 0; j < grid.nx; ++j) {
        const auto st = saint_venant::from_riemann({sol.u(k, j), sol.v(k, j)}, in.params);
        h(k, j) = st.h;
        vel(k, j) = st.v;
      }
    }
    er.depth = std::move(h);
    er.velocity = std::move(vel);
  }
  er.u = std::move(sol.u);
  er.v = std::move(sol.v);
  rr.t_star = feedback::extinction_time(global_radius(s), s.feedback);
  rr.bound = extinction_bound(s);
  rr.depth = 1;
  rr.extinction_time = er.extinction_time;
  rr.edges.push_back(std::move(er));
  return rr;
}

json report_json(const RunResult& r, const Scenario& s) {
  const double dt = r.times.size() > 1 ? r.times[1] - r.times[0] : 0.0;
  json edges = json::array();
  for (const auto& e : r.edges) {
    json hist = json::array();
    for (double x : e.residual_history) hist.push_back(num_json(x));
    json j{{"edge", e.edge},
           {"control", e.two_control ? "two" : "one"},
           {"picard_iterations", e.iterations},
           {"residual_history", hist},
           {"extinction_time", num_json(e.extinction_time)},
           {"conditions_hold", e.conditions_hold},
           {"ledger", to_json(e.ledger)},
           {"warnings", e.warnings}};
    if (e.two_control) j["W1_margin"] = num_json(e.margin_w1);
    else {
      j["K12_margin"] = num_json(e.margin_k12);
      j["K13_margin"] = num_json(e.margin_k13);
    }
    edges.push_back(j);
  }
  json nodes = json::array();
  for (const auto& n : r.nodes) nodes.push_back({{"node", n.node}, {"max_residual", n.max_abs}});
  return json{{"horizon", r.horizon},
              {"speed_floor", r.speed_floor},
              {"t_star", r.t_star},
              {"tree_depth", r.depth},
              {"extinction_bound", r.bound},
              {"extinction_time", num_json(r.extinction_time)},
              {"extinction_threshold", s.extinction_tol},
              {"time_step", dt},
              {"extinct_within_bound", r.extinction_time <= r.bound + dt},
              {"edges", edges},
              {"nodes", nodes},
              {"scenario", s.source}};
}

std::vector<std::filesystem::path> write_artifacts(const RunResult& r, const Scenario& s,
                                                   const std::filesystem::path& out) {
  std::vector<std::filesystem::path> written;
  try {
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec) throw Error(ErrorKind::IoError, "cannot create " + out.string() + ": " + ec.message());
    for (const auto& e : r.edges) {
      const std::string stem = "edge_" + std::to_string(e.edge) + "_";
      write_text(out / (stem + "u.csv"), field_csv(e.u), written);
      write_text(out / (stem + "v.csv"), field_csv(e.v), written);
      if (e.depth) write_text(out / (stem + "H.csv"), field_csv(*e.depth), written);
      if (e.velocity) write_text(out / (stem + "V.csv"), field_csv(*e.velocity), written);
    }
    std::string traces = "t";
    for (const auto& e : r.edges) {
      const std::string i = std::to_string(e.edge);
      traces += ",u" + i + "_left,v" + i + "_left,u" + i + "_right,v" + i + "_right";
      if (e.depth) traces += ",Q" + i + "_left,Q" + i + "_right";
    }
    traces += "\n";
    for (std::size_t k = 0; k < r.times.size(); ++k) {
      traces += fmt(r.times[k]);
      for (const auto& e : r.edges) {
        const std::size_t last = e.u.nx() - 1;
        traces += "," + fmt(e.u(k, 0)) + "," + fmt(e.v(k, 0)) + "," + fmt(e.u(k, last)) + "," +
                  fmt(e.v(k, last));
        if (e.depth) {
          traces += "," + fmt((*e.depth)(k, 0) * (*e.velocity)(k, 0)) + "," +
                    fmt((*e.depth)(k, last) * (*e.velocity)(k, last));
        }
      }
      traces += "\n";
    }
    write_text(out / "boundary_traces.csv", traces, written);
    write_text(out / "report.json", report_json(r, s).dump(2) + "\n", written);
  } catch (...) {
    std::error_code ec;
    for (const auto& p : written) std::filesystem::remove(p, ec);
    throw;
  }
  return written;
}

std::vector<CompareRow> compare(const Scenario& s) {
  if (!s.single_edge()) throw Error(ErrorKind::InvalidArgument, "compare needs a single-edge scenario");
  std::vector<CompareRow> rows;
  const double c = scenario::speed_floor(s);
  const EdgeData d = edge_data(s, 1);
  const auto sys = scenario::edge_system(s, 1, c);
  const double length = s.edges[0].params.length;
  for (std::size_t n : s.levels) {
    Scenario sc = s;
    sc.nx = n;
    if (!sc.cfl) {
      const double ratio = static_cast<double>(s.nt - 1) / static_cast<double>(s.nx - 1);
      sc.nt = static_cast<std::size_t>(std::lround(ratio * static_cast<double>(n - 1))) + 1;
    }
    const RunResult run = simulate(sc);
    const EdgeRun& er = run.edges[0];

    oracle::ClosedLoopBoundary closures;
    if (sc.left == LeftControl::feedback) {
      closures = oracle::two_control_boundary(d.u0, d.v0, sc.feedback, length);
    } else {
      closures = oracle::one_control_boundary(single_edge_map(sc, c), d.v0, sc.feedback, length);
    }
    const double u_radius = er.ledger.c1_prime, v_radius = er.ledger.c1;
    const double speed = quasilinear::box_bounds(sys, u_radius, v_radius, 50).m1;
    const auto ug = oracle::UpwindGrid::with_cfl(run.horizon, length, n - 1, speed, oracle::kMaxCfl);
    const auto [uu, vv] = oracle::upwind_closed_loop(sys, d.u0, d.v0, closures, ug, u_radius, v_radius);
    const Field ur = oracle::resample(uu, er.u.grid());
    const Field vr = oracle::resample(vv, er.v.grid());

    CompareRow row;
    row.nx = n;
    row.dx = er.u.grid().dx();
    row.upwind_steps = ug.steps;
    for (std::size_t k = 0; k < er.u.nt(); ++k) {
      const double l1 = spatial_l1(er.u.row(k), ur.row(k), row.dx) +
                        spatial_l1(er.v.row(k), vr.row(k), row.dx);
      row.l1 = std::max(row.l1, l1);
    }
    row.linf = std::max(sup_distance(er.u, ur), sup_distance(er.v, vr));
    rows.push_back(row);
  }
  return rows;
}

std::string format_compare(const std::vector<CompareRow>& rows) {
  std::ostringstream os;
  os << "      nx          dx          L1       L1/dx        Linf   L1 ratio\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    char line[160];
    const double ratio = i == 0 ? std::nan("") : rows[i - 1].l1 / r.l1;
    std::snprintf(line, sizeof line, "%8zu %11.4e %11.4e %11.4f %11.4e %10.3f\n", r.nx, r.dx, r.l1,
                  r.l1 / r.dx, r.linf, ratio);
    os << line;
  }
  return os.str();
}

json to_json(const std::vector<CompareRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    arr.push_back({{"nx", r.nx}, {"dx", r.dx}, {"l1", r.l1}, {"l1_over_dx", r.l1 / r.dx},
                   {"linf", r.linf}, {"upwind_steps", r.upwind_steps}});
  }
  return json{{"levels", arr}};
}

namespace {

void cap_threads() {
  const char* env = std::getenv("HYPSTAB_THREADS");
  if (!env || !*env) return;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) {
    std::cerr << "warning: ignoring HYPSTAB_THREADS=" << env << "\n";
    return;
  }
  omp_set_num_threads(static_cast<int>(std::min<long>(n, omp_get_max_threads())));
}

struct Args {
  std::string scenario;
  std::string out;
  bool force = false;
  std::size_t grid_nx = 0;
  double tol = 0.0;
  double horizon = 0.0;
};

void add_common(CLI::App* sub, Args& a) {
  sub->add_option("scenario", a.scenario, "scenario JSON file")->required();
  sub->add_option("--out", a.out, "output directory");
  sub->add_flag("--force", a.force, "simulate even if a smallness condition fails");
  sub->add_option("--grid-nx", a.grid_nx, "spatial nodes per edge");
  sub->add_option("--tol", a.tol, "Picard tolerance");
  sub->add_option("--horizon", a.horizon, "final time");
}

Scenario load(const Args& a, const CLI::App* sub) {
  Scenario s = scenario::load_scenario(a.scenario);
  Overrides o;
  if (sub->count("--grid-nx")) o.grid_nx = a.grid_nx;
  if (sub->count("--tol")) o.tol = a.tol;
  if (sub->count("--horizon")) o.horizon = a.horizon;
  apply_overrides(s, o);
  return s;
}

int cmd_verify(const Args& a, const CLI::App* sub) {
  const Scenario s = load(a, sub);
  const VerifyReport rep = verify(s);
  std::cout << format_verify(rep);
  if (!a.out.empty()) {
    std::vector<std::filesystem::path> written;
    std::filesystem::create_directories(a.out);
    write_text(std::filesystem::path(a.out) / "verify.json", to_json(rep).dump(2) + "\n", written);
  }
  return rep.all_pass ? kSuccess : kConditionFailure;
}

int cmd_simulate(const Args& a, const CLI::App* sub) {
  const Scenario s = load(a, sub);
  const VerifyReport rep = verify(s);
  if (!rep.all_pass && !a.force) {
    std::cout << format_verify(rep);
    std::cerr << "error: smallness conditions fail; rerun with --force to simulate anyway\n";
    return kConditionFailure;
  }
  const RunResult r = simulate(s);
  const std::filesystem::path out = a.out.empty() ? std::filesystem::path("hypstab_out") : std::filesystem::path(a.out);
  write_artifacts(r, s, out);
  for (const auto& e : r.edges) {
    std::cout << "edge " << e.edge << ": " << e.iterations << " Picard iterations, extinct at t = "
              << fixed(e.extinction_time) << "\n";
    for (const auto& w : e.warnings) std::cout << "  warning: " << w << "\n";
  }
  for (const auto& n : r.nodes) {
    std::cout << "node " << n.node << ": conservation residual " << fixed(n.max_abs, 3) << "\n";
  }
  std::cout << "extinction time " << fixed(r.extinction_time) << " (bound " << fixed(r.bound)
            << ", horizon " << fixed(r.horizon) << ")\n";
  std::cout << "artifacts written to " << out.string() << "\n";
  return kSuccess;
}

int cmd_compare(const Args& a, const CLI::App* sub) {
  const Scenario s = load(a, sub);
  const auto rows = compare(s);
  std::cout << format_compare(rows);
  if (!a.out.empty()) {
    std::vector<std::filesystem::path> written;
    std::filesystem::create_directories(a.out);
    write_text(std::filesystem::path(a.out) / "compare.json", to_json(rows).dump(2) + "\n", written);
  }
  return kSuccess;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Finite-time boundary stabilization of 1-D hyperbolic systems and canal networks"};
  app.require_subcommand(1);
  Args args;
  auto* verify_cmd = app.add_subcommand("verify", "print the constants ledger and check the smallness conditions");
  auto* simulate_cmd = app.add_subcommand("simulate", "run the closed loop and write fields and report.json");
  auto* compare_cmd = app.add_subcommand("compare", "compare characteristics and upwind solutions");
  for (auto* sub : {verify_cmd, simulate_cmd, compare_cmd}) add_common(sub, args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kSuccess : kIoFailure;
  }

  cap_threads();
  try {
    if (*verify_cmd) return cmd_verify(args, verify_cmd);
    if (*simulate_cmd) return cmd_simulate(args, simulate_cmd);
    return cmd_compare(args, compare_cmd);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNonConvergence;
  }
}

}  // namespace hypstab::cli
