#include "hypstab/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include "hypstab/error.hpp"

namespace hypstab::scenario {

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::ScenarioError, where + ": " + what);
}

const json& need(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) bad(where, std::string("missing \"") + key + "\"");
  return obj.at(key);
}

double num(const json& obj, const char* key, const std::string& where) {
  const json& v = need(obj, key, where);
  if (!v.is_number()) bad(where + "/" + key, "expected a number");
  return v.get<double>();
}

double num_or(const json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key) || obj.at(key).is_null()) return fallback;
  return num(obj, key, where);
}

std::size_t count(const json& obj, const char* key, const std::string& where) {
  const json& v = need(obj, key, where);
  if (!v.is_number_integer() || v.get<long long>() < 2) {
    bad(where + "/" + key, "expected an integer >= 2");
  }
  return v.get<std::size_t>();
}

std::vector<double> numbers(const json& v, const std::string& where) {
  if (!v.is_array()) bad(where, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) bad(where, "expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

struct Table {
  double u_lo, u_hi, v_lo, v_hi;
  std::size_t nu, nv;
  std::vector<double> values;  // row-major, rows follow u

  double operator()(double u, double v) const {
    const double pu = std::clamp((u - u_lo) / (u_hi - u_lo), 0.0, 1.0) * static_cast<double>(nu - 1);
    const double pv = std::clamp((v - v_lo) / (v_hi - v_lo), 0.0, 1.0) * static_cast<double>(nv - 1);
    const auto i = std::min(static_cast<std::size_t>(pu), nu - 2);
    const auto j = std::min(static_cast<std::size_t>(pv), nv - 2);
    const double a = pu - static_cast<double>(i), b = pv - static_cast<double>(j);
    const auto at = [&](std::size_t r, std::size_t c) { return values[r * nv + c]; };
    return (1 - a) * (1 - b) * at(i, j) + a * (1 - b) * at(i + 1, j) + (1 - a) * b * at(i, j + 1) +
           a * b * at(i + 1, j + 1);
  }
};

std::shared_ptr<Table> parse_table(const json& sys, const char* key, const std::string& where) {
  const auto ur = numbers(need(sys, "u_range", where), where + "/u_range");
  const auto vr = numbers(need(sys, "v_range", where), where + "/v_range");
  if (ur.size() != 2 || vr.size() != 2 || !(ur[1] > ur[0]) || !(vr[1] > vr[0])) {
    bad(where, "u_range and v_range must be increasing pairs");
  }
  const json& rows = need(sys, key, where);
  if (!rows.is_array() || rows.size() < 2) bad(where + "/" + key, "need at least 2 rows");
  auto t = std::make_shared<Table>();
  t->u_lo = ur[0];
  t->u_hi = ur[1];
  t->v_lo = vr[0];
  t->v_hi = vr[1];
  t->nu = rows.size();
  t->nv = 0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto row = numbers(rows[r], where + "/" + key + "/" + std::to_string(r));
    if (r == 0) t->nv = row.size();
    if (row.size() != t->nv || t->nv < 2) bad(where + "/" + key, "rows must share a length >= 2");
    t->values.insert(t->values.end(), row.begin(), row.end());
  }
  return t;
}

void parse_system(Scenario& s, const json& sys) {
  const std::string where = "/system";
  const json& type = need(sys, "type", where);
  if (!type.is_string()) bad(where + "/type", "expected a string");
  const auto kind = type.get<std::string>();
  if (kind == "saint_venant") {
    s.kind = SystemKind::saint_venant;
    s.g = num_or(sys, "g", 9.81, where);
    if (!(s.g > 0.0)) bad(where + "/g", "must be positive");
  } else if (kind == "affine") {
    s.kind = SystemKind::affine;
    const auto l = numbers(need(sys, "lambda", where), where + "/lambda");
    const auto m = numbers(need(sys, "mu", where), where + "/mu");
    if (l.size() != 3 || m.size() != 3) bad(where, "lambda and mu take three coefficients");
    s.system = quasilinear::affine_system(l[0], l[1], l[2], m[0], m[1], m[2], num(sys, "c", where));
  } else if (kind == "tabulated") {
    s.kind = SystemKind::tabulated;
    auto lt = parse_table(sys, "lambda", where);
    auto mt = parse_table(sys, "mu", where);
    s.system.lambda = [lt](double u, double v) { return (*lt)(u, v); };
    s.system.mu = [mt](double u, double v) { return (*mt)(u, v); };
    s.system.speed_floor = num(sys, "c", where);
  } else {
    bad(where + "/type", "unknown system type \"" + kind + "\"");
  }
  if (s.kind != SystemKind::saint_venant && !(s.system.speed_floor > 0.0)) {
    bad(where + "/c", "must be positive");
  }
}

}  // namespace

Profile parse_profile(const json& spec, double length) {
  if (spec.is_number()) return Profile::constant(spec.get<double>());
  const std::string where = "profile";
  const json& type = need(spec, "type", where);
  if (!type.is_string()) bad(where, "type must be a string");
  const auto kind = type.get<std::string>();
  if (kind == "constant") return Profile::constant(num(spec, "value", where));
  if (kind == "sine") {
    return Profile::flattened_sine(num_or(spec, "offset", 0.0, where), num(spec, "amplitude", where),
                                   num_or(spec, "frequency", 0.5, where),
                                   num_or(spec, "phase", 0.0, where),
                                   num_or(spec, "flatten", 0.0, where), length);
  }
  if (kind == "samples") return Profile::samples(numbers(need(spec, "values", where), where), length);
  bad(where, "unknown profile type \"" + kind + "\"");
}

Scenario parse_scenario(const json& doc) {
  if (!doc.is_object()) bad("/", "scenario must be a JSON object");
  Scenario s;
  s.source = doc;
  parse_system(s, need(doc, "system", ""));

  const json& tree = need(doc, "tree", "");
  const json& nodes = need(tree, "nodes", "/tree");
  if (!nodes.is_number_integer() || nodes.get<int>() < 2) bad("/tree/nodes", "expected >= 2");
  s.tree.node_count = nodes.get<int>();
  const json& edges = need(tree, "edges", "/tree");
  if (!edges.is_array()) bad("/tree/edges", "expected an array");
  s.tree.final_node.assign(edges.size(), 0);
  s.edges.resize(edges.size());
  std::vector<bool> seen(edges.size(), false);
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const std::string where = "/tree/edges/" + std::to_string(k);
    const json& e = edges[k];
    const json& id = need(e, "id", where);
    const json& to = need(e, "to", where);
    if (!id.is_number_integer() || !to.is_number_integer()) bad(where, "id and to must be integers");
    const int i = id.get<int>();
    if (i < 1 || i > static_cast<int>(edges.size()) || seen[i - 1]) {
      bad(where + "/id", "edge ids must be 1..I without repeats");
    }
    seen[i - 1] = true;
    EdgeInput& in = s.edges[i - 1];
    in.id = i;
    in.to = to.get<int>();
    in.params.length = num_or(e, "length", 1.0, where);
    in.params.g = s.g;
    if (s.physical()) {
      in.params.h_star = num(e, "H_star", where);
      in.params.v_star = num(e, "V_star", where);
    }
    if (!(in.params.length > 0.0)) bad(where + "/length", "must be positive");
    s.tree.final_node[i - 1] = in.to;
  }
  if (tree.contains("left")) {
    const json& left = tree.at("left");
    const auto name = left.is_string() ? left.get<std::string>() : std::string();
    if (name == "feedback") s.left = LeftControl::feedback;
    else if (name == "reflection") s.left = LeftControl::reflection;
    else if (name == "flow_rate") s.left = LeftControl::flow_rate;
    else bad("/tree/left", "expected \"feedback\", \"reflection\" or \"flow_rate\"");
  }
  if (!s.physical() && !s.single_edge()) bad("/tree", "generic systems take exactly one edge");
  if (s.left != LeftControl::feedback && !s.single_edge()) {
    bad("/tree/left", "only single-edge scenarios choose the left boundary");
  }
  if (s.left == LeftControl::flow_rate && !s.physical()) {
    bad("/tree/left", "flow_rate needs a Saint-Venant system");
  }

  const json& init = need(doc, "initial", "");
  for (auto& in : s.edges) {
    const std::string key = std::to_string(in.id);
    const std::string where = "/initial/" + key;
    const json& e = need(init, key.c_str(), "/initial");
    const char* a = s.physical() ? "H" : "u";
    const char* b = s.physical() ? "V" : "v";
    try {
      in.first = parse_profile(need(e, a, where), in.params.length);
      in.second = parse_profile(need(e, b, where), in.params.length);
    } catch (const Error& err) {
      bad(where, err.what());
    }
  }

  const json& fb = need(doc, "feedback", "");
  try {
    s.feedback = feedback::PowerFeedback(num(fb, "K", "/feedback"), num(fb, "gamma", "/feedback"));
  } catch (const Error& err) {
    if (err.kind() == ErrorKind::ScenarioError) throw;
    bad("/feedback", err.what());
  }

  const json& grid = need(doc, "grid", "");
  s.nx = count(grid, "nx", "/grid");
  if (grid.contains("nt")) {
    s.nt = count(grid, "nt", "/grid");
  } else if (grid.contains("cfl")) {
    s.cfl = num(grid, "cfl", "/grid");
    if (!(*s.cfl > 0.0)) bad("/grid/cfl", "must be positive");
  } else {
    bad("/grid", "needs \"nt\" or \"cfl\"");
  }

  if (doc.contains("run")) {
    const json& run = doc.at("run");
    if (run.contains("tol") && !run.at("tol").is_null()) s.tol = num(run, "tol", "/run");
    if (run.contains("max_iter")) {
      if (!run.at("max_iter").is_number_integer() || run.at("max_iter").get<long long>() < 1) {
        bad("/run/max_iter", "expected a positive integer");
      }
      s.max_iter = run.at("max_iter").get<std::size_t>();
    }
    if (run.contains("horizon") && !run.at("horizon").is_null()) s.horizon = num(run, "horizon", "/run");
    s.extinction_tol = num_or(run, "extinction_tol", s.extinction_tol, "/run");
    s.coupling_tol = num_or(run, "coupling_tol", s.coupling_tol, "/run");
    if (run.contains("levels")) {
      s.levels.clear();
      for (double x : numbers(run.at("levels"), "/run/levels")) {
        if (x < 3) bad("/run/levels", "levels are node counts >= 3");
        s.levels.push_back(static_cast<std::size_t>(x));
      }
    }
  }
  if (s.tol && !(*s.tol > 0.0)) bad("/run/tol", "must be positive");
  if (s.horizon && !(*s.horizon > 0.0)) bad("/run/horizon", "must be positive");

  const auto rep = network::validate_tree(s.tree);
  if (!rep.valid) {
    std::string msg;
    for (const auto& v : rep.violations) msg += (msg.empty() ? "" : "; ") + v;
    bad("/tree", msg);
  }
  if (s.physical()) {
    for (const auto& in : s.edges) {
      try {
        in.params.validate();
      } catch (const Error& err) {
        bad("/tree/edges (id " + std::to_string(in.id) + ")", err.what());
      }
    }
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into line and column.
    const std::size_t pos = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < pos; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    const std::size_t start = text.rfind('\n', pos == 0 ? 0 : pos - 1);
    const std::size_t from = start == std::string::npos ? 0 : start + 1;
    const std::size_t end = text.find('\n', from);
    const std::string context = text.substr(from, end == std::string::npos ? std::string::npos : end - from);
    throw Error(ErrorKind::ScenarioError, path.string() + ":" + std::to_string(line) + ":" +
                                              std::to_string(col) + ": malformed JSON\n  " +
                                              context + "\n  " + std::string(col > 1 ? col - 1 : 0, ' ') +
                                              "^");
  }
  return parse_scenario(doc);
}

std::pair<Profile, Profile> riemann_data(const Scenario& s, int edge) {
  const EdgeInput& in = s.edges.at(edge - 1);
  if (!s.physical()) return {in.first, in.second};
  return network::riemann_profiles({in.params, in.first, in.second});
}

double speed_floor(const Scenario& s) {
  if (!s.physical()) return s.system.speed_floor;
  std::vector<saint_venant::CanalParams> ps;
  for (const auto& e : s.edges) ps.push_back(e.params);
  return saint_venant::pick_c(ps);
}

quasilinear::DiagonalSystem edge_system(const Scenario& s, int edge, double c) {
  if (!s.physical()) return s.system;
  return saint_venant::diagonal_system(s.edges.at(edge - 1).params, c);
}

network::NetworkScenario to_network(const Scenario& s) {
  if (!s.physical()) throw Error(ErrorKind::InvalidArgument, "network runs need a Saint-Venant system");
  network::NetworkScenario ns;
  ns.tree = s.tree;
  for (const auto& e : s.edges) ns.edges.push_back({e.params, e.first, e.second});
  ns.feedback = s.feedback;
  ns.nx = s.nx;
  ns.nt = s.nt;
  ns.horizon = s.horizon;
  return ns;
}

double picard_tol(const Scenario& s) {
  if (s.tol) return *s.tol;
  return s.single_edge() ? 1e-8 : 1e-12;
}

}  // namespace hypstab::scenario
