#include <doctest.h>
#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hypstab/cli.hpp"
#include "hypstab/error.hpp"
#include "hypstab/scenario.hpp"

using namespace hypstab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json canal_doc(double amplitude, std::size_t nx = 41, std::size_t nt = 161) {
  json h = amplitude == 0.0
               ? json(1.0)
               : json{{"type", "sine"}, {"offset", 1.0}, {"amplitude", amplitude}, {"flatten", 0.1}};
  return {{"system", {{"type", "saint_venant"}, {"g", 9.81}}},
          {"tree", {{"nodes", 2}, {"edges", {{{"id", 1}, {"to", 2}, {"length", 1}, {"H_star", 1}, {"V_star", 0.5}}}}}},
          {"initial", {{"1", {{"H", h}, {"V", 0.5}}}}},
          {"feedback", {{"K", 1}, {"gamma", 0.5}}},
          {"grid", {{"nx", nx}, {"nt", nt}}}};
}

json affine_doc(double amplitude, double frequency) {
  json p{{"type", "sine"}, {"amplitude", amplitude}, {"frequency", frequency}};
  return {{"system", {{"type", "affine"}, {"lambda", {1, 0.75, 0.25}}, {"mu", {-1, 0.25, 0.75}}, {"c", 0.97}}},
          {"tree", {{"nodes", 2}, {"edges", {{{"id", 1}, {"to", 2}}}}}},
          {"initial", {{"1", {{"u", p}, {"v", p}}}}},
          {"feedback", {{"K", 1}, {"gamma", 0.5}}},
          {"grid", {{"nx", 41}, {"nt", 161}}}};
}

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("hypstab_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name) << text;
    return path / name;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "hypstab");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("exit code mapping") {
  CHECK(cli::exit_code_for(ErrorKind::CoefficientSignLoss) == 2);
  CHECK(cli::exit_code_for(ErrorKind::CouplingResidualExceeded) == 2);
  CHECK(cli::exit_code_for(ErrorKind::NoConvergence) == 3);
  CHECK(cli::exit_code_for(ErrorKind::NewtonFailure) == 3);
  CHECK(cli::exit_code_for(ErrorKind::IoError) == 4);
  CHECK(cli::exit_code_for(ErrorKind::ScenarioError) == 4);
}

TEST_CASE("scenario parsing") {
  const auto s = scenario::parse_scenario(canal_doc(0.002));
  CHECK(s.physical());
  CHECK(s.single_edge());
  CHECK(s.edges[0].params.v_star == 0.5);
  CHECK(s.nx == 41);

  auto bad = canal_doc(0.002);
  bad["tree"]["edges"][0].erase("H_star");
  try {
    scenario::parse_scenario(bad);
    FAIL("expected ScenarioError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ScenarioError);
    CHECK(std::string(e.what()).find("/tree/edges/0") != std::string::npos);
  }

  auto missing = canal_doc(0.0);
  missing["initial"].erase("1");
  CHECK_THROWS_AS(scenario::parse_scenario(missing), Error);

  TempDir dir;
  const auto broken = dir.write("broken.json", "{\n  \"system\": {\n    \"type\": ,\n  }\n}\n");
  try {
    scenario::load_scenario(broken);
    FAIL("expected ScenarioError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ScenarioError);
    CHECK(std::string(e.what()).find("broken.json:3:") != std::string::npos);
  }
  try {
    scenario::load_scenario(dir.path / "nope.json");
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IoError);
  }
}

TEST_CASE("overrides") {
  auto s = scenario::parse_scenario(canal_doc(0.002));
  cli::apply_overrides(s, {std::size_t{21}, 1e-6, 2.5});
  CHECK(s.nx == 21);
  CHECK(*s.tol == 1e-6);
  CHECK(cli::default_horizon(s) == 2.5);
  CHECK_THROWS_AS(cli::apply_overrides(s, {std::size_t{1}, {}, {}}), Error);
}

TEST_CASE("verify") {
  const auto eq = cli::verify(scenario::parse_scenario(canal_doc(0.0)));
  CHECK(eq.all_pass);
  CHECK(eq.edges[0].margin_w1 < 1e-100);

  const auto sv = cli::verify(scenario::parse_scenario(canal_doc(0.002)));
  CHECK(sv.all_pass);
  CHECK(sv.edges[0].margin_w1 < 1.0);

  const auto fail = cli::verify(scenario::parse_scenario(affine_doc(0.5, 2.0)));
  CHECK_FALSE(fail.all_pass);
  CHECK(fail.edges[0].margin_w1 > 1.0);
  const std::string text = cli::format_verify(fail);
  CHECK(text.find("W1  FAIL") != std::string::npos);
  CHECK(cli::to_json(fail)["edges"][0]["W1_margin"].get<double>() > 1.0);
}

TEST_CASE("simulate writes artifacts") {
  TempDir dir;
  const auto s = scenario::parse_scenario(canal_doc(0.0));
  const auto run = cli::simulate(s);
  const auto files = cli::write_artifacts(run, s, dir.path / "out");
  CHECK(files.size() == 6);
  for (const char* name : {"edge_1_H.csv", "edge_1_V.csv", "edge_1_u.csv", "edge_1_v.csv",
                           "boundary_traces.csv", "report.json"})
    CHECK(fs::exists(dir.path / "out" / name));

  // equilibrium: constant fields; first row and column are coordinates
  std::ifstream in(dir.path / "out" / "edge_1_H.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("t\\x,0,", 0) == 0);
  int rows = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    while (std::getline(ss, cell, ',')) CHECK(std::stod(cell) == 1.0);
    ++rows;
  }
  CHECK(rows == 161);

  const json rep = json::parse(slurp(dir.path / "out" / "report.json"));
  CHECK(rep["extinction_time"].get<double>() == 0.0);
  CHECK(rep["edges"][0]["picard_iterations"].get<int>() == 1);
  CHECK(rep["scenario"] == s.source);
}

TEST_CASE("single-canal report: extinction within the bound, deterministic output") {
  TempDir dir;
  const auto s = scenario::parse_scenario(canal_doc(0.001));
  cli::write_artifacts(cli::simulate(s), s, dir.path / "a");
  cli::write_artifacts(cli::simulate(s), s, dir.path / "b");
  const std::string ra = slurp(dir.path / "a" / "report.json");
  CHECK(ra == slurp(dir.path / "b" / "report.json"));
  CHECK(slurp(dir.path / "a" / "edge_1_u.csv") == slurp(dir.path / "b" / "edge_1_u.csv"));
  const json rep = json::parse(ra);
  const double c = rep["speed_floor"].get<double>();
  const double bound = 1.0 / c + rep["t_star"].get<double>();
  CHECK(rep["extinction_bound"].get<double>() == doctest::Approx(bound));
  CHECK(rep["extinction_time"].get<double>() <= bound + rep["time_step"].get<double>());
  CHECK(rep["extinct_within_bound"].get<bool>());
}

TEST_CASE("partial artifacts are removed on failure") {
  TempDir dir;
  const auto s = scenario::parse_scenario(canal_doc(0.0, 11, 21));
  auto run = cli::simulate(s);
  // a directory squatting on report.json makes the last write fail
  fs::create_directories(dir.path / "out" / "report.json");
  CHECK_THROWS_AS(cli::write_artifacts(run, s, dir.path / "out"), Error);
  CHECK_FALSE(fs::exists(dir.path / "out" / "edge_1_u.csv"));
  CHECK_FALSE(fs::exists(dir.path / "out" / "boundary_traces.csv"));
}

TEST_CASE("compare") {
  auto zero = scenario::parse_scenario(affine_doc(0.0, 0.5));
  zero.levels = {21, 41};
  for (const auto& row : cli::compare(zero)) {
    CHECK(row.l1 == 0.0);
    CHECK(row.linf == 0.0);
  }
  json lin = affine_doc(0.05, 0.5);
  lin["system"]["lambda"] = {1, 0, 0};
  lin["system"]["mu"] = {-1, 0, 0};
  lin["system"]["c"] = 1;
  lin["run"] = {{"levels", {101, 201, 401}}};
  const auto rows = cli::compare(scenario::parse_scenario(lin));
  REQUIRE(rows.size() == 3);
  CHECK(rows[2].linf <= 0.01);
  CHECK(rows[0].l1 / rows[1].l1 == doctest::Approx(2.0).epsilon(0.3));
  CHECK(rows[1].l1 / rows[2].l1 == doctest::Approx(2.0).epsilon(0.3));
  CHECK(cli::format_compare(rows).find("L1/dx") != std::string::npos);

  auto net = canal_doc(0.0);
  net["tree"] = {{"nodes", 3},
                 {"edges", {{{"id", 1}, {"to", 2}, {"H_star", 1}, {"V_star", 0.5}},
                            {{"id", 2}, {"to", 3}, {"H_star", 1}, {"V_star", 0.5}}}}};
  net["initial"]["2"] = {{"H", 1}, {"V", 0.5}};
  CHECK_THROWS_AS(cli::compare(scenario::parse_scenario(net)), Error);
}

TEST_CASE("command line") {
  TempDir dir;
  const auto eq = dir.write("eq.json", canal_doc(0.0, 11, 21).dump());
  const auto bad = dir.write("bad.json", affine_doc(0.5, 2.0).dump());
  const auto garbage = dir.write("garbage.json", "{ not json");
  CHECK(run_cli({"verify", eq.string()}) == 0);
  CHECK(run_cli({"verify", bad.string()}) == 2);
  CHECK(run_cli({"verify", (dir.path / "missing.json").string()}) == 4);
  CHECK(run_cli({"verify", garbage.string()}) == 4);
  CHECK(run_cli({"simulate", bad.string(), "--out", (dir.path / "o1").string()}) == 2);
  CHECK_FALSE(fs::exists(dir.path / "o1" / "report.json"));
  CHECK(run_cli({"simulate", eq.string(), "--out", (dir.path / "o2").string(), "--grid-nx", "9",
                 "--horizon", "0.5"}) == 0);
  const json rep = json::parse(slurp(dir.path / "o2" / "report.json"));
  CHECK(rep["horizon"].get<double>() == 0.5);
  CHECK(run_cli({"compare", eq.string(), "--out", (dir.path / "o3").string()}) == 0);
  CHECK(fs::exists(dir.path / "o3" / "compare.json"));
  CHECK(run_cli({"frobnicate"}) != 0);

  // a scenario that cannot converge in one step maps to exit code 3
  json slow = affine_doc(0.02, 0.5);
  slow["run"] = {{"max_iter", 1}};
  const auto slow_path = dir.write("slow.json", slow.dump());
  CHECK(run_cli({"simulate", slow_path.string(), "--force", "--out", (dir.path / "o4").string()}) == 3);
}
