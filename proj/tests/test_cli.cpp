#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"

using nlohmann::json;
using oconnell::cli::run;

namespace {

struct Output {
  int code;
  std::string out, err;
};

Output call(std::vector<std::string> args) {
  std::ostringstream o, e;
  int code = run(args, o, e);
  return {code, o.str(), e.str()};
}

json call_json(std::vector<std::string> args) {
  args.push_back("--format");
  args.push_back("json");
  auto r = call(args);
  REQUIRE(r.code == 0);
  return json::parse(r.out);
}

double cell(const json& j, int row, const std::string& column) {
  const auto& cols = j["columns"];
  for (std::size_t i = 0; i < cols.size(); ++i)
    if (cols[i] == column) return j["rows"][row][i].get<double>();
  FAIL("no column " << column);
  return 0;
}

std::string temp_path(const char* name) { return std::string("/tmp/oconnell_test_cli_") + name; }

}  // namespace

TEST_CASE("fn besselk at a reference point") {
  auto j = call_json({"fn", "besselk", "--order", "0", "--x", "1"});
  CHECK(cell(j, 0, "value") == doctest::Approx(0.42102443824070834).epsilon(1e-12));
  CHECK(j["format_version"] == 1);
  CHECK(j["command"] == "fn besselk");
}

TEST_CASE("heat density in csv") {
  auto r = call({"density", "heat", "--t", "1", "--x", "0", "--y", "0"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("# format_version: 1\n# command: density heat\n# config: ", 0) == 0);
  std::istringstream is(r.out);
  std::string line, last;
  while (std::getline(is, line))
    if (!line.empty()) last = line;
  std::vector<std::string> cells;
  std::istringstream ls(last);
  for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
  REQUIRE(cells.size() == 6);
  CHECK(std::stod(cells[3]) == doctest::Approx(0.3989422804014327).epsilon(1e-12));
}

TEST_CASE("grids produce one row per point") {
  auto j = call_json({"fn", "gamma", "--from", "1", "--to", "5", "--steps", "5"});
  REQUIRE(j["rows"].size() == 5);
  CHECK(cell(j, 4, "value") == doctest::Approx(24.0));
  CHECK(call({"fn", "psi0", "--n", "2", "--from", "0", "--to", "1", "--steps", "3"}).code == 2);
}

TEST_CASE("drift emits one row per component") {
  auto j = call_json({"fn", "drift", "--n", "3", "--x", "0,1,2"});
  CHECK(j["rows"].size() == 3);
}

TEST_CASE("usage errors exit with 2") {
  CHECK(call({}).code == 2);
  CHECK(call({"fn", "nosuch", "--x", "1"}).code == 2);
  CHECK(call({"density", "km", "--n", "2", "--x", "0", "--y", "0,1"}).code == 2);
  CHECK(call({"density", "heat", "--t", "abc", "--x", "0", "--y", "0"}).code == 2);
  CHECK(call({"simulate", "fk", "--n", "2", "--x", "0,1", "--dt", "-1"}).code == 2);
  CHECK(call({"verify", "--suite", "nosuch"}).code == 2);
}

TEST_CASE("domain errors report json in json mode") {
  auto r = call({"density", "heat", "--t", "-1", "--x", "0", "--y", "0", "--format", "json"});
  CHECK(r.code == 2);
  auto j = json::parse(r.out);
  CHECK(j["error"]["type"] == "domain");
}

TEST_CASE("config file values are overridden by flags") {
  const auto path = temp_path("config.json");
  {
    std::ofstream os(path);
    os << R"({"t": 2, "x": [0], "y": [1]})";
  }
  auto a = call_json({"density", "heat", "--config", path});
  CHECK(a["config"]["t"] == 2.0);
  CHECK(cell(a, 0, "value") == doctest::Approx(std::exp(-0.25) / std::sqrt(4 * M_PI)));
  auto b = call_json({"density", "heat", "--config", path, "--t", "1"});
  CHECK(b["config"]["t"] == 1.0);
  CHECK(!b["config"].contains("config"));
  std::remove(path.c_str());
}

TEST_CASE("simulate output is independent of the worker count") {
  auto runner = oconnell::cli::in_process_runner();
  const std::vector<std::string> args{"fk", "--n", "2", "--x", "0,2", "--paths", "400", "--dt", "0.01", "--seed", "3"};
  const auto one = runner(args, 1);
  REQUIRE(!one.empty());
  CHECK(runner(args, 3) == one);
  CHECK(one.find("thread") == std::string::npos);
}

TEST_CASE("samples and plot data files") {
  const auto samples = temp_path("samples.csv"), plot = temp_path("plot.csv");
  auto r = call({"simulate", "sde_oconnell", "--n", "2", "--x", "0,2", "--paths", "50", "--dt", "0.01",
                 "--samples-out", samples, "--emit-plot-data", plot, "--bins", "10"});
  REQUIRE(r.code == 0);
  std::ifstream s(samples), p(plot);
  int lines = 0;
  std::string line;
  while (std::getline(s, line)) lines += line.empty() || line[0] == '#' ? 0 : 1;
  CHECK(lines == 51);
  lines = 0;
  while (std::getline(p, line)) lines += line.empty() || line[0] == '#' ? 0 : 1;
  CHECK(lines == 21);
  std::remove(samples.c_str());
  std::remove(plot.c_str());
}

TEST_CASE("verify runs a single quadrature criterion") {
  auto r = call({"verify", "--criterion", "4"});
  CHECK(r.code == 0);
  CHECK(r.out.find("PASS") != std::string::npos);
}
