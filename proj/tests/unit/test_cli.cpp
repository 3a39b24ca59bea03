#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(SHIFTSHARE_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

// One simulated panel shared by the tests in this file.
const fs::path& workspace() {
  static const fs::path dir = [] {
    const auto d = fs::temp_directory_path() / "shiftshare_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    const int rc = run("simulate --dgp linear_gaussian --n 600 --seed 3 --draws 20000 --out " + (d / "sim").string());
    REQUIRE(rc == 0);
    return d;
  }();
  return dir;
}

std::string config() { return (workspace() / "sim" / "config.json").string(); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("simulate writes the panel, sectors, oracle and a runnable config") {
  const auto sim = workspace() / "sim";
  for (const char* f : {"panel.csv", "sectors.csv", "oracle.json", "config.json"}) CHECK(fs::exists(sim / f));
  const auto oracle = read_json(sim / "oracle.json");
  CHECK(oracle.at("ad").get<double>() == doctest::Approx(2.0));
}

TEST_CASE("estimate recovers the average derivative") {
  const auto out = workspace() / "est";
  REQUIRE(run("--config " + config() + " --m1 99 --out " + out.string() + " estimate") == 0);
  const auto est = read_json(out / "estimates.json");
  CHECK(std::abs(est.at("ad").get<double>() - 2.0) <= 0.1);
  for (const char* f : {"asf.csv", "lar.csv", "quantile_grid.csv", "pi2.csv", "histogram.csv"}) {
    CHECK(fs::exists(out / f));
  }
}

TEST_CASE("input errors exit with 2") {
  CHECK(run("--config " + (workspace() / "nope.json").string() + " estimate") == 2);
  CHECK(run("estimate") == 2);  // no panel configured
  const auto bad = workspace() / "bad.json";
  {
    std::ofstream o(bad);
    o << R"({"m1": 1})";
  }
  CHECK(run("--config " + bad.string() + " estimate") == 2);
  {
    std::ofstream o(bad);
    o << R"({"data": {"panel": "missing.csv"}})";
  }
  CHECK(run("--config " + bad.string() + " estimate") == 2);
  CHECK(run("simulate --dgp cubic --out " + (workspace() / "x").string()) == 2);
  CHECK(run("no-such-command") == 2);
  CHECK(run("--help") == 0);
}

TEST_CASE("bootstrap is byte-identical across thread counts") {
  const auto a = workspace() / "boot1", b = workspace() / "boot2";
  const std::string common = "--config " + config() + " --m1 39 --bootstrap 4 --seed 11 ";
  REQUIRE(run(common + "--threads 1 --out " + a.string() + " bootstrap") == 0);
  REQUIRE(run(common + "--threads 2 --out " + b.string() + " bootstrap") == 0);
  CHECK(fs::exists(a / "bands.json"));
  CHECK(slurp(a / "bands.json") == slurp(b / "bands.json"));
  CHECK(slurp(a / "lar.csv") == slurp(b / "lar.csv"));
  const auto bands = read_json(a / "bands.json");
  CHECK(bands.contains("lar"));
  CHECK(read_json(a / "estimates.json").at("bands") == bands);
}

TEST_CASE("policy ladder has one row per tariff level") {
  const auto out = workspace() / "pol";
  REQUIRE(run("--config " + config() + " --m1 39 --bootstrap 0 --out " + out.string() + " policy") == 0);
  const auto pe = read_json(out / "pe.json");
  REQUIRE(pe.at("ladder").size() == 30);
  const auto oracle = read_json(workspace() / "sim" / "oracle.json");
  const double first = pe.at("ladder")[0].at("gamma").get<double>();
  const double truth = oracle.at("pe")[0].at("gamma").get<double>();
  CHECK(std::abs(first - truth) <= 0.05);
}

TEST_CASE("compare-2sls writes the benchmark and first-stage outputs") {
  const auto out = workspace() / "cmp";
  REQUIRE(run("--config " + config() + " --m1 39 --out " + out.string() + " compare-2sls") == 0);
  CHECK(fs::exists(out / "compare_2sls.json"));
  CHECK(fs::exists(out / "first_stage.json"));
  CHECK(fs::exists(out / "asf_2sls.csv"));
  const auto cmp = read_json(out / "compare_2sls.json");
  CHECK(!cmp.dump().empty());
}

}
