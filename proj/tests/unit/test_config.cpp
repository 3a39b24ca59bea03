#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <string>

#include "shiftshare/config.hpp"
#include "shiftshare/errors.hpp"

using namespace shiftshare;
using nlohmann::json;

namespace {

std::string message_of(const json& j) {
  try {
    RunConfig::from_json(j);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::InvalidConfig);
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("defaults") {
  const auto c = RunConfig::from_json(json::object());
  CHECK(c.m1 == 599);
  CHECK(c.eps == 0.01);
  CHECK(c.bootstrap == 199);
  CHECK(c.alpha == 0.1);
  CHECK(c.kappa == 1.19);
  CHECK(c.phi.size() == 30);
  CHECK(c.k2.qx.dim() == 8);
  const auto pc = c.pipeline();
  CHECK(pc.grid.m1 == 599);
  CHECK(pc.grid_points == 50);
}

TEST_CASE("errors carry the field path") {
  CHECK(message_of({{"m1", 1}}).find("m1") != std::string::npos);
  CHECK(message_of({{"alpha", 1.5}}).find("alpha") != std::string::npos);
  CHECK(message_of({{"policy", {{"kappa", 1.0}}}}).find("policy.kappa") != std::string::npos);
  CHECK(message_of({{"policy", {{"phi", {0.1, -0.2}}}}}).find("policy.phi") != std::string::npos);
  const auto deg = message_of({{"k2", {{"q_x", {{"degree", 5}}}}}});
  CHECK(deg.rfind("InvalidConfig: k2", 0) == 0);
  CHECK(deg.find("InvalidConfig: InvalidConfig") == std::string::npos);
  CHECK(message_of({{"grid", {{"lo", 0.9}, {"hi", 0.1}}}}).find("grid") != std::string::npos);
  CHECK(message_of({{"eps", "small"}}).find("eps") != std::string::npos);
  CHECK(message_of({{"k1", {{"kind", "cubic"}}}}).find("k1") != std::string::npos);
  CHECK(message_of(json::array()).find("root") != std::string::npos);
}

TEST_CASE("round trip and hash") {
  json j = {{"m1", 99}, {"seed", 5}, {"policy", {{"phi", {0.1, 0.2}}, {"kappa", 1.5}}}, {"out", "/tmp/a"}};
  const auto c = RunConfig::from_json(j);
  const auto back = RunConfig::from_json(c.to_json());
  CHECK(back.m1 == 99);
  CHECK(back.phi == std::vector<double>{0.1, 0.2});
  CHECK(back.hash() == c.hash());
  CHECK(c.hash().size() == 16);

  j["out"] = "/tmp/b";
  j["threads"] = 8;
  CHECK(RunConfig::from_json(j).hash() == c.hash());
  j["seed"] = 6;
  CHECK(RunConfig::from_json(j).hash() != c.hash());

  // FNV-1a reference values
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("relative paths resolve against the config directory") {
  const auto dir = std::filesystem::temp_directory_path() / "shiftshare_config_test";
  std::filesystem::create_directories(dir);
  const auto file = dir / "run.json";
  {
    std::ofstream out(file);
    out << R"({"data": {"panel": "panel.csv", "sectors": "/abs/sectors.csv"}, "out": "res"})";
  }
  const auto c = RunConfig::load(file);
  CHECK(c.panel == dir / "panel.csv");
  CHECK(c.sectors == std::filesystem::path("/abs/sectors.csv"));
  CHECK(c.out == dir / "res");

  {
    std::ofstream out(file);
    out << "{ not json";
  }
  CHECK_THROWS_AS(RunConfig::load(file), Error);
  try {
    RunConfig::load(dir / "missing.json");
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::Io);
  }
  std::filesystem::remove_all(dir);
}

}
