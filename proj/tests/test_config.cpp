#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <limits>
#include <string>

#include "mallows/config.hpp"
#include "mallows/io.hpp"
#include "mallows/random.hpp"

using namespace mallows;
using nlohmann::json;

namespace {

json load(const std::string& name) { return json::parse(io::read_file(std::string(MALLOWS_DOCS) + "/" + name)); }

std::string error_text(const json& j) {
  try {
    config::parse_experiment(j);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::config);
    return e.what();
  }
  FAIL("expected a config error");
  return {};
}

json minimal() {
  return json::parse(R"({"alpha": 1.5, "model": {"type": "additive_noise", "noise": {"type": "point"}},
                         "n_ladder": [10, 100]})");
}

}  // namespace

TEST_CASE("every shipped example parses", "[config]") {
  std::size_t seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(MALLOWS_DOCS)) {
    if (entry.path().extension() != ".json") continue;
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(config::parse_experiment(json::parse(io::read_file(entry.path().string()))));
    ++seen;
  }
  CHECK(seen >= 4);
}

TEST_CASE("parsed fields land in the config", "[config]") {
  const auto c = config::parse_experiment(load("converge_sub_custom.json"));
  CHECK(c.alpha() == 0.8);
  CHECK(c.stable.beta == 0.5);
  CHECK(c.n_ladder == std::vector<std::size_t>{100, 1000, 10000});
  CHECK(c.lindeberg_mode == LindebergMode::exact);
  REQUIRE(std::holds_alternative<CustomGaps>(c.model));
  CHECK(std::get<CustomGaps>(c.model).laws[0].size() == 3);
}

TEST_CASE("defaults fill omitted fields", "[config]") {
  const auto c = config::parse_experiment(minimal());
  CHECK(c.replicates == 5);
  CHECK(c.samples_per_distance == 1000);
  CHECK(c.reference == ReferenceMode::coupled);
  CHECK(c.stable.sigma == 1.0);
}

TEST_CASE("all schema violations are listed together", "[config]") {
  auto j = minimal();
  j["n_ladder"] = {100, 10};
  j["replicates"] = 2;
  j["colour"] = "blue";
  j["model"]["noise"] = {{"type", "uniform"}, {"lo", 1.0}};
  const auto text = error_text(j);
  CHECK(text.find("n_ladder") != std::string::npos);
  CHECK(text.find("replicates") != std::string::npos);
  CHECK(text.find("colour") != std::string::npos);
  CHECK(text.find("model.noise") != std::string::npos);
}

TEST_CASE("missing required fields are reported", "[config]") {
  const auto text = error_text(json::object());
  CHECK(text.find("alpha") != std::string::npos);
  CHECK(text.find("model") != std::string::npos);
  CHECK(text.find("n_ladder") != std::string::npos);
}

TEST_CASE("alpha belongs at the top level", "[config]") {
  auto j = minimal();
  j["stable"] = {{"alpha", 1.2}};
  CHECK(error_text(j).find("stable.alpha") != std::string::npos);
}

TEST_CASE("exact mode requires closed-form gaps", "[config]") {
  auto j = minimal();
  j["model"]["noise"] = {{"type", "stable"}, {"alpha", 1.5}};
  j["lindeberg_mode"] = "exact";
  CHECK(error_text(j).find("lindeberg_mode") != std::string::npos);
}

TEST_CASE("resolved configs round-trip", "[config]") {
  for (const char* name : {"converge_uniform.json", "converge_sub_custom.json", "lindeberg_pareto.json"}) {
    const auto first = config::to_json(config::parse_experiment(load(name)));
    const auto second = config::to_json(config::parse_experiment(first));
    CHECK(first == second);
  }
}

TEST_CASE("a run manifest is accepted as a config", "[config]") {
  const auto inner = config::to_json(config::parse_experiment(load("converge_zero_gap.json")));
  const json manifest = {{"tool_version", io::kToolVersion}, {"command", "converge"}, {"config", inner},
                         {"seed", 7}, {"outputs", json::object()}};
  CHECK(config::to_json(config::parse_experiment(manifest)) == inner);
}

TEST_CASE("17-digit formatting round-trips doubles", "[io][property]") {
  Rng rng(123);
  for (int k = 0; k < 10000; ++k) {
    const double v = std::ldexp(rng.uniform(-1.0, 1.0), static_cast<int>(rng() % 600) - 300);
    REQUIRE(std::strtod(io::format_double(v).c_str(), nullptr) == v);
  }
  CHECK(io::format_double(0.1) == "0.10000000000000001");
  CHECK(io::parse_column(io::format_double(std::numeric_limits<double>::denorm_min()), "t")[0] ==
        std::numeric_limits<double>::denorm_min());
}

TEST_CASE("column parsing", "[io]") {
  CHECK(io::parse_column("y\n1\n2.5\n\n-3e2\n", "t") == std::vector<double>{1.0, 2.5, -300.0});
  CHECK(io::parse_column("4\r\n 5\r\n", "t") == std::vector<double>{4.0, 5.0});
  CHECK_THROWS_AS(io::parse_column("1\nabc\n", "t"), Error);
  CHECK_THROWS_AS(io::parse_column("1\n2x\n", "t"), Error);
  CHECK_THROWS_AS(io::parse_column("header\n", "t"), Error);
}

TEST_CASE("checksums", "[io]") {
  CHECK(io::fnv1a64("") == "fnv1a64:cbf29ce484222325");
  CHECK(io::fnv1a64("a") == "fnv1a64:af63dc4c8601ec8c");
}
