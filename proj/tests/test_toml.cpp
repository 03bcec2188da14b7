#include <catch2/catch_amalgamated.hpp>

#include "sagda/toml.hpp"

using namespace sagda;
using nlohmann::json;

TEST_CASE("toml scalars, tables and comments") {
    const char* text = R"(
# weather generator settings
seed = 42
name = "demo run"
ratio = 0.75
enabled = true
start = 2020-01-01

[weather]
t_mean = 18.5
t_amp = 8   # degrees
)";
    json j = parse_toml(text);
    REQUIRE(j["seed"] == 42);
    REQUIRE(j["name"] == "demo run");
    REQUIRE(j["ratio"] == 0.75);
    REQUIRE(j["enabled"] == true);
    REQUIRE(j["start"] == "2020-01-01");
    REQUIRE(j["weather"]["t_mean"] == 18.5);
    REQUIRE(j["weather"]["t_amp"] == 8);
}

TEST_CASE("toml nested and multiline arrays") {
    const char* text = R"(
seasons = [["A", 0.7], ["B", 0.3]]
bounds = [
  0.0,
  200.0,   # upper
]
)";
    json j = parse_toml(text);
    REQUIRE(j["seasons"][0][0] == "A");
    REQUIRE(j["seasons"][1][1] == 0.3);
    REQUIRE(j["bounds"] == json({0.0, 200.0}));
}

TEST_CASE("toml inline tables and arrays of tables") {
    const char* text = R"(
point = { x = 1, y = 2.5, label = 'raw' }

[[rules]]
column = "ph"
lo = 0.0
hi = 14.0

[[rules]]
column = "rain_mm"
lo = 0.0
)";
    json j = parse_toml(text);
    REQUIRE(j["point"]["x"] == 1);
    REQUIRE(j["point"]["label"] == "raw");
    REQUIRE(j["rules"].size() == 2);
    REQUIRE(j["rules"][1]["column"] == "rain_mm");
}

TEST_CASE("toml dotted headers create nested tables") {
    json j = parse_toml("[a.b]\nx = 1\n[a.c]\ny = 2\n");
    REQUIRE(j["a"]["b"]["x"] == 1);
    REQUIRE(j["a"]["c"]["y"] == 2);
}

TEST_CASE("toml string escapes") {
    json j = parse_toml(R"(s = "line\nbreak \"quoted\" back\\slash")");
    REQUIRE(j["s"] == "line\nbreak \"quoted\" back\\slash");
}

TEST_CASE("toml parse errors carry line numbers") {
    using Catch::Matchers::ContainsSubstring;
    REQUIRE_THROWS_MATCHES(parse_toml("x = \n"), error,
                           Catch::Matchers::MessageMatches(ContainsSubstring(":1:")));
    REQUIRE_THROWS_AS(parse_toml("x = 1\nx = 2\n"), error);
    REQUIRE_THROWS_AS(parse_toml("x = [1, 2\n"), error);
    REQUIRE_THROWS_AS(parse_toml("x = \"unterminated\n\""), error);
    REQUIRE_THROWS_AS(parse_toml("x = 1 y = 2\n"), error);
    REQUIRE_THROWS_AS(parse_toml("x = nonsense!\n"), error);
}

TEST_CASE("config digest is stable under key reordering and spacing") {
    json a = parse_toml("x = 1\ny = 2\n");
    json b = parse_toml("y   = 2\n# comment\nx = 1\n");
    REQUIRE(config_digest(a) == config_digest(b));
    json c = parse_toml("x = 1\ny = 3\n");
    REQUIRE(config_digest(a) != config_digest(c));
    REQUIRE(config_digest(a).size() == 16);
}
