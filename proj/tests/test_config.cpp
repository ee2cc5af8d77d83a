#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "extlab/config.hpp"
#include "extlab/report.hpp"

using namespace extlab;

TEST_CASE("parse sections, comments, repeated sections") {
    const char* text = R"(
# comment
[run]
command = trap   ; trailing comment
seed = 42
[obstacle]
kind = disc
center = 0.5 -1.25
radius = 1
[obstacle]
kind = disc
center = 4 0
radius = 1
)";
    const Config cfg = Config::parse_string(text, "t");
    CHECK(cfg.require("run").get_string("command") == "trap");
    CHECK(cfg.require("run").get_int("seed") == 42);
    CHECK(cfg.all("obstacle").size() == 2);
    const Vec2 c = cfg.all("obstacle")[0]->get_vec2("center");
    CHECK(c.x == doctest::Approx(0.5));
    CHECK(c.y == doctest::Approx(-1.25));
    CHECK(cfg.require("run").get_double("missing", 3.5) == doctest::Approx(3.5));
}

TEST_CASE("parse errors carry line numbers") {
    CHECK_THROWS_WITH_AS(Config::parse_string("[run\n", "f"),
                         doctest::Contains("f:1"), ValidationError);
    CHECK_THROWS_WITH_AS(Config::parse_string("[a]\nno_equals_here\n", "f"),
                         doctest::Contains("f:2"), ValidationError);
    CHECK_THROWS_WITH_AS(Config::parse_string("key = 1\n", "f"),
                         doctest::Contains("before any"), ValidationError);
    CHECK_THROWS_AS(Config::parse_string("[a]\nk = 1\nk = 2\n", "f"), ValidationError);
}

TEST_CASE("typed accessors validate") {
    const Config cfg = Config::parse_string("[a]\nx = nope\nlist = 1 2 3\n", "f");
    CHECK_THROWS_AS(cfg.require("a").get_double("x"), ValidationError);
    CHECK_THROWS_AS(cfg.require("a").get_string("absent"), ValidationError);
    CHECK_THROWS_AS(cfg.require("b"), ValidationError);
    const auto xs = cfg.require("a").get_ints("list");
    CHECK(xs == std::vector<int>{1, 2, 3});
}

TEST_CASE("format_double round trips") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0}) {
        CHECK(std::stod(format_double(v)) == v);
    }
}

TEST_CASE("csv quoting") {
    CsvWriter w;
    w.header({"a", "b"});
    w.begin_row();
    w.cell(1.5);
    w.cell(std::string("x,\"y\""));
    w.end_row();
    CHECK(w.str() == "a,b\n1.5,\"x,\"\"y\"\"\"\n");
}
