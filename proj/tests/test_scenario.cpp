#include <filesystem>
#include <string>

#include "doctest.h"
#include "udw/scenario.hpp"

using namespace udw::scenario;

namespace {

const std::string dir = UDW_SCENARIO_DIR;

ScenarioError error_of(const std::string& text) {
    try {
        parse_scenario(text, "t.json");
    } catch (const ScenarioError& e) {
        return e;
    }
    FAIL("expected a ScenarioError");
    return ScenarioError("", "");
}

}  // namespace

TEST_CASE("committed scenarios parse") {
    std::size_t n = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() != ".json") continue;
        INFO(entry.path().string());
        CHECK_NOTHROW(load_scenario(entry.path().string()));
        ++n;
    }
    CHECK(n >= 6);
}

TEST_CASE("default scenario file matches the built-in default") {
    const auto file = load_scenario(dir + "/default.json");
    const auto builtin = default_config();
    REQUIRE(file.detectors.size() == builtin.detectors.size());
    for (std::size_t i = 0; i < file.detectors.size(); ++i) {
        const auto &a = file.detectors[i].spec, &b = builtin.detectors[i].spec;
        CHECK(a.label == b.label);
        CHECK(a.position == b.position);
        CHECK(a.coupling == b.coupling);
        CHECK(a.gap == b.gap);
        CHECK(a.switching.duration == b.switching.duration);
        CHECK(a.smearing.radius == b.smearing.radius);
    }
    CHECK(file.lattice.sites == builtin.lattice.sites);
    CHECK(file.lattice.n_max == builtin.lattice.n_max);
    CHECK(file.equality_tol == 1e-9);
    CHECK(file.completeness_tol == 1e-8);
}

TEST_CASE("geometry-only scenarios") {
    const auto c = load_scenario(dir + "/geometry_d4.json");
    CHECK(c.geometry_only);
    CHECK(c.dimension == 4);
    const auto ms = measurement_regions(c);
    REQUIRE(ms.size() == 1);
    CHECK_NOTHROW(ms[0].validate());
    CHECK_THROWS_AS(build_scenario(c), ScenarioError);
}

TEST_CASE("schema errors carry a location") {
    auto e = error_of(R"({"detectors": [], "bogus": 1})");
    CHECK(e.where().find("/bogus") != std::string::npos);

    e = error_of("{\n  \"detectors\": [\n    {\"label\": \"A\",}\n  ]\n}\n");
    CHECK(e.line() == 3);
    CHECK(e.column() > 1);

    e = error_of(R"({"detectors": [{"label": "A", "coupling": "strong"}]})");
    CHECK(e.where().find("/detectors/0/coupling") != std::string::npos);

    e = error_of(R"({"detectors": [{"label": "A"}], "record": [{"label": "Z", "mode": "selective"}]})");
    CHECK(e.where().find("/record/0/label") != std::string::npos);

    e = error_of(R"({"detectors": [{"label": "A"}, {"label": "A", "position": [3]}]})");
    CHECK(e.where().find("/detectors/1/label") != std::string::npos);

    e = error_of(R"({"detectors": [{"label": "A"}], "record": [{"label": "A", "mode": "maybe"}]})");
    CHECK(e.where().find("/record/0/mode") != std::string::npos);

    e = error_of(R"({"dimension": 3, "detectors": []})");
    CHECK(e.where().find("/dimension") != std::string::npos);

    e = error_of(R"({"dimension": 3, "geometry_only": true, "detectors": [{"label": "A"}]})");
    CHECK(e.where().find("/detectors/0") != std::string::npos);
}

TEST_CASE("dimension overflow names the product") {
    const auto e = error_of(R"({"field": {"sites": 12, "n_max": 5}, "detectors": []})");
    CHECK(e.where().find("/field") != std::string::npos);
    const std::string what = e.what();
    CHECK(what.find("(6)^12") != std::string::npos);
}

TEST_CASE("points and tolerances") {
    const auto c = parse_scenario(R"({"detectors": [], "points": [[0, 1], [2, 3]],
        "tolerances": {"equality": 1e-7}, "seed": 9, "samples": 20})");
    REQUIRE(c.points.size() == 2);
    CHECK(c.points[1].t == 2.0);
    CHECK(c.points[1].x == std::vector<double>{3.0});
    CHECK(c.equality_tol == 1e-7);
    CHECK(c.completeness_tol == 1e-8);
    CHECK(c.seed == 9);
    CHECK(c.samples == 20);
    CHECK_THROWS_AS(parse_scenario(R"({"detectors": [], "points": [[0, 1, 2]]})"), ScenarioError);
    CHECK_THROWS_AS(parse_scenario(R"({"detectors": [], "samples": 0})"), ScenarioError);
}
