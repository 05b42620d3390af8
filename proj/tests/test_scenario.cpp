#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "pmfp/scenario.hpp"

using namespace pmfp;

namespace {

/// Writes `text` to a temp file and loads it as a scenario.
Scenario load_from_text(const std::string& text) {
    std::string path = "pmfp_scenario_test.json";
    {
        std::ofstream out(path);
        out << text;
    }
    try {
        Scenario s = load_scenario(path);
        std::remove(path.c_str());
        return s;
    } catch (...) {
        std::remove(path.c_str());
        throw;
    }
}

}  // namespace

TEST_CASE("built-in scenarios load by name") {
    Scenario s = load_scenario("example2-repaired");
    CHECK(s.name == "example2-repaired");
    REQUIRE(s.carrier.intervals().size() == 2);
    CHECK(s.carrier.intervals()[0].lo == 0.0);
    CHECK(s.carrier.intervals()[0].hi == 2.0);
    CHECK(s.carrier.intervals()[1].lo == 3.0);
    CHECK(s.metric_source == "max");
    REQUIRE(s.map.has_value());
    CHECK(apply_map(*s.map, s.carrier, 3.0) == 1.4);
    CHECK(apply_map(*s.map, s.carrier, 1.5) == 0.75);
    REQUIRE(s.phi.has_value());
    CHECK(s.phi->family() == PhiFamily::rational);
    CHECK(s.condition == ConditionTag::eq8);
    CHECK(s.starts == std::vector<double>{4.0, 3.0, 2.0, 1.0, 0.37});

    // The unrepaired variant loads, but its map leaves the carrier on [3,4].
    Scenario paper = load_scenario("example2-paper");
    CHECK_THROWS_AS(apply_map(*paper.map, paper.carrier, 3.0), not_self_map_error);
    CHECK(apply_map(*paper.map, paper.carrier, 1.0) == 0.5);

    for (const std::string& name : builtin_scenario_names()) {
        CHECK(load_scenario(name).name == name);
    }
}

TEST_CASE("missing files are input errors") {
    CHECK_THROWS_AS(load_scenario("no-such-scenario-or-file.json"), input_error);
}

TEST_CASE("scenario files round-trip the built-ins") {
    for (const std::string& name : builtin_scenario_names()) {
        Scenario from_file = load_scenario(std::string(PMFP_SCENARIO_DIR) + "/" + name + ".json");
        Scenario builtin = *builtin_scenario(name);
        INFO(name);
        CHECK(from_file.name == builtin.name);
        CHECK(from_file.metric_source == builtin.metric_source);
        CHECK(from_file.starts == builtin.starts);
        CHECK(from_file.carrier.intervals().size() == builtin.carrier.intervals().size());
        CHECK(from_file.map.has_value() == builtin.map.has_value());
        CHECK(from_file.condition == builtin.condition);
        CHECK(to_string(from_file.carrier.completeness_tag()) ==
              to_string(builtin.carrier.completeness_tag()));
    }
}

TEST_CASE("a full scenario parses from JSON text") {
    Scenario s = load_from_text(R"json({
        "name": "demo",
        "carrier": {"intervals": [[0, 1]], "extra_points": [2.5], "completeness": "unknown"},
        "partial_metric": "max(x,y)",
        "map": [{"when": [0, 1], "expr": "x/2"}, {"when": [2.5, 2.5], "expr": "0"}],
        "phi": "t/(1+2*t)",
        "condition": {"kind": "eq9"},
        "starts": [1.0],
        "sampling": {"grid_step": 0.25, "orbit_depth": 8},
        "tolerances": {"eps_num": 1e-10, "tol": 1e-9, "agree_tol": 1e-7}
    })json");
    CHECK(s.name == "demo");
    CHECK(s.carrier.extra_points() == std::vector<double>{2.5});
    CHECK(s.phi_family == "custom");
    CHECK(s.phi->phi(1.0) == Catch::Approx(1.0 / 3.0).margin(1e-15));
    CHECK(s.condition == ConditionTag::eq9);
    CHECK(s.sampling.grid_step == 0.25);
    CHECK(s.sampling.orbit_depth == 8);
    CHECK(s.tolerances.eps_num == 1e-10);
    CHECK(s.tolerances.agree_tol == 1e-7);

    // The parsed metric expression evaluates like the builtin max.
    PartialMetricSpace space = s.space();
    CHECK(eval_p(space, 0.25, 1.0) == 1.0);
}

TEST_CASE("unknown fields are rejected with their path") {
    try {
        load_from_text(R"json({
            "name": "demo",
            "carrier": {"intervals": [[0, 1]], "intervalz": []},
            "partial_metric": "max"
        })json");
        FAIL("expected input_error");
    } catch (const input_error& e) {
        CHECK(std::string(e.what()).find("carrier.intervalz") != std::string::npos);
    }

    CHECK_THROWS_AS(load_from_text(R"json({"name": "x", "partial_metric": "max",
                                       "carrier": {"intervals": [[0,1]]},
                                       "unexpected": 1})json"),
                    input_error);
}

TEST_CASE("field validation catches the usual mistakes") {
    // carrier required
    CHECK_THROWS_AS(load_from_text(R"json({"name": "x", "partial_metric": "max"})json"), input_error);
    // malformed metric expression
    CHECK_THROWS_AS(load_from_text(R"json({"name": "x", "partial_metric": "x+(",
                                       "carrier": {"intervals": [[0,1]]}})json"),
                    input_error);
    // metric over undeclared variables
    CHECK_THROWS_AS(load_from_text(R"json({"name": "x", "partial_metric": "x+t",
                                       "carrier": {"intervals": [[0,1]]}})json"),
                    input_error);
    // bad condition kind
    CHECK_THROWS_AS(load_from_text(R"json({"name": "x", "partial_metric": "max",
                                       "carrier": {"intervals": [[0,1]]},
                                       "condition": {"kind": "eq7"}})json"),
                    input_error);
    // linear phi without alpha
    CHECK_THROWS_AS(load_from_text(R"json({"name": "x", "partial_metric": "max",
                                       "carrier": {"intervals": [[0,1]]},
                                       "phi": {"family": "linear"}})json"),
                    input_error);
    // interval with lo > hi
    CHECK_THROWS_AS(load_from_text(R"json({"name": "x", "partial_metric": "max",
                                       "carrier": {"intervals": [[2,1]]}})json"),
                    input_error);
    // not JSON at all
    CHECK_THROWS_AS(load_from_text("not json"), input_error);
}

TEST_CASE("scenario accessors guard missing parts") {
    Scenario s = load_scenario("example1");
    CHECK_THROWS_AS(s.require_map(), input_error);
    CHECK_THROWS_AS(s.make_condition(), input_error);
    CHECK(s.require_phi().family() == PhiFamily::rational);

    Scenario r = load_scenario("example2-repaired");
    ConditionKind k = r.make_condition(ConditionTag::thm1, 0.25);
    CHECK(k.tag() == ConditionTag::thm1);
    CHECK(k.alpha() == 0.25);
    CHECK(r.solve_phi(k).family() == PhiFamily::linear);
    CHECK(r.solve_phi(r.make_condition()).family() == PhiFamily::rational);
}
