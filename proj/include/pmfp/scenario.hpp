#pragma once

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pmfp/comparison.hpp"
#include "pmfp/contraction.hpp"
#include "pmfp/core.hpp"
#include "pmfp/solver.hpp"

namespace pmfp {

struct Tolerances {
    double eps_num = kEpsNum;
    double tol = 1e-8;
    double agree_tol = 1e-6;
};

/// A fully described problem instance: carrier, distance, self-map,
/// comparison function, condition, starts, sampling and tolerances.
struct Scenario {
    std::string name;
    CarrierSpec carrier;
    std::string metric_source = "max";  // "max" or an expression in x, y
    std::optional<PiecewiseMap> map;
    std::optional<ComparisonFunction> phi;
    std::string phi_family = "rational";
    double phi_alpha = 0.5;
    std::string phi_source;             // expression text for custom phi
    std::optional<ConditionTag> condition;
    double condition_alpha = 0.5;       // used by thm1
    std::vector<double> starts;
    SampleOptions sampling;
    Tolerances tolerances;

    PartialMetricSpace space() const {
        if (metric_source == "max") return PartialMetricSpace::builtin_max(name, carrier);
        return PartialMetricSpace::from_expression(name, carrier, metric_source);
    }

    const PiecewiseMap& require_map() const {
        if (!map) throw input_error("scenario '" + name + "' declares no map");
        return *map;
    }

    const ComparisonFunction& require_phi() const {
        if (!phi) throw input_error("scenario '" + name + "' declares no comparison function");
        return *phi;
    }

    /// Condition kind, honoring command-line overrides.
    ConditionKind make_condition(std::optional<ConditionTag> override_tag = std::nullopt,
                                 std::optional<double> override_alpha = std::nullopt) const {
        std::optional<ConditionTag> chosen = override_tag ? override_tag : condition;
        if (!chosen)
            throw input_error("scenario '" + name + "' declares no condition; pass --condition");
        ConditionTag tag = *chosen;
        double a = override_alpha.value_or(condition_alpha);
        switch (tag) {
            case ConditionTag::eq3: return ConditionKind::eq3(require_phi());
            case ConditionTag::eq8: return ConditionKind::eq8(require_phi());
            case ConditionTag::eq9: return ConditionKind::eq9(require_phi());
            case ConditionTag::thm1: return ConditionKind::thm1(a);
        }
        throw input_error("corrupt condition tag");
    }

    /// Comparison function used for M_x when the condition is thm1.
    ComparisonFunction solve_phi(const ConditionKind& kind) const {
        if (kind.tag() == ConditionTag::thm1)
            return ComparisonFunction::linear(kind.alpha());
        return require_phi();
    }
};

// ---------------------------------------------------------------------------
// Built-in scenarios
// ---------------------------------------------------------------------------

inline std::vector<std::string> builtin_scenario_names() {
    return {"example1", "example2-paper", "example2-repaired", "shifted-thm1",
            "usual-metric-example2"};
}

/// Returns the named built-in scenario, or nullopt when the name is unknown.
inline std::optional<Scenario> builtin_scenario(const std::string& name) {
    auto half_map = [](double lo_first, double hi_first) {
        return PiecewiseMap::from_sources(
            "T", {{{lo_first, hi_first}, "x/2"}, {{3.0, 4.0}, "7/5"}});
    };

    if (name == "example1") {
        // A half-line under p = max, truncated to a finite carrier.
        Scenario s;
        s.name = name;
        s.carrier = CarrierSpec({{0.0, 100.0}}, {}, Completeness::zero_complete);
        s.metric_source = "max";
        s.phi = ComparisonFunction::rational();
        s.phi_family = "rational";
        return s;
    }
    if (name == "example2-paper") {
        // The unrepaired variant: the second guard maps [3,4] to 7/5, outside
        // the carrier, so T is not a self-map. Kept to demonstrate the error.
        Scenario s;
        s.name = name;
        s.carrier = CarrierSpec({{0.0, 1.0}, {3.0, 4.0}}, {}, Completeness::complete);
        s.metric_source = "max";
        s.map = half_map(0.0, 1.0);
        s.phi = ComparisonFunction::rational();
        s.phi_family = "rational";
        s.condition = ConditionTag::eq8;
        s.starts = {1.0, 3.0, 3.5, 4.0};
        return s;
    }
    if (name == "example2-repaired") {
        // First interval extended to [0,2] so that 7/5 lands in the carrier.
        Scenario s;
        s.name = name;
        s.carrier = CarrierSpec({{0.0, 2.0}, {3.0, 4.0}}, {}, Completeness::complete);
        s.metric_source = "max";
        s.map = half_map(0.0, 2.0);
        s.phi = ComparisonFunction::rational();
        s.phi_family = "rational";
        s.condition = ConditionTag::eq8;
        s.starts = {4.0, 3.0, 2.0, 1.0, 0.37};
        return s;
    }
    if (name == "usual-metric-example2") {
        // Same carrier and map, but with the ordinary absolute-value metric.
        Scenario s;
        s.name = name;
        s.carrier = CarrierSpec({{0.0, 2.0}, {3.0, 4.0}}, {}, Completeness::complete);
        s.metric_source = "abs(x-y)";
        s.map = half_map(0.0, 2.0);
        s.phi = ComparisonFunction::rational();
        s.phi_family = "rational";
        s.condition = ConditionTag::eq8;
        s.starts = {4.0, 3.0, 2.0, 1.0, 0.37};
        return s;
    }
    if (name == "shifted-thm1") {
        // Fixed point with nonzero self-distance: T contracts [3,4] toward 3.
        Scenario s;
        s.name = name;
        s.carrier = CarrierSpec({{3.0, 4.0}}, {}, Completeness::complete);
        s.metric_source = "max";
        s.map = PiecewiseMap::from_sources("T", {{{3.0, 4.0}, "3+(x-3)/2"}});
        s.phi = ComparisonFunction::linear(0.5);
        s.phi_family = "linear";
        s.phi_alpha = 0.5;
        s.condition = ConditionTag::thm1;
        s.condition_alpha = 0.5;
        s.starts = {3.0, 3.5, 4.0};
        return s;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Scenario files
// ---------------------------------------------------------------------------

namespace detail {

using nlohmann::json;

[[noreturn]] inline void fail_field(const std::string& path, const std::string& msg) {
    throw input_error("scenario field '" + path + "': " + msg);
}

inline void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                           const std::string& path) {
    for (const auto& item : obj.items()) {
        if (!allowed.count(item.key()))
            fail_field(path.empty() ? item.key() : path + "." + item.key(), "unknown field");
    }
}

inline double number_at(const json& j, const std::string& path) {
    if (!j.is_number()) fail_field(path, "expected a number");
    return j.get<double>();
}

inline CarrierSpec parse_carrier(const json& j) {
    if (!j.is_object()) fail_field("carrier", "expected an object");
    reject_unknown(j, {"intervals", "extra_points", "completeness"}, "carrier");
    std::vector<Interval> intervals;
    if (j.contains("intervals")) {
        if (!j["intervals"].is_array()) fail_field("carrier.intervals", "expected an array");
        for (const auto& iv : j["intervals"]) {
            if (!iv.is_array() || iv.size() != 2)
                fail_field("carrier.intervals", "each interval must be [lo, hi]");
            intervals.push_back({number_at(iv[0], "carrier.intervals.lo"),
                                 number_at(iv[1], "carrier.intervals.hi")});
        }
    }
    std::vector<double> extras;
    if (j.contains("extra_points")) {
        if (!j["extra_points"].is_array())
            fail_field("carrier.extra_points", "expected an array");
        for (const auto& e : j["extra_points"])
            extras.push_back(number_at(e, "carrier.extra_points"));
    }
    Completeness tag = Completeness::unknown;
    if (j.contains("completeness")) {
        std::string t = j["completeness"].is_string() ? j["completeness"].get<std::string>()
                                                      : std::string();
        if (t == "complete")
            tag = Completeness::complete;
        else if (t == "zero-complete")
            tag = Completeness::zero_complete;
        else if (t == "unknown")
            tag = Completeness::unknown;
        else
            fail_field("carrier.completeness",
                       "expected one of complete|zero-complete|unknown");
    }
    return CarrierSpec(std::move(intervals), std::move(extras), tag);
}

inline Scenario parse_scenario_json(const json& j) {
    if (!j.is_object()) throw input_error("scenario: expected a JSON object");
    reject_unknown(j,
                   {"name", "carrier", "partial_metric", "map", "phi", "condition", "starts",
                    "sampling", "tolerances"},
                   "");

    Scenario s;
    if (!j.contains("name") || !j["name"].is_string())
        fail_field("name", "required string");
    s.name = j["name"].get<std::string>();

    if (!j.contains("carrier")) fail_field("carrier", "required");
    s.carrier = parse_carrier(j["carrier"]);

    if (!j.contains("partial_metric") || !j["partial_metric"].is_string())
        fail_field("partial_metric", "required string (\"max\" or an expression in x, y)");
    s.metric_source = j["partial_metric"].get<std::string>();
    if (s.metric_source != "max") {
        try {
            (void)parse(s.metric_source, {"x", "y"});
        } catch (const parse_error& e) {
            fail_field("partial_metric", e.what());
        }
    }

    if (j.contains("map")) {
        if (!j["map"].is_array()) fail_field("map", "expected an array of pieces");
        std::vector<std::pair<Interval, std::string>> pieces;
        for (const auto& piece : j["map"]) {
            if (!piece.is_object()) fail_field("map", "each piece must be an object");
            reject_unknown(piece, {"when", "expr"}, "map");
            if (!piece.contains("when") || !piece["when"].is_array() ||
                piece["when"].size() != 2)
                fail_field("map.when", "expected [lo, hi]");
            if (!piece.contains("expr") || !piece["expr"].is_string())
                fail_field("map.expr", "expected an expression string");
            pieces.emplace_back(
                Interval{number_at(piece["when"][0], "map.when.lo"),
                         number_at(piece["when"][1], "map.when.hi")},
                piece["expr"].get<std::string>());
        }
        try {
            s.map = PiecewiseMap::from_sources("T", pieces);
        } catch (const parse_error& e) {
            fail_field("map.expr", e.what());
        }
    }

    if (j.contains("phi")) {
        const json& p = j["phi"];
        try {
            if (p.is_string()) {
                s.phi_family = "custom";
                s.phi_source = p.get<std::string>();
                s.phi = ComparisonFunction::custom(s.phi_source);
            } else if (p.is_object()) {
                reject_unknown(p, {"family", "alpha", "expr"}, "phi");
                if (!p.contains("family") || !p["family"].is_string())
                    fail_field("phi.family", "required string");
                std::string fam = p["family"].get<std::string>();
                s.phi_family = fam;
                if (fam == "linear") {
                    if (!p.contains("alpha")) fail_field("phi.alpha", "required for linear");
                    s.phi_alpha = number_at(p["alpha"], "phi.alpha");
                    s.phi = ComparisonFunction::linear(s.phi_alpha);
                } else if (fam == "rational") {
                    s.phi = ComparisonFunction::rational();
                } else if (fam == "custom") {
                    if (!p.contains("expr") || !p["expr"].is_string())
                        fail_field("phi.expr", "required for custom");
                    s.phi_source = p["expr"].get<std::string>();
                    s.phi = ComparisonFunction::custom(s.phi_source);
                } else {
                    fail_field("phi.family", "expected linear|rational|custom");
                }
            } else {
                fail_field("phi", "expected a string expression or a family object");
            }
        } catch (const parse_error& e) {
            fail_field("phi", e.what());
        } catch (const input_error&) {
            throw;
        }
    }

    if (j.contains("condition")) {
        const json& c = j["condition"];
        if (!c.is_object()) fail_field("condition", "expected an object");
        reject_unknown(c, {"kind", "alpha"}, "condition");
        if (!c.contains("kind") || !c["kind"].is_string())
            fail_field("condition.kind", "required string");
        s.condition = condition_tag_from_string(c["kind"].get<std::string>());
        if (c.contains("alpha")) s.condition_alpha = number_at(c["alpha"], "condition.alpha");
    }

    if (j.contains("starts")) {
        if (!j["starts"].is_array()) fail_field("starts", "expected an array of numbers");
        for (const auto& v : j["starts"]) s.starts.push_back(number_at(v, "starts"));
    }

    if (j.contains("sampling")) {
        const json& g = j["sampling"];
        if (!g.is_object()) fail_field("sampling", "expected an object");
        reject_unknown(g, {"grid_step", "orbit_depth"}, "sampling");
        if (g.contains("grid_step"))
            s.sampling.grid_step = number_at(g["grid_step"], "sampling.grid_step");
        if (g.contains("orbit_depth")) {
            if (!g["orbit_depth"].is_number_integer())
                fail_field("sampling.orbit_depth", "expected an integer");
            s.sampling.orbit_depth = g["orbit_depth"].get<int>();
        }
    }

    if (j.contains("tolerances")) {
        const json& t = j["tolerances"];
        if (!t.is_object()) fail_field("tolerances", "expected an object");
        reject_unknown(t, {"eps_num", "tol", "agree_tol"}, "tolerances");
        if (t.contains("eps_num"))
            s.tolerances.eps_num = number_at(t["eps_num"], "tolerances.eps_num");
        if (t.contains("tol")) s.tolerances.tol = number_at(t["tol"], "tolerances.tol");
        if (t.contains("agree_tol"))
            s.tolerances.agree_tol = number_at(t["agree_tol"], "tolerances.agree_tol");
    }

    return s;
}

}  // namespace detail

/// Loads a scenario by built-in name or from a JSON file.
inline Scenario load_scenario(const std::string& path_or_name) {
    if (auto builtin = builtin_scenario(path_or_name)) return *builtin;

    std::ifstream in(path_or_name);
    if (!in)
        throw input_error("cannot open scenario '" + path_or_name +
                          "' (not a built-in name and not a readable file)");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw input_error("scenario '" + path_or_name + "' is not valid JSON: " + e.what());
    }
    return detail::parse_scenario_json(j);
}

}  // namespace pmfp
