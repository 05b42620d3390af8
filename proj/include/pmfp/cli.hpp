#pragma once

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pmfp/report.hpp"
#include "pmfp/scenario.hpp"

namespace pmfp::cli {

// Exit codes: 0 all checks pass / all orbits converge; 1 a violation or
// non-convergence was found (still a successful run); 2 input error.

namespace detail {

inline void render_text(const ordered_json& j, std::ostream& out, int indent = 0) {
    std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    for (const auto& item : j.items()) {
        const auto& v = item.value();
        if (v.is_object()) {
            out << pad << item.key() << ":\n";
            render_text(v, out, indent + 1);
        } else if (v.is_array() && !v.empty() && v[0].is_object()) {
            out << pad << item.key() << ":\n";
            for (const auto& el : v) {
                out << pad << "  -\n";
                render_text(el, out, indent + 2);
            }
        } else {
            out << pad << item.key() << ": " << dump_canonical(v) << "\n";
        }
    }
}

inline void emit(const ordered_json& report, const std::string& format, std::ostream& out) {
    if (format == "text") {
        render_text(report, out);
    } else {
        out << dump_canonical(report) << "\n";
    }
}

struct CommonFlags {
    std::string format = "json";
    std::optional<double> grid_step;
    std::optional<int> orbit_depth;

    void apply(Scenario& sc) const {
        if (grid_step) sc.sampling.grid_step = *grid_step;
        if (orbit_depth) sc.sampling.orbit_depth = *orbit_depth;
    }
};

inline ordered_json options_echo(const Scenario& sc) {
    ordered_json o;
    o["grid_step"] = sc.sampling.grid_step;
    o["orbit_depth"] = sc.sampling.orbit_depth;
    o["eps_num"] = sc.tolerances.eps_num;
    o["tol"] = sc.tolerances.tol;
    o["agree_tol"] = sc.tolerances.agree_tol;
    return o;
}

inline ordered_json report_shell(const Scenario& sc, const std::string& command) {
    ordered_json j;
    j["scenario"] = sc.name;
    j["command"] = command;
    j["options"] = options_echo(sc);
    j["reports"] = ordered_json::array();
    return j;
}

inline CheckOptions check_options(const Scenario& sc) {
    CheckOptions o;
    o.eps_num = sc.tolerances.eps_num;
    return o;
}

inline int run_axioms(Scenario& sc, const CommonFlags& flags, std::ostream& out) {
    PartialMetricSpace space = sc.space();
    const PiecewiseMap* map = sc.map ? &*sc.map : nullptr;
    SampleSet sample = make_sample(sc.carrier, sc.sampling, map);
    CheckOptions opts = check_options(sc);

    ordered_json j = report_shell(sc, "axioms");
    bool all_pass = true;
    for (const CheckReport& r : check_axioms(space, sample, opts)) {
        all_pass = all_pass && r.pass;
        j["reports"].push_back(to_json(r));
    }
    CheckReport ps = check_induced_metric(space, sample, opts);
    all_pass = all_pass && ps.pass;
    j["reports"].push_back(to_json(ps));
    j["version"] = kToolVersion;
    emit(j, flags.format, out);
    return all_pass ? 0 : 1;
}

inline int run_phi(Scenario& sc, const CommonFlags& flags,
                   const std::vector<double>& iterate_args,
                   std::optional<double> inverse_arg, std::ostream& out) {
    const ComparisonFunction& cf = sc.require_phi();
    HypothesisReport rep = check_hypotheses(cf);
    std::vector<int> violations = property_crosscheck(rep);

    ordered_json j = report_shell(sc, "phi");
    j["options"]["phi"] = cf.source();
    j["hypotheses"] = to_json(rep);
    j["implication_violations"] = violations;
    if (iterate_args.size() == 2) {
        double t = iterate_args[0];
        auto n = static_cast<std::uint64_t>(iterate_args[1]);
        ordered_json it;
        it["t"] = t;
        it["n"] = n;
        it["value"] = phi_iterate(cf, t, n);
        j["iterate"] = std::move(it);
    }
    if (inverse_arg) {
        ordered_json inv;
        inv["s"] = *inverse_arg;
        inv["value"] = f_inverse(cf, *inverse_arg);
        j["inverse"] = std::move(inv);
    }
    j["version"] = kToolVersion;
    emit(j, flags.format, out);
    return (rep.all_hypotheses() && violations.empty()) ? 0 : 1;
}

inline int run_contraction(Scenario& sc, const CommonFlags& flags,
                           std::optional<ConditionTag> kind_override,
                           std::optional<double> alpha_override, std::ostream& out) {
    PartialMetricSpace space = sc.space();
    const PiecewiseMap& map = sc.require_map();
    ConditionKind kind = sc.make_condition(kind_override, alpha_override);
    SampleSet sample = make_sample(sc.carrier, sc.sampling, &map);

    CheckReport rep = check_contraction(space, map, kind, sample, check_options(sc));

    ordered_json j = report_shell(sc, "contraction");
    j["options"]["condition"] = to_string(kind.tag());
    if (kind.tag() == ConditionTag::thm1) j["options"]["alpha"] = kind.alpha();
    j["reports"].push_back(to_json(rep));
    if (kind.tag() == ConditionTag::thm1 && kind.alpha() > 0.0) {
        j["thm1_eq3_equivalent"] =
            thm1_eq3_equivalence(space, map, kind.alpha(), sample, 1e-15,
                                   sc.tolerances.eps_num);
    }
    j["version"] = kToolVersion;
    emit(j, flags.format, out);
    return rep.pass ? 0 : 1;
}

inline int run_solve(Scenario& sc, const CommonFlags& flags, std::optional<double> start,
                     bool all_starts, std::ostream& out) {
    PartialMetricSpace space = sc.space();
    const PiecewiseMap& map = sc.require_map();
    ConditionKind kind = sc.make_condition();
    ComparisonFunction cf = sc.solve_phi(kind);

    std::vector<double> starts;
    if (start) {
        starts.push_back(*start);
    } else if (all_starts) {
        starts = sc.starts;
        if (starts.empty())
            throw input_error("scenario '" + sc.name + "' declares no starts");
    } else {
        throw input_error("solve needs --start x0 or --all-starts");
    }

    SolveOptions opts;
    opts.tol = sc.tolerances.tol;
    opts.agree_tol = sc.tolerances.agree_tol;
    opts.eps_num = sc.tolerances.eps_num;
    opts.sampling = sc.sampling;

    FixedPointResult res = solve_fixed_point(space, map, cf, kind, starts, opts);

    ordered_json j = report_shell(sc, "solve");
    j["options"]["condition"] = to_string(kind.tag());
    j["options"]["starts"] = starts;
    j["reports"].push_back(to_json(res.contraction_report));
    j["result"] = to_json(res);
    j["version"] = kToolVersion;
    emit(j, flags.format, out);

    bool bounds_ok = true;
    for (const auto& s : res.starts) bounds_ok = bounds_ok && s.orbit_bound_ok;
    bool ok = res.converged_all && res.hypotheses_ok && res.contraction_ok && bounds_ok;
    return ok ? 0 : 1;
}

inline int run_falsify(Scenario& sc, const CommonFlags& flags,
                       std::optional<ConditionTag> kind_override,
                       std::optional<double> alpha_override, std::uint64_t budget,
                       std::uint64_t seed, std::ostream& out) {
    PartialMetricSpace space = sc.space();
    const PiecewiseMap& map = sc.require_map();
    ConditionKind kind = sc.make_condition(kind_override, alpha_override);

    FalsifyResult res = falsify(space, map, kind, budget, seed, sc.tolerances.eps_num);

    ordered_json j = report_shell(sc, "falsify");
    j["options"]["condition"] = to_string(kind.tag());
    if (kind.tag() == ConditionTag::thm1) j["options"]["alpha"] = kind.alpha();
    j["options"]["budget"] = budget;
    j["options"]["seed"] = seed;
    ordered_json r;
    r["status"] = res.status;
    r["pairs_tried"] = res.pairs_tried;
    if (res.witness) r["witness"] = to_json(*res.witness);
    j["falsify"] = std::move(r);
    j["version"] = kToolVersion;
    emit(j, flags.format, out);
    return res.witness ? 1 : 0;
}

}  // namespace detail

/// Runs one CLI invocation. `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"phi-contraction checks and fixed-point solves on partial metric spaces"};
    app.require_subcommand(1);

    detail::CommonFlags flags;
    std::string scenario_arg;
    std::string condition_arg;
    double alpha_arg = -1.0;
    std::vector<double> iterate_args;
    double inverse_arg = -1.0;
    double start_arg = 0.0;
    bool all_starts = false;
    std::uint64_t budget = 10000;
    std::uint64_t seed = 42;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("scenario", scenario_arg,
                        "built-in scenario name or path to a scenario JSON file")
            ->required();
        cmd->add_option("--format", flags.format, "output format")
            ->check(CLI::IsMember({"json", "text"}));
        cmd->add_option("--grid-step", flags.grid_step, "sampling grid step");
        cmd->add_option("--orbit-depth", flags.orbit_depth, "orbit closure depth");
    };
    auto add_condition = [&](CLI::App* cmd) {
        cmd->add_option("--condition", condition_arg, "condition kind: eq3|eq8|eq9|thm1");
        cmd->add_option("--alpha", alpha_arg, "alpha for thm1");
    };

    CLI::App* axioms = app.add_subcommand("axioms", "check P1-P4 and the induced metric");
    add_common(axioms);

    CLI::App* phi = app.add_subcommand("phi", "validate the comparison function");
    add_common(phi);
    CLI::Option* it_opt =
        phi->add_option("--iterate", iterate_args, "evaluate phi^n(t); takes t n")
            ->expected(2);
    CLI::Option* inv_opt = phi->add_option("--inverse", inverse_arg, "evaluate f^{-1}(s)");

    CLI::App* contraction =
        app.add_subcommand("contraction", "scan the contraction condition over the sample");
    add_common(contraction);
    add_condition(contraction);

    CLI::App* solve = app.add_subcommand("solve", "Picard fixed-point solve");
    add_common(solve);
    CLI::Option* start_opt = solve->add_option("--start", start_arg, "single starting point");
    solve->add_flag("--all-starts", all_starts, "use every start the scenario declares");

    CLI::App* falsify_cmd =
        app.add_subcommand("falsify", "randomized counterexample search");
    add_common(falsify_cmd);
    add_condition(falsify_cmd);
    falsify_cmd->add_option("--budget", budget, "number of random pairs to draw");
    falsify_cmd->add_option("--seed", seed, "random seed");

    std::vector<const char*> argv;
    argv.push_back("pmfp");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        Scenario sc = load_scenario(scenario_arg);
        flags.apply(sc);

        std::optional<ConditionTag> kind_override;
        if (!condition_arg.empty()) kind_override = condition_tag_from_string(condition_arg);
        std::optional<double> alpha_override;
        if (alpha_arg >= 0.0) alpha_override = alpha_arg;

        if (axioms->parsed()) return detail::run_axioms(sc, flags, out);
        if (phi->parsed()) {
            std::optional<double> inv;
            if (inv_opt->count() > 0) inv = inverse_arg;
            if (it_opt->count() == 0) iterate_args.clear();
            return detail::run_phi(sc, flags, iterate_args, inv, out);
        }
        if (contraction->parsed())
            return detail::run_contraction(sc, flags, kind_override, alpha_override, out);
        if (solve->parsed()) {
            std::optional<double> start;
            if (start_opt->count() > 0) start = start_arg;
            return detail::run_solve(sc, flags, start, all_starts, out);
        }
        if (falsify_cmd->parsed())
            return detail::run_falsify(sc, flags, kind_override, alpha_override, budget, seed,
                                       out);
        err << "error: no subcommand selected\n";
        return 2;
    } catch (const error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace pmfp::cli
