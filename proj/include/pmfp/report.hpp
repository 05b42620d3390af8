#pragma once

#include <cmath>
#include <cstdio>
#include <string>

#include <json.hpp>

#include "pmfp/comparison.hpp"
#include "pmfp/core.hpp"
#include "pmfp/solver.hpp"
#include "pmfp/verify.hpp"

namespace pmfp {

inline constexpr const char* kToolVersion = "0.1.0";

using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Canonical JSON emission
//
// Reports must be byte-stable: fixed key order (insertion order of
// ordered_json) and floating values printed with 17 significant digits, which
// round-trips every double.
// ---------------------------------------------------------------------------

namespace detail {

inline void dump_canonical(const ordered_json& j, std::string& out) {
    switch (j.type()) {
        case ordered_json::value_t::object: {
            out += '{';
            bool first = true;
            for (const auto& item : j.items()) {
                if (!first) out += ',';
                first = false;
                out += nlohmann::json(item.key()).dump();
                out += ':';
                dump_canonical(item.value(), out);
            }
            out += '}';
            return;
        }
        case ordered_json::value_t::array: {
            out += '[';
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += ',';
                dump_canonical(j[i], out);
            }
            out += ']';
            return;
        }
        case ordered_json::value_t::number_float: {
            double v = j.get<double>();
            if (!std::isfinite(v)) throw input_error("report contains a non-finite number");
            if (v == 0.0) v = 0.0;  // normalize -0
            char buf[40];
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            out += buf;
            return;
        }
        default:
            out += j.dump();
            return;
    }
}

}  // namespace detail

inline std::string dump_canonical(const ordered_json& j) {
    std::string out;
    detail::dump_canonical(j, out);
    return out;
}

// ---------------------------------------------------------------------------
// Report builders
// ---------------------------------------------------------------------------

inline ordered_json to_json(const Witness& w) {
    ordered_json j;
    j["points"] = w.points;
    j["lhs"] = w.lhs;
    j["rhs"] = w.rhs;
    j["margin"] = w.margin;
    j["label"] = w.label;
    return j;
}

inline ordered_json to_json(const CheckReport& r) {
    ordered_json j;
    j["check_id"] = r.check_id;
    j["pass"] = r.pass;
    j["worst_margin"] = r.worst_margin;
    ordered_json ws = ordered_json::array();
    for (const auto& w : r.witnesses) ws.push_back(to_json(w));
    j["witnesses"] = std::move(ws);
    j["pairs_scanned"] = r.pairs_scanned;
    j["sample_size"] = r.sample_size;
    j["sample_capped"] = r.sample_capped;
    j["options"] = {{"eps_num", r.options_echo.eps_num},
                    {"witness_cap", r.options_echo.witness_cap},
                    {"axiom_sample_cap", r.options_echo.axiom_sample_cap}};
    return j;
}

inline ordered_json to_json(const HypothesisReport& r) {
    ordered_json j;
    j["phi_increasing"] = r.phi_increasing;
    j["f_increasing"] = r.f_increasing;
    j["f_inverse_rc_at_0"] = r.f_inverse_rc_at_0;
    j["phi_iterates_vanish"] = r.phi_iterates_vanish;
    ordered_json flags;
    static const char* names[6] = {"i", "ii", "iii", "iv", "v", "vi"};
    for (int k = 0; k < 6; ++k) flags[names[k]] = r.property_flags[static_cast<std::size_t>(k)];
    j["property_flags"] = std::move(flags);
    if (!r.phi_monotone.ok) {
        j["phi_monotone_drop"] = {{"t_lo", r.phi_monotone.t_lo},
                                  {"t_hi", r.phi_monotone.t_hi},
                                  {"drop", r.phi_monotone.drop}};
    }
    if (!r.f_monotone.ok) {
        j["f_monotone_drop"] = {{"t_lo", r.f_monotone.t_lo},
                                {"t_hi", r.f_monotone.t_hi},
                                {"drop", r.f_monotone.drop}};
    }
    j["f_inverse_at_tail"] = r.f_inverse_at_tail;
    if (!r.f_inverse_note.empty()) j["f_inverse_note"] = r.f_inverse_note;
    ordered_json decay = ordered_json::array();
    for (const auto& d : r.decay) {
        ordered_json probe;
        probe["t"] = d.t;
        probe["steps"] = d.steps;
        probe["vanished"] = d.vanished;
        if (std::isfinite(d.final_value)) probe["final_value"] = d.final_value;
        decay.push_back(std::move(probe));
    }
    j["decay"] = std::move(decay);
    j["grid_size"] = r.grid_size;
    return j;
}

inline ordered_json to_json(const OrbitDiagnostics& d) {
    ordered_json j;
    j["r_x_estimate"] = d.r_x_estimate;
    j["self_distances_nonincreasing"] = d.self_distances_nonincreasing;
    j["is_zero_cauchy"] = d.is_zero_cauchy;
    j["ps_cauchy"] = d.ps_cauchy;
    j["tail_tol"] = d.tail_tol;
    return j;
}

inline ordered_json to_json(const StartReport& s) {
    ordered_json j;
    j["start"] = s.start;
    j["candidate"] = s.candidate;
    j["iterations"] = s.iterations;
    j["converged"] = s.converged;
    j["Mx"] = s.Mx;
    j["orbit_bound_pass"] = s.orbit_bound_ok;
    j["self_distance"] = s.self_distance;
    j["diagnostics"] = to_json(s.diagnostics);
    return j;
}

inline ordered_json to_json(const FixedPointResult& r) {
    ordered_json j;
    j["candidate"] = r.candidate;
    j["ps_residual"] = r.ps_residual;
    j["fixed_point_residual"] = r.fixed_point_residual;
    j["self_distance"] = r.self_distance;
    j["rho_p"] = r.rho_p;
    j["rho_p_kind"] = r.rho_exact ? "exact" : "sampled-infimum";
    j["in_Xp"] = r.in_Xp;
    j["r_x_estimate"] = r.r_x_estimate;
    j["iterations"] = r.iterations;
    j["starts_agreement"] = r.starts_agreement;
    j["converged_all"] = r.converged_all;
    j["hypotheses_ok"] = r.hypotheses_ok;
    j["contraction_ok"] = r.contraction_ok;
    j["unique_claimed"] = r.unique_claimed;
    j["uniqueness_scope"] = r.uniqueness_scope;
    ordered_json starts = ordered_json::array();
    for (const auto& s : r.starts) starts.push_back(to_json(s));
    j["starts"] = std::move(starts);
    j["warnings"] = r.warnings;
    return j;
}

}  // namespace pmfp
