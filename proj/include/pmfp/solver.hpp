#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pmfp/comparison.hpp"
#include "pmfp/contraction.hpp"
#include "pmfp/core.hpp"
#include "pmfp/trace.hpp"
#include "pmfp/verify.hpp"

namespace pmfp {

// ---------------------------------------------------------------------------
// Picard iteration instrumented with the a priori bound M_x, the orbit
// radius r_x, the residual |p(Tz,z) - p(z,z)| and X_p membership.
// ---------------------------------------------------------------------------

/// Runs x, Tx, T^2 x, ... and stops when the induced-metric step
/// p^s(x_n, x_{n+1}) drops to `tol` (convergence is declared in p^s, not p).
/// A map failure mid-orbit throws orbit_error carrying the partial trace.
inline OrbitTrace picard_orbit(const PartialMetricSpace& space, const PiecewiseMap& map,
                               double x0, std::uint64_t max_iter = 10000, double tol = 1e-8) {
    if (max_iter < 1) throw input_error("picard_orbit needs max_iter >= 1");
    if (!(tol > 0.0)) throw input_error("picard_orbit needs tol > 0");
    space.require_member(x0);

    OrbitTrace trace;
    trace.start = x0;
    trace.termination = Termination::max_iter;

    double x = x0;
    double self = space.p_raw(x, x);
    for (std::uint64_t n = 0; n < max_iter; ++n) {
        double next;
        try {
            next = apply_map(map, space.carrier(), x);
        } catch (const error& e) {
            OrbitEntry last{n, x, self, space.p_raw(x, x0), 0.0, 0.0, false};
            trace.entries.push_back(last);
            trace.termination = Termination::error;
            throw orbit_error(e.what(), std::move(trace));
        }
        double self_next = space.p_raw(next, next);
        double step = space.p_raw(x, next);
        double ps_step = 2.0 * step - self - self_next;

        trace.entries.push_back({n, x, self, space.p_raw(x, x0), step, ps_step, true});

        x = next;
        self = self_next;
        if (ps_step <= tol) {
            trace.entries.push_back({n + 1, x, self, space.p_raw(x, x0), 0.0, 0.0, false});
            trace.termination = Termination::converged;
            return trace;
        }
    }
    trace.entries.push_back(
        {max_iter, x, self, space.p_raw(x, x0), 0.0, 0.0, false});
    return trace;
}

/// The a priori orbit radius M_x = f^{-1}(p(x,Tx)) + p(x,x).
inline double compute_Mx(const PartialMetricSpace& space, const PiecewiseMap& map,
                         const ComparisonFunction& cf, double x, double finv_tol = 1e-10,
                         double t_max = 1e12) {
    space.require_member(x);
    double tx = apply_map(map, space.carrier(), x);
    double s = space.p_raw(x, tx);
    return f_inverse(cf, s, finv_tol, t_max) + space.p_raw(x, x);
}

/// Checks p(T^n x, x) <= M_x along a recorded trace.
inline CheckReport verify_orbit_bound(const OrbitTrace& trace, double Mx,
                                 const CheckOptions& opts = {}) {
    if (trace.entries.empty()) throw input_error("verify_orbit_bound needs a nonempty trace");
    detail::WitnessCollector col("bound-Mx", opts);
    for (const auto& entry : trace.entries) {
        double margin = entry.distance_to_start - Mx;
        if (col.note(margin))
            col.add({{entry.x, trace.entries.front().x},
                     entry.distance_to_start,
                     Mx,
                     margin,
                     "orbit radius exceeded at n=" + std::to_string(entry.n)});
    }
    return col.finish(trace.entries.size(), false);
}

// ---------------------------------------------------------------------------
// Fixed-point solve across several starts
// ---------------------------------------------------------------------------

struct SolveOptions {
    double tol = 1e-8;
    std::uint64_t max_iter = 10000;
    double agree_tol = 1e-6;
    double eps_num = kEpsNum;
    SampleOptions sampling;
    bool run_checks = true;  // pre-solve hypothesis + contraction scans
};

struct StartReport {
    double start = 0.0;
    double candidate = 0.0;
    std::uint64_t iterations = 0;
    bool converged = false;
    double Mx = 0.0;
    bool orbit_bound_ok = false;
    double r_x_estimate = 0.0;
    double self_distance = 0.0;        // of the candidate
    OrbitDiagnostics diagnostics;
};

struct FixedPointResult {
    double candidate = 0.0;            // z
    double ps_residual = 0.0;          // p^s(z, Tz)
    double fixed_point_residual = 0.0;         // |p(Tz,z) - p(z,z)|
    double self_distance = 0.0;        // p(z,z)
    double rho_p = 0.0;
    bool rho_exact = false;            // builtin fast path vs sampled infimum
    bool in_Xp = false;                // |p(z,z) - rho_p| <= tol
    double r_x_estimate = 0.0;
    std::uint64_t iterations = 0;
    double starts_agreement = 0.0;     // max pairwise p^s between candidates
    bool converged_all = false;
    bool hypotheses_ok = false;
    bool contraction_ok = false;
    bool unique_claimed = false;
    std::string uniqueness_scope;      // "global" (eq8/eq9) or "X_p" (eq3/thm1)
    std::vector<StartReport> starts;   // ascending by start
    std::vector<std::string> warnings;
    HypothesisReport hypothesis_report;
    CheckReport contraction_report;
};

/// Runs Picard orbits from every start, verifies the orbit-radius bound via
/// compute_Mx, and assembles the fixed-point certificate. Hypothesis or
/// contraction failures do not stop the solve; they are recorded as warnings
/// and veto the uniqueness claim, so failures stay observable.
inline FixedPointResult solve_fixed_point(const PartialMetricSpace& space,
                                          const PiecewiseMap& map,
                                          const ComparisonFunction& cf,
                                          const ConditionKind& kind,
                                          std::vector<double> starts,
                                          const SolveOptions& opts = {}) {
    if (starts.empty()) throw input_error("solve_fixed_point needs at least one start");
    std::sort(starts.begin(), starts.end());

    FixedPointResult res;
    res.uniqueness_scope =
        (kind.tag() == ConditionTag::eq8 || kind.tag() == ConditionTag::eq9) ? "global" : "X_p";

    if (opts.run_checks) {
        res.hypothesis_report = check_hypotheses(cf);
        res.hypotheses_ok = res.hypothesis_report.all_hypotheses();
        if (!res.hypotheses_ok)
            res.warnings.push_back("hypotheses-violated: comparison function failed a probe");

        CheckOptions copts;
        copts.eps_num = opts.eps_num;
        SampleSet scan = make_sample(space.carrier(), opts.sampling, &map);
        res.contraction_report = check_contraction(space, map, kind, scan, copts);
        res.contraction_ok = res.contraction_report.pass;
        if (!res.contraction_ok)
            res.warnings.push_back("contraction check failed: worst margin " +
                                   std::to_string(res.contraction_report.worst_margin));
    }

    std::vector<OrbitTrace> traces;
    traces.reserve(starts.size());
    for (double s : starts) {
        traces.push_back(picard_orbit(space, map, s, opts.max_iter, opts.tol));
    }

    res.converged_all = true;
    CheckOptions bound_opts;
    bound_opts.eps_num = opts.eps_num;
    for (std::size_t i = 0; i < starts.size(); ++i) {
        const OrbitTrace& tr = traces[i];
        StartReport sr;
        sr.start = starts[i];
        sr.candidate = tr.candidate();
        sr.iterations = tr.iterations();
        sr.converged = tr.termination == Termination::converged;
        if (!sr.converged) {
            res.converged_all = false;
            res.warnings.push_back("orbit from " + std::to_string(starts[i]) +
                                   " did not converge in " + std::to_string(opts.max_iter) +
                                   " iterations");
        }
        sr.Mx = compute_Mx(space, map, cf, starts[i]);
        CheckReport bound = verify_orbit_bound(tr, sr.Mx, bound_opts);
        sr.orbit_bound_ok = bound.pass;
        if (!bound.pass)
            res.warnings.push_back("orbit-radius bound violated from start " +
                                   std::to_string(starts[i]));
        sr.diagnostics = orbit_diagnostics(space, tr, opts.eps_num);
        sr.r_x_estimate = sr.diagnostics.r_x_estimate;
        sr.self_distance = space.p_raw(sr.candidate, sr.candidate);
        res.starts.push_back(sr);
    }

    const OrbitTrace& first = traces.front();
    double z = first.candidate();
    double tz = apply_map(map, space.carrier(), z);
    res.candidate = z;
    res.self_distance = space.p_raw(z, z);
    res.ps_residual = space.ps_raw(z, tz);
    res.fixed_point_residual = std::abs(space.p_raw(tz, z) - space.p_raw(z, z));
    res.r_x_estimate = res.starts.front().r_x_estimate;
    res.iterations = first.iterations();

    // rho_p over starts plus every orbit point (exact on the builtin fast path).
    std::vector<std::pair<double, Provenance>> rho_raw;
    for (double s : starts) rho_raw.emplace_back(s, Provenance::extra);
    for (const auto& tr : traces)
        for (const auto& entry : tr.entries) rho_raw.emplace_back(entry.x, Provenance::orbit);
    SampleSet rho_sample = detail::dedup_sorted(std::move(rho_raw));
    RhoXp rho = rho_and_Xp(space, rho_sample, opts.eps_num);
    res.rho_p = rho.rho;
    res.rho_exact = rho.exact;
    res.in_Xp = std::abs(res.self_distance - res.rho_p) <= opts.tol;

    res.starts_agreement = 0.0;
    for (std::size_t i = 0; i < res.starts.size(); ++i) {
        for (std::size_t j = i + 1; j < res.starts.size(); ++j) {
            res.starts_agreement =
                std::max(res.starts_agreement,
                         space.ps_raw(res.starts[i].candidate, res.starts[j].candidate));
        }
    }

    bool checks_ok = !opts.run_checks || (res.hypotheses_ok && res.contraction_ok);
    res.unique_claimed =
        res.converged_all && checks_ok && res.starts_agreement <= opts.agree_tol;
    return res;
}

}  // namespace pmfp
