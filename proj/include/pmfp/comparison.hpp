#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pmfp/errors.hpp"
#include "pmfp/expr.hpp"

namespace pmfp {

// ---------------------------------------------------------------------------
// Comparison functions
//
// phi drives the nonlinear contraction conditions; f(t) = t - phi(t) is its
// companion. The checks here are finite-evidence probes on a fixed grid, not
// proofs: they can falsify a hypothesis, never certify it.
// ---------------------------------------------------------------------------

enum class PhiFamily { linear, rational, custom };

/// Evaluation grid for the hypothesis probes: 0 plus `count` log-spaced
/// points in [lo, hi].
inline std::vector<double> default_phi_grid(double lo = 1e-6, double hi = 1e3,
                                            int count = 96) {
    std::vector<double> g;
    g.reserve(static_cast<std::size_t>(count) + 1);
    g.push_back(0.0);
    double llo = std::log10(lo), lhi = std::log10(hi);
    for (int i = 0; i < count; ++i) {
        double a = llo + (lhi - llo) * static_cast<double>(i) / static_cast<double>(count - 1);
        g.push_back(std::pow(10.0, a));
    }
    return g;
}

class ComparisonFunction {
public:
    static ComparisonFunction linear(double alpha) {
        if (!(alpha > 0.0 && alpha < 1.0))
            throw input_error("linear comparison function needs alpha in (0,1)");
        ComparisonFunction cf;
        cf.family_ = PhiFamily::linear;
        cf.alpha_ = alpha;
        cf.source_ = "linear(" + std::to_string(alpha) + ")";
        return cf;
    }

    static ComparisonFunction rational() {
        ComparisonFunction cf;
        cf.family_ = PhiFamily::rational;
        cf.source_ = "t/(1+t)";
        return cf;
    }

    static ComparisonFunction custom(const std::string& source) {
        ComparisonFunction cf;
        cf.family_ = PhiFamily::custom;
        cf.source_ = source;
        cf.expr_ = parse(source, {"t"});
        return cf;
    }

    PhiFamily family() const noexcept { return family_; }
    double alpha() const noexcept { return alpha_; }
    const std::string& source() const noexcept { return source_; }
    const std::vector<double>& grid() const {
        if (grid_.empty()) grid_ = default_phi_grid();
        return grid_;
    }
    void set_grid(std::vector<double> g) { grid_ = std::move(g); }

    double phi(double t) const {
        switch (family_) {
            case PhiFamily::linear: return alpha_ * t;
            case PhiFamily::rational: return t / (1.0 + t);
            case PhiFamily::custom: {
                double args[1] = {t};
                return eval(*expr_, args);
            }
        }
        throw eval_error("corrupt comparison function");
    }

    double f(double t) const { return t - phi(t); }

private:
    PhiFamily family_ = PhiFamily::rational;
    double alpha_ = 0.5;
    std::string source_;
    std::optional<Expression> expr_;
    mutable std::vector<double> grid_;
};

// ---------------------------------------------------------------------------
// f inverse
// ---------------------------------------------------------------------------

/// Solves f(t) = s for t >= s. Builtin families use closed forms; custom
/// functions bracket [s, hi] by doubling hi from max(s,1) and then bisect.
/// Since phi >= 0 gives f(t) <= t, the solution (when it exists) satisfies
/// t >= s, which is why the bracket starts at s.
inline double f_inverse(const ComparisonFunction& cf, double s, double tol = 1e-10,
                        double t_max = 1e12) {
    if (!(s >= 0.0)) throw input_error("f_inverse requires s >= 0");
    if (!(tol > 0.0)) throw input_error("f_inverse requires tol > 0");

    switch (cf.family()) {
        case PhiFamily::linear:
            // f(t) = (1 - alpha) t
            return s / (1.0 - cf.alpha());
        case PhiFamily::rational:
            // f(t) = t^2/(1+t); the positive root of t^2 - s t - s = 0.
            return 0.5 * (s + std::sqrt(s * s + 4.0 * s));
        case PhiFamily::custom:
            break;
    }

    double lo = s;
    double f_lo = cf.f(lo);
    if (std::abs(f_lo - s) <= tol) return lo;
    if (f_lo > s)
        throw hypothesis_error("f(s) > s at s = " + std::to_string(s) +
                               "; phi takes a negative value");

    double hi = std::max(s, 1.0);
    double f_hi = cf.f(hi);
    while (f_hi < s) {
        hi *= 2.0;
        if (hi > t_max)
            throw range_error("f stays below " + std::to_string(s) + " up to t_max = " +
                              std::to_string(t_max) + "; f does not reach the queried value");
        f_hi = cf.f(hi);
    }

    for (int iter = 0; iter < 200; ++iter) {
        double mid = 0.5 * (lo + hi);
        double f_mid = cf.f(mid);
        double slack = 1e-12 * std::max({1.0, std::abs(f_lo), std::abs(f_hi)});
        if (f_mid < f_lo - slack || f_mid > f_hi + slack)
            throw hypothesis_error("f is not monotone near t = " + std::to_string(mid));
        if (std::abs(f_mid - s) <= tol) return mid;
        if (f_mid < s) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    throw hypothesis_error("bisection for f^{-1}(" + std::to_string(s) +
                           ") did not meet tolerance; f may jump over the value");
}

/// n-fold composition phi^n(t); n = 0 returns t.
inline double phi_iterate(const ComparisonFunction& cf, double t, std::uint64_t n) {
    double u = t;
    for (std::uint64_t k = 0; k < n; ++k) {
        u = cf.phi(u);
        if (!std::isfinite(u))
            throw eval_error("phi iterate diverged to a non-finite value at step " +
                             std::to_string(k + 1));
    }
    return u;
}

// ---------------------------------------------------------------------------
// Hypothesis checks
// ---------------------------------------------------------------------------

/// Evidence for one iterate-decay probe.
struct DecayProbe {
    double t = 0.0;
    std::uint64_t steps = 0;
    double final_value = 0.0;
    bool vanished = false;
};

/// Worst adjacent decrease seen in a monotonicity scan.
struct MonotoneEvidence {
    bool ok = true;
    double t_lo = 0.0;
    double t_hi = 0.0;
    double drop = 0.0;  // positive when a decrease was found
};

/// Grid verdicts for the contraction-theorem hypotheses on phi and the six
/// classical comparison-function properties:
///   (i) monotone increasing, (ii) phi(t) < t for t > 0, (iii) phi(0) = 0,
///   (iv) right upper-semicontinuous, (v) right continuous,
///   (vi) phi^n(t) -> 0.
/// Right-side behavior is probed by sampling t + 2^-k; a finite probe cannot
/// distinguish (iv) from (v) for adversarial functions, so the flags record
/// the probe's verdict on the declared grid.
struct HypothesisReport {
    bool phi_increasing = false;
    bool f_increasing = false;
    bool f_inverse_rc_at_0 = false;
    bool phi_iterates_vanish = false;

    std::array<bool, 6> property_flags{};  // (i)..(vi)

    MonotoneEvidence phi_monotone;
    MonotoneEvidence f_monotone;
    double f_inverse_at_tail = 0.0;      // f^{-1}(2^-40)
    std::string f_inverse_note;          // error text when the probe failed
    std::vector<DecayProbe> decay;
    double rc_upper_gap = 0.0;           // worst limsup excess over phi(t)
    double rc_gap = 0.0;                 // worst |right limit - phi(t)|
    std::size_t grid_size = 0;

    bool all_hypotheses() const {
        return phi_increasing && f_increasing && f_inverse_rc_at_0 && phi_iterates_vanish;
    }
};

struct HypothesisOptions {
    double eps_num = kEpsNum;
    double rc_tol = 1e-6;            // tolerance for the right-limit probes
    double finv_at0_threshold = 1e-4;   // required bound on f^{-1}(2^-40)
    double decay_threshold = 1e-5;      // iterates must drop below this
    std::uint64_t decay_max_steps = 1000000;
    double decay_divergence_bound = 1e100;
};

namespace detail {

inline MonotoneEvidence scan_increasing(const std::vector<double>& grid,
                                        const std::vector<double>& values, double eps) {
    MonotoneEvidence ev;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        double drop = values[i] - values[i + 1];
        if (drop > eps && drop > ev.drop) {
            ev.ok = false;
            ev.t_lo = grid[i];
            ev.t_hi = grid[i + 1];
            ev.drop = drop;
        }
    }
    return ev;
}

}  // namespace detail

inline HypothesisReport check_hypotheses(const ComparisonFunction& cf,
                                         const HypothesisOptions& opts = {}) {
    HypothesisReport rep;
    const std::vector<double>& grid = cf.grid();
    rep.grid_size = grid.size();

    std::vector<double> phi_vals(grid.size()), f_vals(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double v;
        try {
            v = cf.phi(grid[i]);
        } catch (const error& e) {
            throw eval_error("phi failed at t = " + std::to_string(grid[i]) + ": " + e.what());
        }
        phi_vals[i] = v;
        f_vals[i] = grid[i] - v;
    }

    rep.phi_monotone = detail::scan_increasing(grid, phi_vals, opts.eps_num);
    rep.f_monotone = detail::scan_increasing(grid, f_vals, opts.eps_num);
    rep.phi_increasing = rep.phi_monotone.ok;
    rep.f_increasing = rep.f_monotone.ok;

    // Right continuity of f^{-1} at 0: f^{-1}(2^-k) must be nonincreasing in k
    // and small by k = 40.
    rep.f_inverse_rc_at_0 = true;
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 40; ++k) {
        double s = std::ldexp(1.0, -k);
        double v;
        try {
            v = f_inverse(cf, s);
        } catch (const error& e) {
            rep.f_inverse_rc_at_0 = false;
            rep.f_inverse_note = e.what();
            break;
        }
        if (v > prev + opts.eps_num) {
            rep.f_inverse_rc_at_0 = false;
            rep.f_inverse_note = "f^{-1}(2^-" + std::to_string(k) + ") increased";
            break;
        }
        prev = v;
        rep.f_inverse_at_tail = v;
    }
    if (rep.f_inverse_rc_at_0 && rep.f_inverse_at_tail > opts.finv_at0_threshold) {
        rep.f_inverse_rc_at_0 = false;
        rep.f_inverse_note = "f^{-1}(2^-40) = " + std::to_string(rep.f_inverse_at_tail) +
                             " stays above the threshold";
    }

    // Iterate decay on the standard probe points. Divergence and arithmetic
    // blow-ups count as "did not vanish" rather than aborting the report.
    rep.phi_iterates_vanish = true;
    for (double t : {0.1, 1.0, 10.0, 100.0}) {
        DecayProbe probe;
        probe.t = t;
        double u = t;
        probe.vanished = u < opts.decay_threshold;
        while (!probe.vanished && probe.steps < opts.decay_max_steps) {
            bool blew_up = false;
            try {
                u = cf.phi(u);
            } catch (const error&) {
                blew_up = true;
            }
            ++probe.steps;
            if (blew_up || !std::isfinite(u) || u > opts.decay_divergence_bound) {
                u = std::numeric_limits<double>::infinity();
                break;
            }
            probe.vanished = u < opts.decay_threshold;
        }
        probe.final_value = u;
        if (!probe.vanished) rep.phi_iterates_vanish = false;
        rep.decay.push_back(probe);
    }

    // Classical comparison-function property flags.
    rep.property_flags[0] = rep.phi_increasing;                      // (i)
    bool lt = true;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] > 0.0 && !(phi_vals[i] < grid[i])) lt = false;
    }
    rep.property_flags[1] = lt;                                      // (ii)
    rep.property_flags[2] = std::abs(phi_vals[0]) <= opts.eps_num;   // (iii)

    bool right_usc = true, right_cont = true;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double t = grid[i];
        double base = phi_vals[i];
        for (int k = 44; k <= 46; ++k) {
            double w;
            try {
                w = cf.phi(t + std::ldexp(1.0, -k));
            } catch (const error& e) {
                throw eval_error("phi failed at right-limit probe near t = " +
                                 std::to_string(t) + ": " + e.what());
            }
            rep.rc_upper_gap = std::max(rep.rc_upper_gap, w - base);
            rep.rc_gap = std::max(rep.rc_gap, std::abs(w - base));
            if (w - base > opts.rc_tol) right_usc = false;
            if (std::abs(w - base) > opts.rc_tol) right_cont = false;
        }
    }
    rep.property_flags[3] = right_usc;                               // (iv)
    rep.property_flags[4] = right_cont;                              // (v)
    rep.property_flags[5] = rep.phi_iterates_vanish;                 // (vi)

    return rep;
}

/// The five implications between the properties (i)-(vi):
///   (1) i & ii  => iii      (2) ii & v => iii     (3) i & vi => ii
///   (4) i & iv  => vi       (5) i => (iv <=> v)
/// Returns the implications whose premises hold but whose conclusion flag is
/// false. A nonempty result flags an inconsistency between the numeric
/// probes, since the implications hold for genuine comparison functions.
inline std::vector<int> property_crosscheck(const HypothesisReport& rep) {
    const auto& c = rep.property_flags;
    std::vector<int> violated;
    if (c[0] && c[1] && !c[2]) violated.push_back(1);
    if (c[1] && c[4] && !c[2]) violated.push_back(2);
    if (c[0] && c[5] && !c[1]) violated.push_back(3);
    if (c[0] && c[3] && !c[5]) violated.push_back(4);
    if (c[0] && (c[3] != c[4])) violated.push_back(5);
    return violated;
}

}  // namespace pmfp
