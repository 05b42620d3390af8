#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pmfp/carrier.hpp"
#include "pmfp/errors.hpp"
#include "pmfp/expr.hpp"

namespace pmfp {

// ---------------------------------------------------------------------------
// Partial metric spaces
// ---------------------------------------------------------------------------

/// A carrier together with a distance p(x,y). The distance is either the
/// builtin max{x,y} or a two-variable expression; nonnegativity and the
/// axioms are checked by the verify module, not assumed here.
class PartialMetricSpace {
public:
    PartialMetricSpace() = default;

    static PartialMetricSpace builtin_max(std::string name, CarrierSpec carrier) {
        PartialMetricSpace s;
        s.name_ = std::move(name);
        s.carrier_ = std::move(carrier);
        s.builtin_max_ = true;
        s.source_ = "max";
        return s;
    }

    static PartialMetricSpace from_expression(std::string name, CarrierSpec carrier,
                                              const std::string& source) {
        PartialMetricSpace s;
        s.name_ = std::move(name);
        s.carrier_ = std::move(carrier);
        s.builtin_max_ = false;
        s.source_ = source;
        s.expr_ = parse(source, {"x", "y"});
        return s;
    }

    const std::string& name() const noexcept { return name_; }
    const CarrierSpec& carrier() const noexcept { return carrier_; }
    bool is_builtin_max() const noexcept { return builtin_max_; }
    const std::string& distance_source() const noexcept { return source_; }

    /// p(x,y) without the carrier-membership check. Scans use this on
    /// points that are already known to lie in the carrier.
    double p_raw(double x, double y) const {
        if (builtin_max_) return std::max(x, y);
        double args[2] = {x, y};
        double v = eval(*expr_, args);
        if (!(v >= 0.0) || !std::isfinite(v))
            throw invalid_metric_error("distance evaluated to " + std::to_string(v) +
                                       " at (" + std::to_string(x) + ", " + std::to_string(y) +
                                       ")");
        return v;
    }

    /// p^s(x,y) = 2p(x,y) - p(x,x) - p(y,y), membership unchecked.
    double ps_raw(double x, double y) const {
        return 2.0 * p_raw(x, y) - p_raw(x, x) - p_raw(y, y);
    }

    void require_member(double x) const {
        if (!carrier_.contains(x))
            throw domain_error("point " + std::to_string(x) + " is not in the carrier of '" +
                               name_ + "'");
    }

private:
    std::string name_;
    CarrierSpec carrier_;
    bool builtin_max_ = true;
    std::string source_ = "max";
    std::optional<Expression> expr_;
};

/// p(x,y); both points must belong to the carrier.
inline double eval_p(const PartialMetricSpace& space, double x, double y) {
    space.require_member(x);
    space.require_member(y);
    return space.p_raw(x, y);
}

/// The induced metric p^s(x,y) = 2p(x,y) - p(x,x) - p(y,y).
inline double induced_ps(const PartialMetricSpace& space, double x, double y) {
    space.require_member(x);
    space.require_member(y);
    return space.ps_raw(x, y);
}

/// Open-ball membership: p(center,y) < p(center,center) + eps, strictly.
inline bool ball_contains(const PartialMetricSpace& space, double center, double eps, double y) {
    if (!(eps > 0.0)) throw input_error("ball radius must be positive");
    space.require_member(center);
    space.require_member(y);
    return space.p_raw(center, y) < space.p_raw(center, center) + eps;
}

// ---------------------------------------------------------------------------
// Finite evidence sets
// ---------------------------------------------------------------------------

enum class Provenance : std::uint8_t { endpoint = 0, grid = 1, extra = 2, orbit = 3 };

inline const char* to_string(Provenance p) {
    switch (p) {
        case Provenance::endpoint: return "endpoint";
        case Provenance::grid: return "grid";
        case Provenance::extra: return "extra";
        default: return "orbit";
    }
}

struct SampleOptions {
    double grid_step = 1.0 / 16.0;
    int orbit_depth = 64;
};

/// A finite, ascending, de-duplicated list of carrier points on which the
/// universally quantified checks are evaluated. Construction is
/// deterministic: the same carrier and options always produce the same list.
struct SampleSet {
    std::vector<double> points;
    std::vector<Provenance> provenance;

    std::size_t size() const noexcept { return points.size(); }
    bool empty() const noexcept { return points.empty(); }
};

namespace detail {

inline SampleSet dedup_sorted(std::vector<std::pair<double, Provenance>> raw) {
    std::sort(raw.begin(), raw.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second < b.second;
    });
    SampleSet out;
    for (const auto& [v, tag] : raw) {
        if (!out.points.empty() && v - out.points.back() <= kPointTol) continue;
        out.points.push_back(v);
        out.provenance.push_back(tag);
    }
    return out;
}

}  // namespace detail

/// Builds the default evidence set: a uniform grid per interval, all interval
/// endpoints, the isolated points, and (when a map is given) the forward
/// orbit of every base point up to `orbit_depth`.
inline SampleSet make_sample(const CarrierSpec& carrier, const SampleOptions& opts = {},
                             const PiecewiseMap* map = nullptr) {
    if (!(opts.grid_step > 0.0)) throw input_error("grid step must be positive");
    if (opts.orbit_depth < 0) throw input_error("orbit depth must be nonnegative");

    std::vector<std::pair<double, Provenance>> raw;
    for (const auto& iv : carrier.intervals()) {
        raw.emplace_back(iv.lo, Provenance::endpoint);
        raw.emplace_back(iv.hi, Provenance::endpoint);
        double len = iv.hi - iv.lo;
        auto steps = static_cast<std::int64_t>(std::floor(len / opts.grid_step + kPointTol));
        for (std::int64_t k = 1; k < steps; ++k) {
            raw.emplace_back(iv.lo + static_cast<double>(k) * opts.grid_step, Provenance::grid);
        }
    }
    for (double e : carrier.extra_points()) raw.emplace_back(e, Provenance::extra);

    SampleSet base = detail::dedup_sorted(raw);
    if (map == nullptr || opts.orbit_depth == 0) return base;

    std::vector<std::pair<double, Provenance>> with_orbit;
    with_orbit.reserve(base.points.size() * 4);
    for (std::size_t i = 0; i < base.points.size(); ++i) {
        with_orbit.emplace_back(base.points[i], base.provenance[i]);
    }
    for (double start : base.points) {
        double x = start;
        for (int d = 0; d < opts.orbit_depth; ++d) {
            double next = apply_map(*map, carrier, x);
            with_orbit.emplace_back(next, Provenance::orbit);
            if (std::abs(next - x) <= kPointTol) break;  // settled on a fixed point
            x = next;
        }
    }
    return detail::dedup_sorted(std::move(with_orbit));
}

// ---------------------------------------------------------------------------
// Check reports
// ---------------------------------------------------------------------------

/// A concrete point pair/triple at which a checked inequality fails (or, for
/// the falsifier, the best candidate found). margin = lhs - rhs.
struct Witness {
    std::vector<double> points;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;
    std::string label;
};

struct CheckOptions {
    double eps_num = kEpsNum;
    std::size_t witness_cap = 10;   // k_max
    std::size_t axiom_sample_cap = 200;
};

/// Outcome of one verification scan. Witnesses are the worst `witness_cap`
/// violations, sorted by margin descending with lexicographic point order as
/// the tie-break, so reports are stable across runs and evaluation orders.
struct CheckReport {
    std::string check_id;
    bool pass = true;
    double worst_margin = -std::numeric_limits<double>::infinity();
    std::vector<Witness> witnesses;
    std::uint64_t pairs_scanned = 0;
    std::size_t sample_size = 0;
    bool sample_capped = false;
    CheckOptions options_echo;
};

namespace detail {

inline bool witness_before(const Witness& a, const Witness& b) {
    if (a.margin != b.margin) return a.margin > b.margin;
    return std::lexicographical_compare(a.points.begin(), a.points.end(), b.points.begin(),
                                        b.points.end());
}

/// Accumulates the worst-k witnesses of a scan in canonical order.
class WitnessCollector {
public:
    WitnessCollector(std::string check_id, CheckOptions opts)
        : opts_(opts) {
        report_.check_id = std::move(check_id);
        report_.options_echo = opts;
    }

    /// Records one scanned pair/triple and its margin. Returns true when the
    /// margin constitutes a violation and a witness should be added.
    bool note(double margin) {
        ++report_.pairs_scanned;
        if (margin > report_.worst_margin) report_.worst_margin = margin;
        return margin > opts_.eps_num;
    }

    void add(const Witness& w) {
        auto pos = std::lower_bound(report_.witnesses.begin(), report_.witnesses.end(), w,
                                    witness_before);
        if (report_.witnesses.size() >= opts_.witness_cap &&
            pos == report_.witnesses.end())
            return;
        report_.witnesses.insert(pos, w);
        if (report_.witnesses.size() > opts_.witness_cap) report_.witnesses.pop_back();
    }

    CheckReport finish(std::size_t sample_size, bool capped) {
        report_.sample_size = sample_size;
        report_.sample_capped = capped;
        if (report_.pairs_scanned == 0)
            report_.worst_margin = 0.0;  // vacuous scan
        report_.pass = report_.worst_margin <= opts_.eps_num;
        return std::move(report_);
    }

private:
    CheckOptions opts_;
    CheckReport report_;
};

}  // namespace detail

/// Result of the sampled infimum rho_p and the set X_p of sampled points
/// whose self-distance attains it. `exact` is true only on the builtin-max
/// fast path, where the infimum is the least carrier point.
struct RhoXp {
    double rho = 0.0;
    bool exact = false;
    std::vector<double> xp;
};

inline RhoXp rho_and_Xp(const PartialMetricSpace& space, const SampleSet& sample,
                        double eps_num = kEpsNum) {
    if (sample.empty()) throw input_error("rho_and_Xp requires a nonempty sample");
    RhoXp out;
    if (space.is_builtin_max()) {
        out.rho = space.carrier().least_point();
        out.exact = true;
    } else {
        double m = std::numeric_limits<double>::infinity();
        const auto& pts = sample.points;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            for (std::size_t j = i; j < pts.size(); ++j) {
                m = std::min(m, space.p_raw(pts[i], pts[j]));
            }
        }
        out.rho = m;
        out.exact = false;
    }
    for (double x : sample.points) {
        if (space.p_raw(x, x) <= out.rho + eps_num) out.xp.push_back(x);
    }
    return out;
}

}  // namespace pmfp
