#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "pmfp/errors.hpp"

namespace pmfp {

/// Two points closer than this are treated as the same carrier point.
inline constexpr double kPointTol = 1e-12;

/// Default slack for inequality checks.
inline constexpr double kEpsNum = 1e-9;

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

enum class Completeness { complete, zero_complete, unknown };

inline std::string to_string(Completeness c) {
    switch (c) {
        case Completeness::complete: return "complete";
        case Completeness::zero_complete: return "zero-complete";
        default: return "unknown";
    }
}

/// A carrier set: a finite union of closed real intervals plus finitely
/// many isolated points. Normalization sorts and merges the intervals and
/// drops isolated points that already lie inside an interval.
class CarrierSpec {
public:
    CarrierSpec() = default;

    CarrierSpec(std::vector<Interval> intervals, std::vector<double> extra_points,
                Completeness tag = Completeness::unknown)
        : intervals_(std::move(intervals)),
          extra_points_(std::move(extra_points)),
          tag_(tag) {
        normalize();
    }

    const std::vector<Interval>& intervals() const noexcept { return intervals_; }
    const std::vector<double>& extra_points() const noexcept { return extra_points_; }
    Completeness completeness_tag() const noexcept { return tag_; }

    bool empty() const noexcept { return intervals_.empty() && extra_points_.empty(); }

    bool contains(double x, double tol = kPointTol) const noexcept {
        for (const auto& iv : intervals_) {
            if (x >= iv.lo - tol && x <= iv.hi + tol) return true;
        }
        for (double e : extra_points_) {
            if (std::abs(x - e) <= tol) return true;
        }
        return false;
    }

    /// Smallest point of the carrier.
    double least_point() const {
        require_nonempty();
        double m = std::numeric_limits<double>::infinity();
        if (!intervals_.empty()) m = intervals_.front().lo;
        if (!extra_points_.empty()) m = std::min(m, extra_points_.front());
        return m;
    }

    double greatest_point() const {
        require_nonempty();
        double m = -std::numeric_limits<double>::infinity();
        if (!intervals_.empty()) m = intervals_.back().hi;
        if (!extra_points_.empty()) m = std::max(m, extra_points_.back());
        return m;
    }

    double total_length() const noexcept {
        double s = 0.0;
        for (const auto& iv : intervals_) s += iv.hi - iv.lo;
        return s;
    }

    /// Nearest carrier point to x (ties resolved toward the smaller value).
    double project(double x) const {
        require_nonempty();
        double best = 0.0;
        double best_dist = std::numeric_limits<double>::infinity();
        auto consider = [&](double cand) {
            double d = std::abs(cand - x);
            if (d < best_dist - kPointTol ||
                (d <= best_dist + kPointTol && cand < best)) {
                best = cand;
                best_dist = d;
            }
        };
        for (const auto& iv : intervals_) consider(std::clamp(x, iv.lo, iv.hi));
        for (double e : extra_points_) consider(e);
        return best;
    }

private:
    void require_nonempty() const {
        if (empty()) throw input_error("carrier is empty");
    }

    void normalize() {
        for (const auto& iv : intervals_) {
            if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi))
                throw input_error("carrier interval bounds must be finite");
            if (iv.lo > iv.hi)
                throw input_error("carrier interval has lo > hi");
        }
        std::sort(intervals_.begin(), intervals_.end(),
                  [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
        std::vector<Interval> merged;
        for (const auto& iv : intervals_) {
            if (!merged.empty() && iv.lo <= merged.back().hi + kPointTol) {
                merged.back().hi = std::max(merged.back().hi, iv.hi);
            } else {
                merged.push_back(iv);
            }
        }
        intervals_ = std::move(merged);

        std::vector<double> kept;
        for (double e : extra_points_) {
            if (!std::isfinite(e)) throw input_error("extra point must be finite");
            bool inside = false;
            for (const auto& iv : intervals_) {
                if (e >= iv.lo - kPointTol && e <= iv.hi + kPointTol) {
                    inside = true;
                    break;
                }
            }
            if (!inside) kept.push_back(e);
        }
        std::sort(kept.begin(), kept.end());
        kept.erase(std::unique(kept.begin(), kept.end(),
                               [](double a, double b) { return std::abs(a - b) <= kPointTol; }),
                   kept.end());
        extra_points_ = std::move(kept);
    }

    std::vector<Interval> intervals_;
    std::vector<double> extra_points_;
    Completeness tag_ = Completeness::unknown;
};

}  // namespace pmfp
