#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmfp/comparison.hpp"
#include "pmfp/core.hpp"

namespace pmfp {

// ---------------------------------------------------------------------------
// Contraction-type conditions
//
// For a pair (x, y), the checked inequality is  p(Tx,Ty) <= RHS  with
//   eq3   RHS = max{ phi(p(x,y)), p(x,x), p(y,y) }
//   eq8   RHS = max{ phi(p(x,y)), (p(x,x)+p(y,y))/2 }
//   eq9   RHS = phi(p(x,y))
//   thm1  RHS = max{ alpha p(x,y), p(x,x), p(y,y) },  alpha in [0,1)
// ---------------------------------------------------------------------------

enum class ConditionTag { eq3, eq8, eq9, thm1 };

inline const char* to_string(ConditionTag t) {
    switch (t) {
        case ConditionTag::eq3: return "eq3";
        case ConditionTag::eq8: return "eq8";
        case ConditionTag::eq9: return "eq9";
        default: return "thm1";
    }
}

inline ConditionTag condition_tag_from_string(const std::string& s) {
    if (s == "eq3") return ConditionTag::eq3;
    if (s == "eq8") return ConditionTag::eq8;
    if (s == "eq9") return ConditionTag::eq9;
    if (s == "thm1") return ConditionTag::thm1;
    throw input_error("unknown condition kind '" + s + "'");
}

class ConditionKind {
public:
    static ConditionKind eq3(ComparisonFunction phi) {
        return ConditionKind(ConditionTag::eq3, std::move(phi), 0.0);
    }
    static ConditionKind eq8(ComparisonFunction phi) {
        return ConditionKind(ConditionTag::eq8, std::move(phi), 0.0);
    }
    static ConditionKind eq9(ComparisonFunction phi) {
        return ConditionKind(ConditionTag::eq9, std::move(phi), 0.0);
    }
    static ConditionKind thm1(double alpha) {
        if (!(alpha >= 0.0 && alpha < 1.0))
            throw input_error("thm1 needs alpha in [0,1)");
        return ConditionKind(ConditionTag::thm1, std::nullopt, alpha);
    }

    ConditionTag tag() const noexcept { return tag_; }
    double alpha() const { return alpha_; }

    const ComparisonFunction& phi() const {
        if (!phi_) throw input_error("condition kind carries no comparison function");
        return *phi_;
    }

    bool needs_phi() const noexcept { return tag_ != ConditionTag::thm1; }

private:
    ConditionKind(ConditionTag tag, std::optional<ComparisonFunction> phi, double alpha)
        : tag_(tag), phi_(std::move(phi)), alpha_(alpha) {}

    ConditionTag tag_;
    std::optional<ComparisonFunction> phi_;
    double alpha_;
};

/// Right-hand side of the condition for given distances.
inline double condition_rhs(const ConditionKind& kind, double p_xy, double p_xx, double p_yy) {
    switch (kind.tag()) {
        case ConditionTag::eq3:
            return std::max({kind.phi().phi(p_xy), p_xx, p_yy});
        case ConditionTag::eq8:
            return std::max(kind.phi().phi(p_xy), 0.5 * (p_xx + p_yy));
        case ConditionTag::eq9:
            return kind.phi().phi(p_xy);
        case ConditionTag::thm1:
            return std::max({kind.alpha() * p_xy, p_xx, p_yy});
    }
    throw input_error("corrupt condition kind");
}

namespace detail {

/// Canonical pair scan shared by the checker and the equivalence probe.
/// Calls `fn(i, j, lhs, rhs)` for every unordered pair i <= j of sample
/// indices, in row-major order. For phi-backed kinds the pointwise RHS
/// ordering eq9 <= eq8 <= eq3 is asserted on every pair.
template <typename Fn>
void scan_condition_pairs(const PartialMetricSpace& space, const PiecewiseMap& map,
                          const ConditionKind& kind, const SampleSet& sample, Fn&& fn) {
    if (sample.empty()) throw input_error("contraction check requires a nonempty sample");
    const auto& pts = sample.points;
    std::size_t n = pts.size();

    std::vector<double> image(n), self(n);
    for (std::size_t i = 0; i < n; ++i) {
        image[i] = apply_map(map, space.carrier(), pts[i]);
        self[i] = space.p_raw(pts[i], pts[i]);
    }

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double p_xy = space.p_raw(pts[i], pts[j]);
            double lhs = space.p_raw(image[i], image[j]);
            double rhs = condition_rhs(kind, p_xy, self[i], self[j]);
            if (kind.needs_phi()) {
                double phi_v = kind.phi().phi(p_xy);
                double r9 = phi_v;
                double r8 = std::max(phi_v, 0.5 * (self[i] + self[j]));
                double r3 = std::max({phi_v, self[i], self[j]});
                if (r9 > r8 || r8 > r3)
                    throw std::logic_error("condition RHS ordering eq9<=eq8<=eq3 violated");
            }
            fn(i, j, lhs, rhs);
        }
    }
}

}  // namespace detail

/// Scans the condition over all unordered sample pairs (including x = y).
/// Violations use LHS <= RHS + eps_num: exactly-tight pairs are a feature of
/// genuine examples, not counterexamples.
inline CheckReport check_contraction(const PartialMetricSpace& space, const PiecewiseMap& map,
                                     const ConditionKind& kind, const SampleSet& sample,
                                     const CheckOptions& opts = {}) {
    detail::WitnessCollector col(std::string("contraction-") + to_string(kind.tag()), opts);
    const auto& pts = sample.points;
    detail::scan_condition_pairs(space, map, kind, sample,
                                 [&](std::size_t i, std::size_t j, double lhs, double rhs) {
                                     double margin = lhs - rhs;
                                     if (col.note(margin))
                                         col.add({{pts[i], pts[j]},
                                                  lhs,
                                                  rhs,
                                                  margin,
                                                  to_string(kind.tag())});
                                 });
    return col.finish(sample.size(), false);
}

/// thm1(alpha) and eq3 with phi(t) = alpha t are the same condition. This
/// runs both scans and compares them margin by margin.
inline bool thm1_eq3_equivalence(const PartialMetricSpace& space, const PiecewiseMap& map,
                                   double alpha, const SampleSet& sample,
                                   double margin_tol = 1e-15, double eps_num = kEpsNum) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw input_error("thm1_eq3_equivalence needs alpha in (0,1)");
    if (sample.empty()) throw input_error("thm1_eq3_equivalence requires a nonempty sample");

    std::vector<double> margins_thm1, margins_eq3;
    margins_thm1.reserve(sample.size() * (sample.size() + 1) / 2);
    margins_eq3.reserve(margins_thm1.capacity());

    detail::scan_condition_pairs(space, map, ConditionKind::thm1(alpha), sample,
                                 [&](std::size_t, std::size_t, double lhs, double rhs) {
                                     margins_thm1.push_back(lhs - rhs);
                                 });
    detail::scan_condition_pairs(space, map, ConditionKind::eq3(ComparisonFunction::linear(alpha)),
                                 sample,
                                 [&](std::size_t, std::size_t, double lhs, double rhs) {
                                     margins_eq3.push_back(lhs - rhs);
                                 });

    double worst1 = -std::numeric_limits<double>::infinity();
    double worst3 = worst1;
    for (std::size_t k = 0; k < margins_thm1.size(); ++k) {
        if (std::abs(margins_thm1[k] - margins_eq3[k]) > margin_tol) return false;
        worst1 = std::max(worst1, margins_thm1[k]);
        worst3 = std::max(worst3, margins_eq3[k]);
    }
    return (worst1 <= eps_num) == (worst3 <= eps_num);
}

// ---------------------------------------------------------------------------
// Randomized counterexample search
// ---------------------------------------------------------------------------

struct FalsifyResult {
    std::optional<Witness> witness;
    std::string status;  // "found" or "exhausted"
    std::uint64_t pairs_tried = 0;
};

namespace detail {

/// Deterministic uniform double in [0,1) from a seeded engine; avoids
/// std::uniform_real_distribution, whose output is implementation-defined.
inline double next_unit(std::mt19937_64& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

inline double draw_carrier_point(const CarrierSpec& carrier, std::mt19937_64& eng) {
    double total = carrier.total_length();
    if (total > 0.0) {
        double u = next_unit(eng) * total;
        for (const auto& iv : carrier.intervals()) {
            double len = iv.hi - iv.lo;
            if (u <= len || &iv == &carrier.intervals().back())
                return std::min(iv.lo + std::min(u, len), iv.hi);
            u -= len;
        }
    }
    // Degenerate carrier: pick among isolated points and collapsed intervals.
    std::vector<double> atoms = carrier.extra_points();
    for (const auto& iv : carrier.intervals()) atoms.push_back(iv.lo);
    if (atoms.empty()) throw input_error("cannot sample from an empty carrier");
    auto k = static_cast<std::size_t>(next_unit(eng) * static_cast<double>(atoms.size()));
    if (k >= atoms.size()) k = atoms.size() - 1;
    return atoms[k];
}

}  // namespace detail

/// Draws `budget` pairs uniformly from the carrier, keeps the worst margin,
/// and refines any violation by a local pattern search with halving step.
/// Reproducible: the same seed and budget always yield the same result.
inline FalsifyResult falsify(const PartialMetricSpace& space, const PiecewiseMap& map,
                             const ConditionKind& kind, std::uint64_t budget,
                             std::uint64_t seed, double eps_num = kEpsNum) {
    FalsifyResult out;
    out.status = "exhausted";
    out.pairs_tried = budget;

    const CarrierSpec& carrier = space.carrier();
    std::mt19937_64 eng(seed);

    auto margin_at = [&](double x, double y) {
        double tx = apply_map(map, carrier, x);
        double ty = apply_map(map, carrier, y);
        double lhs = space.p_raw(tx, ty);
        double rhs = condition_rhs(kind, space.p_raw(x, y), space.p_raw(x, x),
                                   space.p_raw(y, y));
        return std::pair<double, double>{lhs, rhs};
    };

    bool have_best = false;
    double bx = 0.0, by = 0.0, best_margin = -std::numeric_limits<double>::infinity();
    for (std::uint64_t k = 0; k < budget; ++k) {
        double x = detail::draw_carrier_point(carrier, eng);
        double y = detail::draw_carrier_point(carrier, eng);
        auto [lhs, rhs] = margin_at(x, y);
        double margin = lhs - rhs;
        if (!have_best || margin > best_margin) {
            have_best = true;
            best_margin = margin;
            bx = x;
            by = y;
        }
    }

    if (!have_best || best_margin <= eps_num) return out;

    // Local refinement: pattern search with step halving.
    double span = carrier.greatest_point() - carrier.least_point();
    double h = span > 0.0 ? span / 8.0 : 0.0;
    for (int round = 0; round < 20 && h > 0.0; ++round, h *= 0.5) {
        bool moved = true;
        for (int hop = 0; moved && hop < 64; ++hop) {
            moved = false;
            for (int dx = -1; dx <= 1; ++dx) {
                for (int dy = -1; dy <= 1; ++dy) {
                    if (dx == 0 && dy == 0) continue;
                    double cx = carrier.project(bx + dx * h);
                    double cy = carrier.project(by + dy * h);
                    auto [lhs, rhs] = margin_at(cx, cy);
                    double margin = lhs - rhs;
                    if (margin > best_margin) {
                        best_margin = margin;
                        bx = cx;
                        by = cy;
                        moved = true;
                    }
                }
            }
        }
    }

    auto [lhs, rhs] = margin_at(bx, by);
    out.witness = Witness{{bx, by}, lhs, rhs, lhs - rhs, to_string(kind.tag())};
    out.status = "found";
    return out;
}

}  // namespace pmfp
