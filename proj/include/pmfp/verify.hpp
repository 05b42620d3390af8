#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "pmfp/core.hpp"
#include "pmfp/trace.hpp"

namespace pmfp {

// ---------------------------------------------------------------------------
// Finite-evidence verification of the partial-metric axioms
//
//   P1  p(x,y) = p(y,x)
//   P2  p(x,x) = p(x,y) = p(y,y)  =>  x = y
//   P3  p(x,x) <= p(x,y)
//   P4  p(x,z) + p(y,y) <= p(x,y) + p(y,z)
//
// These scans falsify; they cannot prove an axiom over a continuum.
// ---------------------------------------------------------------------------

namespace detail {

/// Evenly spaced deterministic subsample (first and last always kept).
inline std::vector<std::size_t> capped_indices(std::size_t n, std::size_t cap) {
    std::vector<std::size_t> idx;
    if (n <= cap) {
        idx.resize(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        return idx;
    }
    idx.reserve(cap);
    for (std::size_t i = 0; i < cap; ++i) {
        std::size_t k = (i * (n - 1)) / (cap - 1);
        if (idx.empty() || k != idx.back()) idx.push_back(k);
    }
    return idx;
}

/// Dense matrix of p over the (possibly capped) sample.
struct PairTable {
    std::vector<double> points;
    std::vector<double> p;  // row-major, size m*m
    bool capped = false;

    double at(std::size_t i, std::size_t j) const { return p[i * points.size() + j]; }
};

inline PairTable build_pair_table(const PartialMetricSpace& space, const SampleSet& sample,
                                  std::size_t cap) {
    if (sample.empty()) throw input_error("axiom checks require a nonempty sample");
    PairTable t;
    auto idx = capped_indices(sample.size(), cap);
    t.capped = idx.size() < sample.size();
    t.points.reserve(idx.size());
    for (std::size_t k : idx) t.points.push_back(sample.points[k]);
    std::size_t m = t.points.size();
    t.p.resize(m * m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            try {
                t.p[i * m + j] = space.p_raw(t.points[i], t.points[j]);
            } catch (const error& e) {
                throw eval_error("p failed at (" + std::to_string(t.points[i]) + ", " +
                                 std::to_string(t.points[j]) + "): " + e.what());
            }
        }
    }
    return t;
}

}  // namespace detail

/// Scans the four axioms over the sample (capped for the cubic P4 scan).
/// Returns one report per axiom, in order P1..P4.
inline std::array<CheckReport, 4> check_axioms(const PartialMetricSpace& space,
                                               const SampleSet& sample,
                                               const CheckOptions& opts = {}) {
    auto table = detail::build_pair_table(space, sample, opts.axiom_sample_cap);
    const auto& pts = table.points;
    std::size_t m = pts.size();

    detail::WitnessCollector p1("P1", opts), p2("P2", opts), p3("P3", opts), p4("P4", opts);

    // P1: symmetry over unordered pairs.
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            double margin = std::abs(table.at(i, j) - table.at(j, i));
            if (p1.note(margin))
                p1.add({{pts[i], pts[j]}, margin, 0.0, margin, "P1 symmetry"});
        }
    }

    // P2: distinct points must not have coinciding p(x,x), p(x,y), p(y,y).
    // Violation margin is 2*eps - maxdiff so that "all equal" maps to a
    // positive margin under the report convention. Pairs closer than eps_num
    // are themselves indistinguishable at the check's tolerance and are
    // skipped; orbit closures produce such near-coincident points.
    double p2_sep = std::max(kPointTol, opts.eps_num);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            if (pts[j] - pts[i] <= p2_sep) continue;  // never fire on the diagonal
            double pxy = table.at(i, j);
            double maxdiff = std::max(std::abs(table.at(i, i) - pxy),
                                      std::abs(table.at(j, j) - pxy));
            double margin = 2.0 * opts.eps_num - maxdiff;
            if (p2.note(margin))
                p2.add({{pts[i], pts[j]},
                        2.0 * opts.eps_num,
                        maxdiff,
                        margin,
                        "P2 indistinguishable distinct points"});
        }
    }

    // P3: small self-distances, over ordered pairs.
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            if (i == j) continue;
            double lhs = table.at(i, i);
            double rhs = table.at(i, j);
            double margin = lhs - rhs;
            if (p3.note(margin))
                p3.add({{pts[i], pts[j]}, lhs, rhs, margin, "P3 small self-distance"});
        }
    }

    // P4: modified triangle inequality, over ordered triples.
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            double pjj = table.at(j, j);
            for (std::size_t k = 0; k < m; ++k) {
                double lhs = table.at(i, k) + pjj;
                double rhs = table.at(i, j) + table.at(j, k);
                double margin = lhs - rhs;
                if (p4.note(margin))
                    p4.add({{pts[i], pts[j], pts[k]}, lhs, rhs, margin, "P4 triangularity"});
            }
        }
    }

    return {p1.finish(m, table.capped), p2.finish(m, table.capped), p3.finish(m, table.capped),
            p4.finish(m, table.capped)};
}

/// Checks that p^s = 2p(x,y) - p(x,x) - p(y,y) behaves as a metric on the
/// sample: symmetric, zero on the diagonal, positive for distinct points,
/// and triangular.
inline CheckReport check_induced_metric(const PartialMetricSpace& space,
                                        const SampleSet& sample,
                                        const CheckOptions& opts = {}) {
    auto table = detail::build_pair_table(space, sample, opts.axiom_sample_cap);
    const auto& pts = table.points;
    std::size_t m = pts.size();

    std::vector<double> ps(m * m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            ps[i * m + j] = 2.0 * table.at(i, j) - table.at(i, i) - table.at(j, j);
    auto PS = [&](std::size_t i, std::size_t j) { return ps[i * m + j]; };

    detail::WitnessCollector col("ps-metric", opts);

    for (std::size_t i = 0; i < m; ++i) {
        double margin = std::abs(PS(i, i));
        if (col.note(margin))
            col.add({{pts[i]}, margin, 0.0, margin, "ps identity"});
    }
    double pos_sep = std::max(kPointTol, opts.eps_num);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            double sym = std::abs(PS(i, j) - PS(j, i));
            if (col.note(sym)) col.add({{pts[i], pts[j]}, sym, 0.0, sym, "ps symmetry"});
            if (pts[j] - pts[i] > pos_sep) {
                double margin = 2.0 * opts.eps_num - PS(i, j);
                if (col.note(margin))
                    col.add({{pts[i], pts[j]},
                             2.0 * opts.eps_num,
                             PS(i, j),
                             margin,
                             "ps positivity"});
            }
        }
    }
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            for (std::size_t k = 0; k < m; ++k) {
                double margin = PS(i, k) - PS(i, j) - PS(j, k);
                if (col.note(margin))
                    col.add({{pts[i], pts[j], pts[k]},
                             PS(i, k),
                             PS(i, j) + PS(j, k),
                             margin,
                             "ps triangle"});
            }
        }
    }

    return col.finish(m, table.capped);
}

// ---------------------------------------------------------------------------
// Orbit diagnostics
// ---------------------------------------------------------------------------

/// Cauchy-type diagnostics of a Picard orbit. The Cauchy flags are heuristic
/// tail tests over the last quarter of the trace; they cannot quantify over
/// an infinite tail.
struct OrbitDiagnostics {
    double r_x_estimate = 0.0;             // min_n p(x_n, x_n)
    bool self_distances_nonincreasing = false;
    bool is_zero_cauchy = false;           // tail p(x_n, x_m) all <= tail_tol
    bool ps_cauchy = false;                // tail p^s steps all <= tail_tol
    double tail_tol = 1e-6;
    std::size_t tail_begin = 0;
};

inline OrbitDiagnostics orbit_diagnostics(const PartialMetricSpace& space,
                                          const OrbitTrace& trace, double eps_num = kEpsNum,
                                          double tail_tol = 1e-6) {
    const auto& e = trace.entries;
    if (e.size() < 2) throw input_error("orbit diagnostics need at least 2 iterates");

    OrbitDiagnostics d;
    d.tail_tol = tail_tol;

    d.r_x_estimate = e.front().self_distance;
    d.self_distances_nonincreasing = true;
    for (std::size_t i = 0; i < e.size(); ++i) {
        d.r_x_estimate = std::min(d.r_x_estimate, e[i].self_distance);
        if (i + 1 < e.size() && e[i + 1].self_distance > e[i].self_distance + eps_num)
            d.self_distances_nonincreasing = false;
    }

    std::size_t tail = (3 * e.size()) / 4;
    if (tail + 2 > e.size()) tail = e.size() - 2;
    d.tail_begin = tail;

    d.is_zero_cauchy = true;
    for (std::size_t i = tail; i < e.size() && d.is_zero_cauchy; ++i) {
        for (std::size_t j = i; j < e.size(); ++j) {
            if (space.p_raw(e[i].x, e[j].x) > tail_tol) {
                d.is_zero_cauchy = false;
                break;
            }
        }
    }

    d.ps_cauchy = true;
    for (std::size_t i = tail; i < e.size(); ++i) {
        if (e[i].has_step && e[i].ps_step > tail_tol) d.ps_cauchy = false;
    }

    return d;
}

}  // namespace pmfp
