#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pmfp/solver.hpp"

using namespace pmfp;

namespace {

PartialMetricSpace repaired_space() {
    return PartialMetricSpace::builtin_max("example2-repaired",
                                           CarrierSpec({{0.0, 2.0}, {3.0, 4.0}}, {}));
}

PiecewiseMap repaired_map() {
    return PiecewiseMap::from_sources("T", {{{0.0, 2.0}, "x/2"}, {{3.0, 4.0}, "7/5"}});
}

PartialMetricSpace shifted_space() {
    return PartialMetricSpace::builtin_max("shifted", CarrierSpec({{3.0, 4.0}}, {}));
}

PiecewiseMap shifted_map() {
    return PiecewiseMap::from_sources("T", {{{3.0, 4.0}, "3+(x-3)/2"}});
}

}  // namespace

TEST_CASE("picard orbit halves toward zero") {
    PartialMetricSpace space = repaired_space();
    PiecewiseMap map = repaired_map();
    OrbitTrace tr = picard_orbit(space, map, 3.0, 10000, 1e-8);
    REQUIRE(tr.termination == Termination::converged);
    CHECK(tr.iterations() <= 60);
    CHECK(std::abs(tr.candidate()) <= 1e-7);
    CHECK(tr.entries[1].x == 1.4);
    CHECK(tr.entries[2].x == 0.7);
    CHECK(tr.entries[3].x == 0.35);

    // Self-distances never increase along the orbit (here p(x,x) = x).
    for (std::size_t i = 0; i + 1 < tr.entries.size(); ++i) {
        CHECK(tr.entries[i + 1].self_distance <= tr.entries[i].self_distance + kEpsNum);
    }
    // distance_to_start stays at max(x_n, 3) = 3 on this orbit.
    for (const auto& e : tr.entries) CHECK(e.distance_to_start == 3.0);
}

TEST_CASE("a fixed point converges immediately") {
    OrbitTrace tr = picard_orbit(repaired_space(), repaired_map(), 0.0, 10000, 1e-8);
    REQUIRE(tr.termination == Termination::converged);
    CHECK(tr.iterations() == 1);
    CHECK(tr.candidate() == 0.0);
}

TEST_CASE("orbit with nonzero limit self-distance") {
    OrbitTrace tr = picard_orbit(shifted_space(), shifted_map(), 4.0, 10000, 1e-8);
    REQUIRE(tr.termination == Termination::converged);
    CHECK(tr.candidate() == Catch::Approx(3.0).margin(1e-8));
    CHECK(tr.entries.back().self_distance == Catch::Approx(3.0).margin(1e-8));
}

TEST_CASE("orbit input validation and abort semantics") {
    CHECK_THROWS_AS(picard_orbit(repaired_space(), repaired_map(), 0.5, 0, 1e-8), input_error);
    CHECK_THROWS_AS(picard_orbit(repaired_space(), repaired_map(), 0.5, 10, 0.0), input_error);
    CHECK_THROWS_AS(picard_orbit(repaired_space(), repaired_map(), 2.5, 10, 1e-8),
                    domain_error);

    // The unrepaired carrier: T(3) = 1.4 leaves it; the partial trace is kept.
    PartialMetricSpace paper = PartialMetricSpace::builtin_max(
        "paper", CarrierSpec({{0.0, 1.0}, {3.0, 4.0}}, {}));
    PiecewiseMap map =
        PiecewiseMap::from_sources("T", {{{0.0, 1.0}, "x/2"}, {{3.0, 4.0}, "7/5"}});
    try {
        picard_orbit(paper, map, 3.0, 10000, 1e-8);
        FAIL("expected orbit_error");
    } catch (const orbit_error& e) {
        CHECK(e.partial_trace().termination == Termination::error);
        REQUIRE_FALSE(e.partial_trace().entries.empty());
        CHECK(e.partial_trace().entries.front().x == 3.0);
    }
}

TEST_CASE("max_iter exhaustion is reported, not hidden") {
    // tol far below what 3 iterations can reach.
    OrbitTrace tr = picard_orbit(repaired_space(), repaired_map(), 3.0, 3, 1e-8);
    CHECK(tr.termination == Termination::max_iter);
    CHECK(tr.iterations() == 3);
    CHECK(tr.entries.back().x == 0.35);
}

TEST_CASE("M_x closed forms") {
    PartialMetricSpace space = repaired_space();
    PiecewiseMap map = repaired_map();
    ComparisonFunction rat = ComparisonFunction::rational();

    // x = 3: p(3, T3) = 3, f^{-1}(3) = (3+sqrt(21))/2, p(3,3) = 3.
    double m3 = compute_Mx(space, map, rat, 3.0);
    CHECK(m3 == Catch::Approx((3.0 + std::sqrt(21.0)) / 2.0 + 3.0).margin(1e-12));
    CHECK(m3 == Catch::Approx(6.791287847).margin(1e-6));

    // x = 1: p(1, 0.5) = 1, f^{-1}(1) = golden ratio.
    double m1 = compute_Mx(space, map, rat, 1.0);
    CHECK(m1 == Catch::Approx((1.0 + std::sqrt(5.0)) / 2.0 + 1.0).margin(1e-12));
    CHECK(m1 == Catch::Approx(2.618034).margin(1e-6));

    // x = 0 is a fixed point with zero self-distance.
    CHECK(compute_Mx(space, map, rat, 0.0) == 0.0);

    // M_x >= p(x, Tx) since f^{-1}(s) >= s.
    for (double x : {0.25, 0.7, 1.0, 2.0, 3.0, 3.5, 4.0}) {
        double tx = apply_map(map, space.carrier(), x);
        CHECK(compute_Mx(space, map, rat, x) >= space.p_raw(x, tx));
    }
}

TEST_CASE("the orbit-radius bound holds along real orbits and fails on forgeries") {
    PartialMetricSpace space = repaired_space();
    PiecewiseMap map = repaired_map();
    ComparisonFunction rat = ComparisonFunction::rational();

    OrbitTrace tr = picard_orbit(space, map, 3.0, 10000, 1e-8);
    double m3 = compute_Mx(space, map, rat, 3.0);
    CheckReport ok = verify_orbit_bound(tr, m3);
    CHECK(ok.pass);

    OrbitTrace zero = picard_orbit(space, map, 0.0, 10000, 1e-8);
    CHECK(verify_orbit_bound(zero, compute_Mx(space, map, rat, 0.0)).pass);

    // Adversarial: inject an entry beyond the bound.
    OrbitTrace forged = tr;
    OrbitEntry bad = forged.entries.back();
    bad.n += 1;
    bad.distance_to_start = m3 + 1.0;
    forged.entries.push_back(bad);
    CheckReport fail = verify_orbit_bound(forged, m3);
    CHECK_FALSE(fail.pass);
    REQUIRE_FALSE(fail.witnesses.empty());
    CHECK(fail.witnesses.front().margin == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("solve on the repaired example reaches zero from every start") {
    FixedPointResult res =
        solve_fixed_point(repaired_space(), repaired_map(), ComparisonFunction::rational(),
                          ConditionKind::eq8(ComparisonFunction::rational()),
                          {4.0, 3.0, 2.0, 1.0, 0.37});
    CHECK(res.converged_all);
    CHECK(res.hypotheses_ok);
    CHECK(res.contraction_ok);
    CHECK(std::abs(res.candidate) <= 2e-8);
    CHECK(res.self_distance <= 2e-8);
    CHECK(res.rho_p == 0.0);
    CHECK(res.rho_exact);
    CHECK(res.in_Xp);
    CHECK(res.ps_residual <= 1e-8);
    CHECK(res.fixed_point_residual <= 2e-8);
    CHECK(res.starts_agreement <= 1e-6);
    CHECK(res.unique_claimed);
    CHECK(res.uniqueness_scope == "global");
    REQUIRE(res.starts.size() == 5);
    CHECK(res.starts.front().start == 0.37);  // ascending order
    for (const auto& s : res.starts) {
        CHECK(s.converged);
        CHECK(s.orbit_bound_ok);
        CHECK(s.iterations <= 80);
        CHECK(s.diagnostics.self_distances_nonincreasing);
    }
    // r_x_estimate never exceeds any recorded self-distance and matches the
    // candidate's self-distance on converged runs.
    CHECK(res.r_x_estimate <= res.self_distance + 1e-12);
    CHECK(std::abs(res.r_x_estimate - res.self_distance) <= 1e-8);
}

TEST_CASE("solve on the shifted space keeps the nonzero self-distance") {
    FixedPointResult res =
        solve_fixed_point(shifted_space(), shifted_map(), ComparisonFunction::linear(0.5),
                          ConditionKind::thm1(0.5), {3.0, 3.5, 4.0});
    CHECK(res.converged_all);
    CHECK(res.contraction_ok);
    CHECK(res.candidate == 3.0);  // the first ascending start is the fixed point
    CHECK(res.self_distance == 3.0);
    CHECK(res.rho_p == 3.0);
    CHECK(res.in_Xp);
    CHECK(res.unique_claimed);
    CHECK(res.uniqueness_scope == "X_p");
    CHECK(res.fixed_point_residual <= 2e-8);
}

TEST_CASE("solve on a single-point carrier is immediate") {
    PartialMetricSpace space =
        PartialMetricSpace::builtin_max("point", CarrierSpec({{2.0, 2.0}}, {}));
    PiecewiseMap identity = PiecewiseMap::from_sources("I", {{{2.0, 2.0}, "x"}});
    FixedPointResult res = solve_fixed_point(
        space, identity, ComparisonFunction::rational(),
        ConditionKind::eq3(ComparisonFunction::rational()), {2.0});
    CHECK(res.converged_all);
    CHECK(res.candidate == 2.0);
    CHECK(res.iterations == 1);
    CHECK(res.starts_agreement == 0.0);
}

TEST_CASE("solve keeps going when the condition fails and says so") {
    PartialMetricSpace usual = PartialMetricSpace::from_expression(
        "usual", CarrierSpec({{0.0, 2.0}, {3.0, 4.0}}, {}), "abs(x-y)");
    FixedPointResult res = solve_fixed_point(
        usual, repaired_map(), ComparisonFunction::rational(),
        ConditionKind::eq8(ComparisonFunction::rational()), {4.0, 1.0});
    CHECK(res.converged_all);         // the orbits still converge
    CHECK_FALSE(res.contraction_ok);  // but the condition fails
    CHECK_FALSE(res.unique_claimed);  // so no uniqueness claim
    REQUIRE_FALSE(res.warnings.empty());

    CHECK_THROWS_AS(
        solve_fixed_point(usual, repaired_map(), ComparisonFunction::rational(),
                          ConditionKind::eq8(ComparisonFunction::rational()), {}),
        input_error);
}
