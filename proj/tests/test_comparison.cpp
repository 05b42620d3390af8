#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pmfp/comparison.hpp"

using namespace pmfp;

TEST_CASE("f_inverse closed forms and the generic bracket agree") {
    ComparisonFunction lin = ComparisonFunction::linear(0.5);
    CHECK(f_inverse(lin, 1.0) == 2.0);  // f(t) = t/2

    ComparisonFunction rat = ComparisonFunction::rational();
    double v = f_inverse(rat, 3.0);
    CHECK(v == Catch::Approx((3.0 + std::sqrt(21.0)) / 2.0).margin(1e-12));
    CHECK(v == Catch::Approx(3.791287847).margin(1e-9));
    CHECK(rat.f(v) == Catch::Approx(3.0).margin(1e-12));

    CHECK(f_inverse(lin, 0.0) == 0.0);
    CHECK(f_inverse(rat, 0.0) == 0.0);

    // The same phi as a parsed expression exercises the bracketing path.
    ComparisonFunction rat_expr = ComparisonFunction::custom("t/(1+t)");
    CHECK(f_inverse(rat_expr, 0.0) == 0.0);
    for (double s : {1e-6, 1e-3, 0.1, 1.0, 3.0, 10.0}) {
        double got = f_inverse(rat_expr, s);
        double want = 0.5 * (s + std::sqrt(s * s + 4.0 * s));
        CHECK(got == Catch::Approx(want).margin(1e-8));
        CHECK(rat_expr.f(got) == Catch::Approx(s).margin(1e-9));
        CHECK(got >= s);
    }
}

TEST_CASE("f_inverse reports unreachable values as range errors") {
    // phi(t) = t - t/(1+t) keeps f(t) = t/(1+t) < 1, so s >= 1 is unreachable.
    ComparisonFunction bounded = ComparisonFunction::custom("t-t/(1+t)");
    CHECK_THROWS_AS(f_inverse(bounded, 2.0), range_error);
    CHECK(f_inverse(bounded, 0.5) == Catch::Approx(1.0).margin(1e-8));  // t/(1+t)=1/2 at t=1
}

TEST_CASE("f_inverse detects a decreasing f") {
    // phi(t) = 2t makes f(t) = -t; the bracket can never reach s > 0.
    ComparisonFunction doubling = ComparisonFunction::custom("2*t");
    CHECK_THROWS_AS(f_inverse(doubling, 1.0), error);
}

TEST_CASE("phi_iterate matches closed forms") {
    ComparisonFunction rat = ComparisonFunction::rational();
    CHECK(phi_iterate(rat, 2.0, 3) == Catch::Approx(2.0 / 7.0).margin(1e-15));
    CHECK(phi_iterate(rat, 2.0, 3) ==
          rat.phi(rat.phi(rat.phi(2.0))));  // literal composition
    CHECK(phi_iterate(rat, 0.0, 17) == 0.0);
    CHECK(phi_iterate(rat, 5.0, 0) == 5.0);

    ComparisonFunction lin = ComparisonFunction::linear(0.5);
    CHECK(phi_iterate(lin, 8.0, 3) == 1.0);

    // t/(1+nt) for the rational family.
    for (double t : {0.1, 1.0, 10.0}) {
        for (std::uint64_t n : {1ull, 7ull, 100ull, 10000ull}) {
            double closed = t / (1.0 + static_cast<double>(n) * t);
            CHECK(phi_iterate(rat, t, n) == Catch::Approx(closed).margin(1e-12));
        }
    }
}

TEST_CASE("phi_iterate composes") {
    ComparisonFunction rat = ComparisonFunction::rational();
    for (double t : rat.grid()) {
        double lhs = phi_iterate(rat, t, 12);
        double rhs = phi_iterate(rat, phi_iterate(rat, t, 5), 7);
        CHECK(lhs == Catch::Approx(rhs).margin(1e-12));
    }
}

TEST_CASE("hypothesis checks accept the genuine comparison functions") {
    ComparisonFunction rat = ComparisonFunction::rational();
    HypothesisReport rep = check_hypotheses(rat);
    CHECK(rep.phi_increasing);
    CHECK(rep.f_increasing);
    CHECK(rep.f_inverse_rc_at_0);
    CHECK(rep.phi_iterates_vanish);
    CHECK(rep.property_flags[0]);  // (i)
    CHECK(rep.property_flags[1]);  // (ii): t/(1+t) < t for t > 0
    CHECK(rep.property_flags[2]);  // (iii)
    CHECK(rep.property_flags[3]);  // (iv)
    CHECK(rep.property_flags[4]);  // (v)
    CHECK(rep.property_flags[5]);  // (vi)
    CHECK(property_crosscheck(rep).empty());

    HypothesisReport lin = check_hypotheses(ComparisonFunction::linear(0.9));
    CHECK(lin.all_hypotheses());
    CHECK(property_crosscheck(lin).empty());
}

TEST_CASE("divergent iterates are flagged, not fatal") {
    ComparisonFunction doubling = ComparisonFunction::custom("2*t");
    HypothesisReport rep = check_hypotheses(doubling);
    CHECK_FALSE(rep.phi_iterates_vanish);
    CHECK(rep.phi_increasing);       // 2t is increasing
    CHECK_FALSE(rep.f_increasing);   // f(t) = -t
    CHECK_FALSE(rep.property_flags[1]);  // 2t < t fails
    CHECK(rep.property_flags[4]);        // continuous

    // Implication 4 fires for 2t: (i) and (iv) hold but the
    // iterates diverge. The crosscheck reports it.
    std::vector<int> v = property_crosscheck(rep);
    CHECK(std::find(v.begin(), v.end(), 4) != v.end());
}

TEST_CASE("crosscheck evaluates hand-built flag combinations") {
    HypothesisReport rep;
    rep.property_flags = {true, false, false, false, false, true};  // i, vi
    std::vector<int> v = property_crosscheck(rep);
    REQUIRE(v.size() == 1);
    CHECK(v[0] == 3);  // i & vi should imply ii

    rep.property_flags = {true, true, true, true, false, true};  // iv without v
    v = property_crosscheck(rep);
    REQUIRE(v.size() == 1);
    CHECK(v[0] == 5);

    rep.property_flags = {false, false, false, false, false, false};
    CHECK(property_crosscheck(rep).empty());  // no premises hold
}

TEST_CASE("crosscheck is clean across the built-in families") {
    for (int k = 1; k <= 9; ++k) {
        ComparisonFunction lin = ComparisonFunction::linear(0.1 * k);
        CHECK(property_crosscheck(check_hypotheses(lin)).empty());
    }
    CHECK(property_crosscheck(check_hypotheses(ComparisonFunction::rational())).empty());
}

TEST_CASE("grid evaluation errors propagate with the offending t") {
    // The grid contains 0, where 1/t has a pole.
    ComparisonFunction pole = ComparisonFunction::custom("1/t");
    try {
        check_hypotheses(pole);
        FAIL("expected eval_error");
    } catch (const eval_error& e) {
        CHECK(std::string(e.what()).find("0.000000") != std::string::npos);
    }
}

TEST_CASE("family constructors validate their parameters") {
    CHECK_THROWS_AS(ComparisonFunction::linear(0.0), input_error);
    CHECK_THROWS_AS(ComparisonFunction::linear(1.0), input_error);
    CHECK_THROWS_AS(ComparisonFunction::linear(-0.5), input_error);
    CHECK_THROWS_AS(ComparisonFunction::custom("q+1"), parse_error);
    CHECK_THROWS_AS(f_inverse(ComparisonFunction::rational(), -1.0), input_error);
}
