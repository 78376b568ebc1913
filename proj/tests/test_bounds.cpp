#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "qcalc/bounds.hpp"

using namespace qcalc;

namespace {

// 80-term compensated direct sum, the independent oracle for values inside
// the series radius.
double ml_series_oracle(double alpha, double beta, double z, const QContext& ctx) {
    CompensatedSum s;
    double zk = 1.0;
    for (int k = 0; k < 80; ++k) {
        s.add(zk * recip_q_gamma(alpha * k + beta, ctx));
        zk *= z;
    }
    return s.value();
}

}  // namespace

TEST_CASE("ml_bounds_check pointwise") {
    QContext ctx(0.5);
    SECTION("z = 0 collapses value and both bounds to 1") {
        auto r = ml_bounds_check(0.5, 0.0, ctx);
        CHECK(r.value == Catch::Approx(1.0).margin(1e-12));
        CHECK(r.lower == 1.0);
        CHECK(r.upper == 1.0);
        CHECK(std::abs(r.margin_lower) <= 1e-12);
        CHECK(std::abs(r.margin_upper) <= 1e-12);
    }
    SECTION("interior point satisfies the strict range") {
        auto r = ml_bounds_check(0.5, 0.5, ctx);
        CHECK(r.holds_range);
        CHECK(r.value == Catch::Approx(ml_series_oracle(0.5, 1.0, -0.5, ctx)).epsilon(1e-12));
    }
    SECTION("hypothesis violations are rejected") {
        CHECK_THROWS_AS(ml_bounds_check(1.2, 0.5, ctx), InvalidArgument);
        CHECK_THROWS_AS(ml_bounds_check(0.5, -1.0, ctx), InvalidArgument);
    }
}

TEST_CASE("ml_decay_check pointwise") {
    SECTION("computable constant case") {
        QContext ctx(0.3);
        auto r = ml_decay_check({0.5, 1.0}, 0.5, ctx);
        CHECK_FALSE(r.decay_constant_empirical);
        CHECK(r.holds_decay);
        CHECK(std::abs(r.value) <= r.decay_bound);
        // z -> 0: bound reduces to C_q, which must then be >= 1
        auto r0 = ml_decay_check({0.5, 1.0}, 1e-14, ctx);
        CHECK(r0.decay_bound >= 1.0);
    }
    SECTION("beta = 0.5 at z = 0 is the k = 0 term") {
        QContext ctx(0.5);
        auto r = ml_decay_check({0.5, 0.5}, 0.0, ctx);
        CHECK(r.value == Catch::Approx(1.0 / q_gamma(0.5, ctx)).epsilon(1e-13));
    }
    SECTION("non-computable constant falls back to the empirical sup") {
        QContext ctx(0.5);
        // alpha' (1-sqrt(q)) = 2/(1-q^beta) = 4 = q^{-2} for beta = 1: exact pole
        auto r = ml_decay_check({1.0, 1.0}, 0.7, ctx);
        CHECK(r.decay_constant_empirical);
        CHECK(r.holds_decay);
        CHECK(r.decay_bound == Catch::Approx(std::abs(r.value)).epsilon(1e-14));
    }
    SECTION("beta = 0 rows are never computable") {
        QContext ctx(0.5);
        auto c = decay_constant({0.5, 0.0}, ctx);
        CHECK_FALSE(c.computable);
        auto r = ml_decay_check({0.5, 0.0}, 0.5, ctx);
        CHECK(r.decay_constant_empirical);
    }
}

TEST_CASE("strict range holds with margin on the default grid") {
    for (double alpha : DefaultGrids::range_alphas()) {
        for (double q : DefaultGrids::range_qs()) {
            QContext ctx(q);
            for (double z : DefaultGrids::range_zs(alpha, q)) {
                auto r = ml_bounds_check(alpha, z, ctx);
                REQUIRE(r.value >= 1e-12);
                REQUIRE(r.value <= 1.0 - 1e-12);
            }
        }
    }
}

TEST_CASE("bound expressions: ordering, consistency, monotonicity") {
    for (double alpha : DefaultGrids::range_alphas()) {
        for (double q : DefaultGrids::range_qs()) {
            QContext ctx(q);
            double prev_lower = 1.0, prev_upper = 1.0;
            for (double z : DefaultGrids::range_zs(alpha, q)) {
                auto r = ml_bounds_check(alpha, z, ctx);
                REQUIRE(r.lower <= r.upper * (1.0 + 1e-14));
                REQUIRE(r.lower < prev_lower);
                REQUIRE(r.upper < prev_upper);
                prev_lower = r.lower;
                prev_upper = r.upper;
            }
        }
    }
}

TEST_CASE("bounds_scan") {
    QContext ctx(0.5);
    SECTION("empty grids produce an empty report") {
        CHECK(bounds_scan({}, {1.0}, {0.5}, {0.5}, ctx).empty());
        CHECK(bounds_scan({0.5}, {1.0}, {0.5}, {}, ctx).empty());
    }
    SECTION("singleton grids equal the pointwise checks") {
        auto rows = bounds_scan({0.5}, {1.0}, {0.5}, {0.4}, ctx);
        REQUIRE(rows.size() == 1);
        auto point = ml_bounds_check(0.5, 0.4, ctx);
        CHECK(rows[0].value == point.value);
        CHECK(rows[0].lower == point.lower);
        CHECK(rows[0].upper == point.upper);
        CHECK(rows[0].margin_lower == point.margin_lower);
        auto decay_point = ml_decay_check({0.5, 1.0}, 0.4, ctx);
        CHECK(rows[0].decay_bound == decay_point.decay_bound);
    }
    SECTION("inadmissible tuples are skipped") {
        auto rows = bounds_scan({2.5}, {1.0}, {0.5}, {0.4}, ctx);
        CHECK(rows.empty());
    }
    SECTION("default decay grid: all rows finite, computable rows hold") {
        auto rows = bounds_scan(DefaultGrids::decay_alphas(), DefaultGrids::decay_betas(),
                                DefaultGrids::decay_qs(), DefaultGrids::decay_zs(), ctx);
        REQUIRE(rows.size() == 3u * 3u * 2u * 15u);
        for (const auto& r : rows) {
            REQUIRE_FALSE(r.failed);
            REQUIRE(std::isfinite((1.0 + r.z) * std::abs(r.value)));
            REQUIRE(r.holds_decay);
        }
    }
    SECTION("empirical groups share the group sup") {
        auto rows = bounds_scan({1.0}, {1.0}, {0.5}, {0.3, 0.6, 1.2}, ctx);
        REQUIRE(rows.size() == 3);
        double sup = 0.0;
        for (const auto& r : rows) sup = std::max(sup, (1.0 + r.z) * std::abs(r.value));
        for (const auto& r : rows) {
            REQUIRE(r.decay_constant_empirical);
            CHECK(r.decay_bound == Catch::Approx(sup / (1.0 + r.z)).epsilon(1e-14));
        }
    }
}

TEST_CASE("csv serialization has the fixed header and one line per row") {
    QContext ctx(0.5);
    auto rows = bounds_scan({0.5}, {1.0}, {0.5}, {0.2, 0.4}, ctx);
    std::string csv = bounds_to_csv(rows);
    CHECK(csv.rfind("alpha,beta,q,z,value,lower,upper,decay_bound,holds_lower,holds_upper,"
                    "holds_range,holds_decay,margin_lower,margin_upper\n",
                    0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}
