#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "qcalc/spectral.hpp"

using namespace qcalc;

namespace {

CoefficientField coeffs(std::initializer_list<double> v) {
    CoefficientField c;
    c.coefficients = v;
    return c;
}

}  // namespace

TEST_CASE("sobolev_norm") {
    SpectralModel model = make_model({0.0, 1.0}, 1.0);
    CHECK(sobolev_norm(coeffs({0.0, 0.0}), model, 2.0) == 0.0);
    CHECK(sobolev_norm(coeffs({3.0, 4.0}), model, 0.0) == Catch::Approx(5.0).epsilon(1e-15));
    CHECK(sobolev_norm(coeffs({1.0, 1.0}), model, 2.0) ==
          Catch::Approx(std::sqrt(5.0)).epsilon(1e-15));
    SECTION("nondecreasing in d for nonnegative eigenvalues") {
        auto c = coeffs({0.5, -1.5});
        double prev = 0.0;
        for (double d : {-1.0, 0.0, 1.0, 2.0, 3.0}) {
            double n = sobolev_norm(c, model, d);
            CHECK(n >= prev);
            prev = n;
        }
    }
}

TEST_CASE("model construction") {
    CHECK_THROWS_AS(make_model({}, 1.0), InvalidArgument);
    CHECK_THROWS_AS(make_model({-1.0}, 1.0), InvalidArgument);
    CHECK_THROWS_AS(make_model({2.0, 1.0}, 1.0), InvalidArgument);
    CHECK_THROWS_AS(make_model({1.0}, 0.0), InvalidArgument);
    SpectralModel m = dirichlet_sine_model(4, 1.0);
    CHECK(m.eigenvalues == std::vector<double>{1.0, 4.0, 9.0, 16.0});
    CHECK(m.basis(1, M_PI / 2.0) == Catch::Approx(std::sqrt(2.0 / M_PI)).epsilon(1e-15));
}

TEST_CASE("time grid") {
    TimeGrid g = make_time_grid(1.0, 0.5, 1e-10);
    CHECK(g.nodes.front() == 1.0);
    CHECK(g.nodes.back() == 0.0);
    CHECK(g.depth() >= 33);
    CHECK(g.nodes[g.nodes.size() - 2] < 1e-9);
    for (std::size_t i = 1; i + 1 < g.nodes.size(); ++i) CHECK(g.nodes[i] < g.nodes[i - 1]);
}

TEST_CASE("suborder direct solver") {
    QContext ctx(0.5);
    SpectralModel model = make_model({0.0}, 1.0);  // lambda + m = 1
    TimeGrid grid = make_time_grid(1.0, ctx.q);
    double alpha = 0.5;

    SECTION("source-free solution is the Mittag-Leffler trace") {
        auto b = direct_solve_suborder(alpha, coeffs({2.0}), nullptr, model, grid, ctx);
        REQUIRE(b.mode_ok(0));
        for (int i = 0; i < grid.node_count() - 1; ++i) {
            double t = grid.nodes[static_cast<std::size_t>(i)];
            double expect =
                2.0 * q_mittag_leffler({alpha, 1.0}, -std::pow(t, alpha), ctx).value;
            REQUIRE(b.traces[0][static_cast<std::size_t>(i)] ==
                    Catch::Approx(expect).epsilon(1e-11));
        }
        CHECK(b.traces[0].back() == 2.0);  // t = 0 gives the initial datum exactly
    }
    SECTION("steady state: constant source (lambda+m) phi holds u at phi") {
        ModeSource src = [](int, double) { return 3.0; };  // (lambda+m) phi = 1 * 3
        auto b = direct_solve_suborder(alpha, coeffs({3.0}), src, model, grid, ctx);
        for (double u : b.traces[0]) REQUIRE(u == Catch::Approx(3.0).epsilon(1e-11));
    }
    SECTION("residual of the source-free solve") {
        auto b = direct_solve_suborder(alpha, coeffs({1.0}), nullptr, model, grid, ctx);
        double res = residual_check(b, alpha, model, ctx);
        CHECK(res <= 1e-6);
    }
    SECTION("residual with a constant source") {
        ModeSource src = [](int, double) { return 0.7; };
        auto b = direct_solve_suborder(alpha, coeffs({1.0}), src, model, grid, ctx);
        CHECK(residual_check(b, alpha, model, ctx) <= 1e-6);
    }
    SECTION("residual with a time-dependent source") {
        ModeSource src = [](int, double t) { return std::pow(t, 0.7); };
        auto b = direct_solve_suborder(alpha, coeffs({1.0}), src, model, grid, ctx);
        CHECK(residual_check(b, alpha, model, ctx) <= 1e-6);
    }
    SECTION("alpha = 1 is admitted") {
        auto b = direct_solve_suborder(1.0, coeffs({1.0}), nullptr, model, grid, ctx);
        CHECK(residual_check(b, 1.0, model, ctx) <= 1e-6);
    }
    SECTION("fast path agrees with the generic translated kernel quadrature") {
        double lam = 1.0;
        ModeSource src = [](int, double t) { return 1.0 + t; };
        auto b = direct_solve_suborder(0.6, coeffs({0.5}), src, model, grid, ctx);
        double t = grid.nodes[3];
        CompensatedSum duh;
        double qj = 1.0;
        for (int j = 0; j < 60; ++j) {
            double s = t * qj;
            duh.add(qj * q_pochhammer_real(ctx.q * s / t, 0.6 - 1.0, ctx).value *
                    translated_ml({0.6, 0.6}, -lam, t, s, ctx).value * (1.0 + s));
            qj *= ctx.q;
        }
        double expect =
            0.5 * q_mittag_leffler({0.6, 1.0}, -std::pow(t, 0.6), ctx).value +
            (1.0 - ctx.q) * std::pow(t, 0.6) * duh.value();
        CHECK(b.traces[0][3] == Catch::Approx(expect).epsilon(1e-11));
    }
    SECTION("strict mode records failing modes instead of throwing") {
        SpectralModel stiff = make_model({500.0}, 1.0);
        EvalStrategy strict{EvalMode::SeriesOnly, 40};
        auto b = direct_solve_suborder(alpha, coeffs({1.0}), nullptr, stiff, grid, ctx, strict);
        CHECK_FALSE(b.mode_ok(0));
        CHECK(b.mode_status[0] == SeriesStatus::Diverged);
        CHECK(std::isnan(b.traces[0][0]));
    }
    SECTION("linearity of the solve map") {
        ModeSource src1 = [](int, double t) { return std::sin(t) + 1.0; };
        ModeSource src2 = [](int, double t) { return t * t; };
        ModeSource combo = [&](int k, double t) { return 2.0 * src1(k, t) - 3.0 * src2(k, t); };
        auto b1 = direct_solve_suborder(alpha, coeffs({1.0}), src1, model, grid, ctx);
        auto b2 = direct_solve_suborder(alpha, coeffs({-0.5}), src2, model, grid, ctx);
        auto bc = direct_solve_suborder(alpha, coeffs({2.0 * 1.0 - 3.0 * -0.5}), combo, model,
                                        grid, ctx);
        for (int i = 0; i < grid.node_count(); ++i) {
            double expect = 2.0 * b1.traces[0][static_cast<std::size_t>(i)] -
                            3.0 * b2.traces[0][static_cast<std::size_t>(i)];
            REQUIRE(bc.traces[0][static_cast<std::size_t>(i)] ==
                    Catch::Approx(expect).margin(1e-10).epsilon(1e-10));
        }
    }
}

TEST_CASE("superorder direct solver") {
    QContext ctx(0.5);
    SpectralModel model = make_model({0.0}, 1.0);
    TimeGrid grid = make_time_grid(1.0, ctx.q);
    double alpha = 1.5;

    SECTION("all-zero data gives the zero solution") {
        auto b = direct_solve_superorder(alpha, coeffs({0.0}), coeffs({0.0}), nullptr, model,
                                         grid, ctx);
        for (double u : b.traces[0]) REQUIRE(u == 0.0);
    }
    SECTION("rho = 0, f = 0 reduces to the first kernel") {
        auto b = direct_solve_superorder(alpha, coeffs({1.5}), coeffs({0.0}), nullptr, model,
                                         grid, ctx);
        for (int i = 0; i < grid.node_count() - 1; ++i) {
            double t = grid.nodes[static_cast<std::size_t>(i)];
            double expect =
                1.5 * q_mittag_leffler({alpha, 1.0}, -std::pow(t, alpha), ctx).value;
            REQUIRE(b.traces[0][static_cast<std::size_t>(i)] ==
                    Catch::Approx(expect).epsilon(1e-10));
        }
    }
    SECTION("phi = 0 single mode: residual and both initial conditions") {
        auto b = direct_solve_superorder(alpha, coeffs({0.0}), coeffs({2.0}), nullptr, model,
                                         grid, ctx);
        CHECK(b.traces[0].back() == 0.0);  // u(0) = 0 exactly
        CHECK(residual_check(b, alpha, model, ctx) <= 1e-5);
        // first q-derivative trace at the deep end approximates rho
        int J = grid.depth();
        double t1 = grid.nodes[static_cast<std::size_t>(J - 1)];
        double dq = (b.traces[0][static_cast<std::size_t>(J - 1)] -
                     b.traces[0][static_cast<std::size_t>(J)]) /
                    (t1 * (1.0 - ctx.q));
        CHECK(dq == Catch::Approx(2.0).epsilon(1e-9));
    }
    SECTION("residual with constant source") {
        ModeSource src = [](int, double) { return 0.4; };
        auto b = direct_solve_superorder(alpha, coeffs({1.0}), coeffs({0.5}), src, model, grid,
                                         ctx);
        CHECK(residual_check(b, alpha, model, ctx) <= 1e-5);
    }
}

TEST_CASE("inverse solver") {
    QContext ctx(0.5);
    double alpha = 0.5;
    SECTION("rho = phi recovers the steady source and flat trajectory") {
        SpectralModel model = make_model({1.0, 3.0}, 1.0);
        auto phi = coeffs({0.8, -0.4});
        auto [bundle, f] = inverse_solve(alpha, phi, phi, 0.4, model, ctx);
        CHECK(f.coefficients[0] == Catch::Approx(2.0 * 0.8).epsilon(1e-12));
        CHECK(f.coefficients[1] == Catch::Approx(4.0 * -0.4).epsilon(1e-12));
        for (int k = 0; k < 2; ++k)
            for (double u : bundle.traces[static_cast<std::size_t>(k)])
                REQUIRE(u == Catch::Approx(phi[k]).epsilon(1e-12));
    }
    SECTION("endpoint interpolation is exact") {
        SpectralModel model = make_model({2.0}, 1.0);
        auto phi = coeffs({1.0});
        auto rho = coeffs({0.3});
        auto [bundle, f] = inverse_solve(alpha, phi, rho, 0.5, model, ctx);
        CHECK(bundle.traces[0][0] == Catch::Approx(0.3).margin(1e-13));   // u(T) = rho
        CHECK(bundle.traces[0].back() == Catch::Approx(1.0).margin(0.0));  // u(0) = phi
    }
    SECTION("round trip through the direct solver") {
        SpectralModel model = make_model({2.0}, 1.0);  // lambda + m = 3
        double T = 0.14;                               // keeps 3 T^0.5 (1-q)^0.5 below 0.8
        auto phi = coeffs({1.0});
        auto rho = coeffs({0.4});
        auto [bundle, f] = inverse_solve(alpha, phi, rho, T, model, ctx);
        ModeSource src = [&](int k, double) { return f.coefficients[static_cast<std::size_t>(k)]; };
        auto direct = direct_solve_suborder(alpha, phi, src, model, bundle.grid, ctx);
        CHECK(direct.traces[0][0] == Catch::Approx(0.4).margin(1e-8));
        CHECK(residual_check(bundle, alpha, model, ctx) <= 1e-6);
    }
    SECTION("denominators respect the theoretical floor") {
        SpectralModel model = make_model({0.0, 1.0, 4.0}, 1.0);
        auto phi = coeffs({1.0, 1.0, 1.0});
        auto rho = coeffs({0.5, 0.5, 0.5});
        double T = 0.25;
        auto [bundle, f] = inverse_solve(alpha, phi, rho, T, model, ctx);
        double gamma_inv = 1.0 / q_gamma(alpha + 1.0, ctx);
        for (int k = 0; k < 3; ++k) {
            double lam = model.eigenvalues[static_cast<std::size_t>(k)] + 1.0;
            double et = q_mittag_leffler({alpha, 1.0}, -lam * std::pow(T, alpha), ctx).value;
            double g = gamma_inv * lam * std::pow(T, alpha);
            REQUIRE(1.0 - et >= g / (1.0 + g) - 1e-12);
        }
    }
}

TEST_CASE("residual_check edge cases") {
    QContext ctx(0.5);
    SpectralModel model = make_model({1.0}, 1.0);
    SECTION("zero bundle with zero source") {
        TimeGrid grid = make_time_grid(1.0, ctx.q);
        auto b = direct_solve_suborder(0.5, coeffs({0.0}), nullptr, model, grid, ctx);
        CHECK(residual_check(b, 0.5, model, ctx) == 0.0);
    }
    SECTION("too-shallow grid raises InsufficientGrid") {
        TimeGrid grid = make_time_grid(1.0, ctx.q, 1e-2);
        auto b = direct_solve_suborder(0.5, coeffs({1.0}), nullptr, model, grid, ctx);
        CHECK_THROWS_AS(residual_check(b, 0.5, model, ctx), InsufficientGrid);
    }
}

TEST_CASE("field reconstruction") {
    QContext ctx(0.5);
    SECTION("requires a basis") {
        SpectralModel bare = make_model({1.0}, 1.0);
        TimeGrid grid = make_time_grid(1.0, ctx.q, 1e-6);
        auto b = direct_solve_suborder(0.5, coeffs({1.0}), nullptr, bare, grid, ctx);
        CHECK_THROWS_AS(reconstruct_field(b, {0.5}), NoBasis);
    }
    SECTION("zero traces give a zero field; single mode factorizes") {
        SpectralModel model = dirichlet_sine_model(1, 1.0);
        TimeGrid grid = make_time_grid(1.0, ctx.q, 1e-6);
        auto z = direct_solve_suborder(0.5, coeffs({0.0}), nullptr, model, grid, ctx);
        for (const auto& row : reconstruct_field(z, {0.3, 1.1}))
            for (double v : row) REQUIRE(v == 0.0);
        auto b = direct_solve_suborder(0.5, coeffs({2.0}), nullptr, model, grid, ctx);
        auto field = reconstruct_field(b, {0.7});
        for (int i = 0; i < grid.node_count(); ++i)
            REQUIRE(field[static_cast<std::size_t>(i)][0] ==
                    Catch::Approx(b.traces[0][static_cast<std::size_t>(i)] *
                                  std::sqrt(2.0 / M_PI) * std::sin(0.7))
                        .epsilon(1e-14));
    }
    SECTION("Dirichlet sine partial sum at x = pi/2") {
        SpectralModel model = dirichlet_sine_model(8, 1.0);
        TimeGrid grid = make_time_grid(1e-4, ctx.q, 1e-6);
        CoefficientField phi;
        for (int k = 1; k <= 8; ++k) phi.coefficients.push_back(1.0 / (k * k * k));
        auto b = direct_solve_suborder(0.5, phi, nullptr, model, grid, ctx);
        auto field = reconstruct_field(b, {M_PI / 2.0});
        for (int i = 0; i < grid.node_count(); ++i) {
            double direct = 0.0;
            for (int k = 1; k <= 8; ++k)
                direct += b.traces[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(i)] *
                          std::sqrt(2.0 / M_PI) * std::sin(k * M_PI / 2.0);
            REQUIRE(field[static_cast<std::size_t>(i)][0] ==
                    Catch::Approx(direct).margin(1e-12));
        }
    }
}

TEST_CASE("estimate reports") {
    QContext ctx(0.5);
    SpectralModel model = make_model({1.0}, 1.0);
    TimeGrid grid = make_time_grid(1.0, ctx.q);
    SECTION("zero data reports zero ratio") {
        auto b = direct_solve_suborder(0.5, coeffs({0.0}), nullptr, model, grid, ctx);
        auto rep = energy_estimate_report(b, coeffs({0.0}), nullptr, 0.0, ctx);
        CHECK(rep.lhs == 0.0);
        CHECK(rep.ratio == 0.0);
    }
    SECTION("single-mode source-free ratio is finite and recorded") {
        auto b = direct_solve_suborder(0.5, coeffs({1.0}), nullptr, model, grid, ctx);
        auto rep = energy_estimate_report(b, coeffs({1.0}), nullptr, 0.0, ctx);
        CHECK(rep.lhs > 0.0);
        CHECK(rep.rhs > 0.0);
        CHECK(std::isfinite(rep.ratio));
    }
    SECTION("inverse problem source estimate") {
        SpectralModel m2 = make_model({1.0, 4.0}, 1.0);
        auto phi = coeffs({1.0, 0.2});
        auto rho = coeffs({0.6, 0.1});
        auto [bundle, f] = inverse_solve(0.5, phi, rho, 0.4, m2, ctx);
        auto rep = source_estimate_report(f, phi, rho, m2, 0.0);
        CHECK(rep.lhs > 0.0);
        CHECK(std::isfinite(rep.ratio));
    }
}

TEST_CASE("initial-condition exactness across solvers") {
    QContext ctx(0.5);
    SpectralModel model = make_model({0.5, 2.0, 7.0}, 1.0);
    TimeGrid grid = make_time_grid(0.05, ctx.q);
    auto phi = coeffs({0.3, -1.2, 5.0});
    auto rho = coeffs({0.1, 0.2, -0.3});
    auto b1 = direct_solve_suborder(0.7, phi, nullptr, model, grid, ctx);
    auto b2 = direct_solve_superorder(1.4, phi, rho, nullptr, model, grid, ctx);
    auto [b3, f3] = inverse_solve(0.7, phi, rho, 0.05, model, ctx);
    for (int k = 0; k < 3; ++k) {
        REQUIRE(std::abs(b1.traces[static_cast<std::size_t>(k)].back() - phi[k]) <=
                1e-12 * (1.0 + std::abs(phi[k])));
        REQUIRE(std::abs(b2.traces[static_cast<std::size_t>(k)].back() - phi[k]) <=
                1e-12 * (1.0 + std::abs(phi[k])));
        REQUIRE(std::abs(b3.traces[static_cast<std::size_t>(k)].back() - phi[k]) <=
                1e-12 * (1.0 + std::abs(phi[k])));
        REQUIRE(std::abs(b3.traces[static_cast<std::size_t>(k)][0] - rho[k]) <=
                1e-12 * (1.0 + std::abs(rho[k])));
    }
}
