#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "qcalc/bounds.hpp"
#include "qcalc/context.hpp"
#include "qcalc/qcalculus.hpp"
#include "qcalc/qcore.hpp"
#include "qcalc/qspecial.hpp"
#include "qcalc/spectral.hpp"

namespace qcalc::verify {

// Outcome of one named invariant check. `worst` is the largest observed
// error (or smallest signed margin, for one-sided checks); `tolerance` is the
// level it is held to.
struct Check {
    std::string name;
    bool pass = false;
    double worst = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

namespace detail {

inline Check against(const std::string& name, double worst, double tol,
                     const std::string& detail = {}) {
    return Check{name, worst <= tol, worst, tol, detail};
}

inline Check margin_check(const std::string& name, double margin, double floor,
                          const std::string& detail = {}) {
    return Check{name, margin >= floor, margin, floor, detail};
}

}  // namespace detail

// ---- qcore ----------------------------------------------------------------

inline Check check_gamma_recurrence() {
    double worst = 0.0;
    for (double q : {0.3, 0.5, 0.7, 0.9}) {
        QContext ctx(q);
        for (int i = 1; i <= 50; ++i) {
            double x = 0.1 * i;
            double lhs = q_gamma(x + 1.0, ctx);
            double rhs = q_number(x, ctx) * q_gamma(x, ctx);
            worst = std::max(worst, std::abs(lhs - rhs) / std::abs(lhs));
        }
    }
    return detail::against("qcore.gamma_recurrence", worst, 1e-12);
}

inline Check check_poch_splitting() {
    double worst = 0.0;
    for (double q : {0.3, 0.5, 0.8}) {
        QContext ctx(q);
        QContext ctx2(q * q);
        for (double a : {-0.5, 0.0, 0.3, 0.9})
            for (int n = 0; n <= 20; ++n) {
                double lhs = q_pochhammer(a, 2 * n, ctx);
                double rhs = q_pochhammer(a, n, ctx2) * q_pochhammer(a * q, n, ctx2);
                worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
            }
    }
    return detail::against("qcore.poch_splitting", worst, 1e-12);
}

inline Check check_poch_ratio() {
    double worst = 0.0;
    for (double q : {0.3, 0.5, 0.8}) {
        QContext ctx(q);
        for (double a : {-0.5, 0.3, 0.9, 1.5})
            for (int n : {0, 1, 3, 7, 15}) {
                double den = q_pochhammer_inf(a * std::pow(q, n), ctx).value;
                if (std::abs(den) <= 1e-8) continue;
                double lhs = q_pochhammer(a, n, ctx);
                double rhs = q_pochhammer_inf(a, ctx).value / den;
                worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
            }
    }
    return detail::against("qcore.poch_ratio", worst, 1e-10);
}

inline Check check_poch_real_integer() {
    QContext ctx(0.5);
    double worst = 0.0;
    for (double a : {-0.5, 0.25, 0.9})
        for (int n : {0, 1, 2, 5, 9}) {
            double lhs = q_pochhammer_real(a, n, ctx).value;
            double rhs = q_pochhammer(a, n, ctx);
            worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
        }
    return detail::against("qcore.poch_real_integer", worst, 1e-12);
}

inline Check check_gamma_classical_limit() {
    QContext ctx(0.999);
    double worst = 0.0;
    for (double x : {0.5, 1.5, 2.5}) {
        double g = q_gamma(x, ctx);
        double ref = std::tgamma(x);
        worst = std::max(worst, std::abs(g - ref) / ref);
    }
    return detail::against("qcore.gamma_classical_limit", worst, 5e-2);
}

// ---- qspecial ---------------------------------------------------------------

inline Check check_qexp_fixed_point() {
    double worst = 0.0;
    for (double q : {0.3, 0.5}) {
        QContext ctx(q);
        QFunction eq = [&](double t) { return q_exp(t, ctx).value; };
        for (double x : {0.1, 0.5, 1.0}) {
            double d = q_derivative(eq, x, ctx);
            double v = q_exp(x, ctx).value;
            worst = std::max(worst, std::abs(d - v) / std::abs(v));
        }
    }
    return detail::against("qspecial.qexp_fixed_point", worst, 1e-10);
}

inline Check check_ml_reduction() {
    double worst = 0.0;
    for (double q : {0.3, 0.5, 0.7}) {
        QContext ctx(q);
        for (double z : {-1.0, -0.4, 0.2, 0.8}) {
            if (std::abs(z) * (1.0 - q) >= 0.999) continue;
            double ml = q_mittag_leffler({1.0, 1.0}, z, ctx).value;
            double eq = q_exp(z, ctx).value;
            worst = std::max(worst, std::abs(ml - eq) / std::max(1.0, std::abs(eq)));
        }
    }
    return detail::against("qspecial.ml_reduction_to_qexp", worst, 1e-12);
}

// The Duhamel-kernel factorization:
//   t^{ai-1} (q s/t;q)_{ai-1} = t^{a(i-1)} (q^a s/t;q)_{a(i-1)} * t^{a-1} (q s/t;q)_{a-1}.
// The source text prints the left side with a q^a shift, which contradicts the
// chaining rule (x;q)_mu (x q^mu;q)_nu = (x;q)_{mu+nu}; this is the form that
// holds and that the solvers rely on.
inline Check check_kernel_factorization() {
    double worst = 0.0;
    for (double q : {0.3, 0.5}) {
        QContext ctx(q);
        for (double alpha : {0.4, 0.6, 0.85}) {
            double t = 1.0;
            for (int i = 1; i <= 6; ++i)
                for (int j : {1, 3, 5}) {
                    double s = t * std::pow(q, j);
                    double lhs = std::pow(t, alpha * i - 1.0) *
                                 q_pochhammer_real(q * s / t, alpha * i - 1.0, ctx).value;
                    double rhs = std::pow(t, alpha * (i - 1)) *
                                 q_pochhammer_real(std::pow(q, alpha) * s / t, alpha * (i - 1),
                                                   ctx)
                                     .value *
                                 std::pow(t, alpha - 1.0) *
                                 q_pochhammer_real(q * s / t, alpha - 1.0, ctx).value;
                    worst = std::max(worst, std::abs(lhs - rhs) / std::abs(lhs));
                }
        }
    }
    return detail::against("qspecial.kernel_factorization", worst, 1e-9);
}

// Exact s-derivative of the translated kernel (chain factor q^a and the
// matching argument shift included; the printed form omits both).
inline Check check_kernel_derivative() {
    double worst = 0.0;
    double lambda = 1.0;
    for (auto [alpha, q] : {std::pair{0.5, 0.5}, std::pair{0.7, 0.3}}) {
        QContext ctx(q);
        double t = 1.0;
        for (int j = 1; j <= 8; ++j) {
            double s = t * std::pow(q, j);
            double g = translated_ml({alpha, 1.0}, -lambda, t, s, ctx).value;
            double gq = translated_ml({alpha, 1.0}, -lambda, t, q * s, ctx).value;
            double dq = (g - gq) / (s * (1.0 - q));
            double kernel =
                std::pow(q, alpha) * std::pow(t, alpha - 1.0) *
                q_pochhammer_real(std::pow(q, alpha + 1.0) * s / t, alpha - 1.0, ctx).value;
            double rhs = lambda * kernel *
                         translated_ml({alpha, alpha}, -lambda, t, std::pow(q, alpha) * s, ctx)
                             .value;
            worst = std::max(worst, std::abs(dq - rhs) / std::max(1.0, std::abs(rhs)));
        }
    }
    return detail::against("qspecial.kernel_derivative", worst, 1e-8);
}

inline Check check_ml_monotone_truncation() {
    QContext base(0.5);
    double worst = 0.0;
    for (double z : {-0.9, 0.4, 1.2}) {
        auto r1 = q_mittag_leffler({0.5, 1.0}, z, base);
        QContext tighter(0.5, 1e-16, 1e-16, base.max_terms * 4);
        auto r2 = q_mittag_leffler({0.5, 1.0}, z, tighter);
        double excess = std::abs(r2.value - r1.value) - r1.tail_estimate;
        worst = std::max(worst, excess);
    }
    return detail::against("qspecial.ml_monotone_truncation", worst, 1e-15);
}

// ---- qcalculus --------------------------------------------------------------

inline Check check_power_rule() {
    double worst = 0.0;
    for (double q : {0.3, 0.5, 0.8}) {
        QContext ctx(q);
        for (int n = 1; n <= 10; ++n) {
            QFunction f = [n](double t) { return std::pow(t, n); };
            for (double x : {0.25, 1.0, 2.0}) {
                double lhs = q_derivative(f, x, ctx);
                double rhs = q_number(n, ctx) * std::pow(x, n - 1);
                worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
            }
        }
    }
    return detail::against("qcalculus.power_rule", worst, 1e-12);
}

inline Check check_product_derivative() {
    double worst = 0.0;
    for (double q : {0.3, 0.5}) {
        QContext ctx(q);
        double x = 1.0;
        for (double a : {0.3, 0.7, 1.5}) {
            QFunction f = [&](double s) {
                return std::pow(x, a) * q_pochhammer_real(s / x, a, ctx).value;
            };
            for (int j = 1; j <= 6; ++j) {
                double s = x * std::pow(q, j);
                double lhs = q_derivative(f, s, ctx);
                double rhs = -q_number(a, ctx) * std::pow(x, a - 1.0) *
                             q_pochhammer_real(q * s / x, a - 1.0, ctx).value;
                worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
            }
        }
    }
    return detail::against("qcalculus.product_derivative", worst, 1e-8);
}

inline Check check_integration_by_parts() {
    double worst = 0.0;
    for (double q : {0.3, 0.5, 0.8}) {
        QContext ctx(q);
        double a = 0.25, b = 1.0;
        QFunction u = [](double t) { return 1.0 + 2.0 * t - t * t + 0.5 * t * t * t * t; };
        QFunction v = [](double t) { return 3.0 - t + 2.0 * t * t * t; };
        QFunction u_dv = [&](double t) { return u(t) * q_derivative(v, t, ctx); };
        QFunction vq_du = [&](double t) { return v(ctx.q * t) * q_derivative(u, t, ctx); };
        double lhs = jackson_integral(u_dv, a, b, ctx).value;
        double boundary = u(b) * v(b) - u(a) * v(a);
        double rhs = boundary - jackson_integral(vq_du, a, b, ctx).value;
        double scale = std::max(1.0, std::abs(boundary) + std::abs(lhs));
        worst = std::max(worst, std::abs(lhs - rhs) / scale);
    }
    return detail::against("qcalculus.integration_by_parts", worst, 1e-10);
}

inline Check check_fundamental_theorem() {
    double worst = 0.0;
    for (double q : {0.3, 0.5, 0.8}) {
        QContext ctx(q);
        QFunction f = [](double t) { return 2.0 - t + 3.0 * t * t - 0.25 * t * t * t; };
        QFunction df = [&](double t) { return q_derivative(f, t, ctx); };
        for (double a : {0.5, 1.0, 2.0}) {
            double lhs = jackson_integral(df, 0.0, a, ctx).value;
            worst = std::max(worst,
                             std::abs(lhs - (f(a) - f(0.0))) / std::max(1.0, std::abs(lhs)));
        }
    }
    return detail::against("qcalculus.fundamental_theorem", worst, 1e-10);
}

inline Check check_caputo_constants() {
    QContext ctx(0.5);
    QFunction c = [](double) { return -4.2; };
    double worst = 0.0;
    for (double alpha : {0.3, 0.7, 1.3, 1.7})
        for (double x : {0.25, 1.0, 2.0})
            worst = std::max(worst, std::abs(caputo_derivative(c, alpha, x, ctx).value));
    return detail::against("qcalculus.caputo_constants", worst, 1e-12);
}

// ---- bounds -----------------------------------------------------------------

inline Check check_strict_range() {
    double margin = std::numeric_limits<double>::infinity();
    for (double alpha : DefaultGrids::range_alphas())
        for (double q : DefaultGrids::range_qs()) {
            QContext ctx(q);
            for (double z : DefaultGrids::range_zs(alpha, q)) {
                auto r = ml_bounds_check(alpha, z, ctx);
                margin = std::min(margin, r.value);
                margin = std::min(margin, 1.0 - r.value);
            }
        }
    return detail::margin_check("bounds.strict_range", margin, 1e-12);
}

inline Check check_bounds_ordering() {
    double worst = 0.0;  // max of lower - upper (must stay <= 0)
    for (double alpha : DefaultGrids::range_alphas())
        for (double q : DefaultGrids::range_qs()) {
            QContext ctx(q);
            for (double z : DefaultGrids::range_zs(alpha, q)) {
                auto r = ml_bounds_check(alpha, z, ctx);
                worst = std::max(worst, r.lower - r.upper);
            }
        }
    return detail::against("bounds.lower_below_upper", worst, 0.0);
}

inline Check check_bounds_consistency_z0() {
    double worst = 0.0;
    for (double alpha : DefaultGrids::range_alphas())
        for (double q : DefaultGrids::range_qs()) {
            QContext ctx(q);
            auto r = ml_bounds_check(alpha, 0.0, ctx);
            worst = std::max({worst, std::abs(r.value - 1.0), std::abs(r.lower - 1.0),
                              std::abs(r.upper - 1.0)});
        }
    return detail::against("bounds.consistency_at_zero", worst, 1e-12);
}

inline Check check_bounds_monotone() {
    bool ok = true;
    for (double alpha : DefaultGrids::range_alphas())
        for (double q : DefaultGrids::range_qs()) {
            QContext ctx(q);
            double prev_lower = 1.0, prev_upper = 1.0;
            for (double z : DefaultGrids::range_zs(alpha, q)) {
                auto r = ml_bounds_check(alpha, z, ctx);
                ok = ok && r.lower < prev_lower && r.upper < prev_upper;
                prev_lower = r.lower;
                prev_upper = r.upper;
            }
        }
    return Check{"bounds.monotone_in_z", ok, ok ? 0.0 : 1.0, 0.0, {}};
}

// Measured (not hard-asserted) two-sided estimate: all rows must evaluate and
// any violation must stay within a factor-10 relative slack.
inline Check check_two_sided_measured() {
    double worst_margin = std::numeric_limits<double>::infinity();
    int rows = 0, violations = 0;
    bool within_slack = true;
    for (double alpha : DefaultGrids::range_alphas())
        for (double q : DefaultGrids::range_qs()) {
            QContext ctx(q);
            for (double z : DefaultGrids::range_zs(alpha, q)) {
                auto r = ml_bounds_check(alpha, z, ctx);
                ++rows;
                worst_margin = std::min({worst_margin, r.margin_lower, r.margin_upper});
                if (!r.holds_lower || !r.holds_upper) {
                    ++violations;
                    within_slack = within_slack && r.value >= 0.1 * r.lower &&
                                   r.value <= 10.0 * r.upper;
                }
            }
        }
    Check c;
    c.name = "bounds.two_sided_measured";
    c.pass = within_slack;
    c.worst = worst_margin;
    c.tolerance = 0.0;
    c.detail = std::to_string(rows) + " rows, " + std::to_string(violations) + " violations";
    return c;
}

inline Check check_decay_grid() {
    QContext tmpl(0.5);
    auto rows = bounds_scan(DefaultGrids::decay_alphas(), DefaultGrids::decay_betas(),
                            DefaultGrids::decay_qs(), DefaultGrids::decay_zs(), tmpl);
    bool ok = true;
    int empirical = 0;
    // max |value| - bound over computable rows (<= 0 when the estimate holds)
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& r : rows) {
        if (r.failed || !std::isfinite((1.0 + r.z) * std::abs(r.value))) {
            ok = false;
            continue;
        }
        if (r.decay_constant_empirical)
            ++empirical;
        else
            worst = std::max(worst, std::abs(r.value) - r.decay_bound);
        ok = ok && r.holds_decay;
    }
    Check c = detail::against("bounds.decay_grid", worst, 0.0,
                              std::to_string(rows.size()) + " rows, " +
                                  std::to_string(empirical) + " empirical-constant rows");
    c.pass = c.pass && ok;
    return c;
}

// ---- spectral ---------------------------------------------------------------

inline Check check_initial_and_endpoint_exactness() {
    QContext ctx(0.5);
    SpectralModel model = make_model({0.5, 2.0, 7.0}, 1.0);
    TimeGrid grid = make_time_grid(0.05, ctx.q);
    CoefficientField phi{{0.3, -1.2, 5.0}};
    CoefficientField rho{{0.1, 0.2, -0.3}};
    auto b1 = direct_solve_suborder(0.7, phi, nullptr, model, grid, ctx);
    auto b2 = direct_solve_superorder(1.4, phi, rho, nullptr, model, grid, ctx);
    auto [b3, f3] = inverse_solve(0.7, phi, rho, 0.05, model, ctx);
    double worst = 0.0;
    for (int k = 0; k < 3; ++k) {
        auto rel = [&](double got, double want) {
            return std::abs(got - want) / (1.0 + std::abs(want));
        };
        worst = std::max(worst, rel(b1.traces[static_cast<std::size_t>(k)].back(), phi[k]));
        worst = std::max(worst, rel(b2.traces[static_cast<std::size_t>(k)].back(), phi[k]));
        worst = std::max(worst, rel(b3.traces[static_cast<std::size_t>(k)].back(), phi[k]));
        worst = std::max(worst, rel(b3.traces[static_cast<std::size_t>(k)][0], rho[k]));
    }
    return detail::against("spectral.boundary_exactness", worst, 1e-12);
}

inline Check check_single_mode_residual() {
    QContext ctx(0.5);
    SpectralModel model = make_model({0.0}, 1.0);
    TimeGrid grid = make_time_grid(1.0, ctx.q);
    double worst = 0.0;
    for (double alpha : {0.5, 0.9}) {
        CoefficientField phi{{1.0}};
        auto b0 = direct_solve_suborder(alpha, phi, nullptr, model, grid, ctx);
        worst = std::max(worst, residual_check(b0, alpha, model, ctx));
        ModeSource src = [](int, double) { return 0.7; };
        auto b1 = direct_solve_suborder(alpha, phi, src, model, grid, ctx);
        worst = std::max(worst, residual_check(b1, alpha, model, ctx));
    }
    return detail::against("spectral.single_mode_residual", worst, 1e-6);
}

inline Check check_superorder_residual() {
    QContext ctx(0.5);
    SpectralModel model = make_model({0.0}, 1.0);
    TimeGrid grid = make_time_grid(1.0, ctx.q);
    CoefficientField phi{{0.0}};
    CoefficientField rho{{2.0}};
    auto b = direct_solve_superorder(1.5, phi, rho, nullptr, model, grid, ctx);
    double worst = residual_check(b, 1.5, model, ctx);
    if (b.traces[0].back() != 0.0) worst = std::max(worst, 1.0);
    return detail::against("spectral.superorder_residual", worst, 1e-5);
}

inline Check check_solver_linearity() {
    QContext ctx(0.5);
    SpectralModel model = make_model({0.0}, 1.0);
    TimeGrid grid = make_time_grid(1.0, ctx.q);
    ModeSource src1 = [](int, double t) { return std::sin(t) + 1.0; };
    ModeSource src2 = [](int, double t) { return t * t; };
    ModeSource combo = [&](int k, double t) { return 2.0 * src1(k, t) - 3.0 * src2(k, t); };
    auto b1 = direct_solve_suborder(0.5, CoefficientField{{1.0}}, src1, model, grid, ctx);
    auto b2 = direct_solve_suborder(0.5, CoefficientField{{-0.5}}, src2, model, grid, ctx);
    auto bc = direct_solve_suborder(0.5, CoefficientField{{3.5}}, combo, model, grid, ctx);
    double worst = 0.0;
    for (std::size_t i = 0; i < b1.traces[0].size(); ++i) {
        double expect = 2.0 * b1.traces[0][i] - 3.0 * b2.traces[0][i];
        worst = std::max(worst,
                         std::abs(bc.traces[0][i] - expect) / std::max(1.0, std::abs(expect)));
    }
    return detail::against("spectral.solver_linearity", worst, 1e-10);
}

inline Check check_denominator_floor() {
    QContext ctx(0.5);
    SpectralModel model = make_model({0.0, 1.0, 4.0}, 1.0);
    double T = 0.25, alpha = 0.5;
    double margin = std::numeric_limits<double>::infinity();
    double gamma_inv = 1.0 / q_gamma(alpha + 1.0, ctx);
    for (double lam_base : model.eigenvalues) {
        double lam = lam_base + model.mass_shift;
        double et = q_mittag_leffler({alpha, 1.0}, -lam * std::pow(T, alpha), ctx).value;
        double g = gamma_inv * lam * std::pow(T, alpha);
        margin = std::min(margin, (1.0 - et) - g / (1.0 + g));
    }
    return detail::margin_check("spectral.denominator_floor", margin, -1e-12);
}

inline Check check_sobolev_monotonicity() {
    SpectralModel model = make_model({0.0, 1.0, 5.5}, 1.0);
    CoefficientField c{{0.5, -1.5, 0.25}};
    bool ok = true;
    double prev = 0.0;
    for (double d : {-2.0, -1.0, 0.0, 1.0, 2.0, 3.0}) {
        double n = sobolev_norm(c, model, d);
        ok = ok && n >= prev;
        prev = n;
    }
    return Check{"spectral.sobolev_monotonicity", ok, ok ? 0.0 : 1.0, 0.0, {}};
}

inline Check check_round_trip_single() {
    QContext ctx(0.5);
    SpectralModel model = make_model({2.0}, 1.0);
    double T = 0.14, alpha = 0.5;
    CoefficientField phi{{1.0}};
    CoefficientField rho{{0.4}};
    auto [bundle, f] = inverse_solve(alpha, phi, rho, T, model, ctx);
    ModeSource src = [&](int k, double) { return f.coefficients[static_cast<std::size_t>(k)]; };
    auto direct = direct_solve_suborder(alpha, phi, src, model, bundle.grid, ctx);
    return detail::against("spectral.round_trip_single_mode",
                           std::abs(direct.traces[0][0] - rho[0]), 1e-8);
}

inline Check check_round_trip_multi() {
    // 16-mode Dirichlet sine model, coefficients decaying like k^{-3}.
    QContext ctx(0.5);
    int K = 16;
    SpectralModel model = dirichlet_sine_model(K, 1.0);
    double alpha = 0.5;
    double lamK = model.eigenvalues.back() + model.mass_shift;
    double T = std::pow(0.8 / (lamK * std::pow(1.0 - ctx.q, alpha)), 1.0 / alpha);
    CoefficientField phi, rho;
    for (int k = 1; k <= K; ++k) {
        phi.coefficients.push_back(1.0 / (k * k * k));
        rho.coefficients.push_back(0.5 / (k * k * k));
    }
    auto [bundle, f] = inverse_solve(alpha, phi, rho, T, model, ctx);
    ModeSource src = [&](int k, double) { return f.coefficients[static_cast<std::size_t>(k)]; };
    auto direct = direct_solve_suborder(alpha, phi, src, model, bundle.grid, ctx);
    double worst = 0.0;
    for (int k = 0; k < K; ++k)
        worst = std::max(worst, std::abs(direct.traces[static_cast<std::size_t>(k)][0] - rho[k]));
    return detail::against("spectral.round_trip_16_modes", worst, 1e-6);
}

// ---- suite assembly ---------------------------------------------------------

inline std::vector<Check> run_invariants() {
    std::vector<Check> checks;
    checks.push_back(check_gamma_recurrence());
    checks.push_back(check_poch_splitting());
    checks.push_back(check_poch_ratio());
    checks.push_back(check_poch_real_integer());
    checks.push_back(check_gamma_classical_limit());
    checks.push_back(check_qexp_fixed_point());
    checks.push_back(check_ml_reduction());
    checks.push_back(check_kernel_factorization());
    checks.push_back(check_kernel_derivative());
    checks.push_back(check_ml_monotone_truncation());
    checks.push_back(check_power_rule());
    checks.push_back(check_product_derivative());
    checks.push_back(check_integration_by_parts());
    checks.push_back(check_fundamental_theorem());
    checks.push_back(check_caputo_constants());
    checks.push_back(check_strict_range());
    checks.push_back(check_bounds_ordering());
    checks.push_back(check_bounds_consistency_z0());
    checks.push_back(check_bounds_monotone());
    checks.push_back(check_two_sided_measured());
    checks.push_back(check_decay_grid());
    checks.push_back(check_initial_and_endpoint_exactness());
    checks.push_back(check_single_mode_residual());
    checks.push_back(check_superorder_residual());
    checks.push_back(check_solver_linearity());
    checks.push_back(check_denominator_floor());
    checks.push_back(check_sobolev_monotonicity());
    checks.push_back(check_round_trip_single());
    checks.push_back(check_round_trip_multi());
    return checks;
}

// Fast fixtures: the directly stated values of every operation.
inline std::vector<Check> run_selftest() {
    std::vector<Check> checks;
    QContext ctx(0.5);
    auto expect = [&](const std::string& name, double got, double want, double tol = 1e-12) {
        checks.push_back(detail::against(name, std::abs(got - want), tol));
    };
    expect("qcore.q_number_zero", q_number(0.0, ctx), 0.0);
    expect("qcore.q_number_one", q_number(1.0, ctx), 1.0);
    expect("qcore.q_number_two", q_number(2.0, ctx), 1.5);
    expect("qcore.poch_empty", q_pochhammer(0.7, 0, ctx), 1.0);
    expect("qcore.poch_zero_argument", q_pochhammer(0.0, 5, ctx), 1.0);
    expect("qcore.poch_n2", q_pochhammer(0.5, 2, ctx), 0.375);
    expect("qcore.poch_inf_zero", q_pochhammer_inf(0.0, ctx).value, 1.0);
    expect("qcore.poch_inf_pinned", q_pochhammer_inf(1.0, ctx).value, 0.0);
    expect("qcore.poch_real_nu0", q_pochhammer_real(0.3, 0.0, ctx).value, 1.0);
    expect("qcore.gamma_one", q_gamma(1.0, ctx), 1.0);
    expect("qcore.gamma_two", q_gamma(2.0, ctx), 1.0);
    expect("qcore.gamma_three", q_gamma(3.0, ctx), 1.5);
    expect("qcore.factorial_zero", q_factorial(0, ctx), 1.0);
    expect("qcore.factorial_two", q_factorial(2, ctx), 1.5);
    expect("qspecial.qexp_zero", q_exp(0.0, ctx).value, 1.0);
    expect("qspecial.ml_z0", q_mittag_leffler({0.7, 0.5}, 0.0, ctx).value,
           1.0 / q_gamma(0.5, ctx));
    expect("qspecial.ml_is_qexp", q_mittag_leffler({1.0, 1.0}, 0.4, ctx).value,
           q_exp(0.4, ctx).value);
    expect("qspecial.tml_s0",
           translated_ml({0.6, 1.0}, -1.0, 0.8, 0.0, ctx).value,
           q_mittag_leffler({0.6, 1.0}, -std::pow(0.8, 0.6), ctx).value, 1e-13);
    expect("qspecial.tml_c0", translated_ml({0.5, 0.5}, 0.0, 1.0, 0.25, ctx).value,
           1.0 / q_gamma(0.5, ctx));
    {
        QFunction c = [](double) { return 3.0; };
        expect("qcalculus.dq_constant", q_derivative(c, 0.4, ctx), 0.0);
        QFunction cube = [](double t) { return t * t * t; };
        expect("qcalculus.dq_cube", q_derivative(cube, 1.0, ctx), 1.75);
        QFunction one = [](double) { return 1.0; };
        expect("qcalculus.jackson_unit", jackson_integral(one, 0.0, 1.0, ctx).value, 1.0, 1e-13);
        QFunction id = [](double t) { return t; };
        expect("qcalculus.jackson_linear", jackson_integral(id, 0.0, 1.0, ctx).value, 2.0 / 3.0,
               1e-13);
        expect("qcalculus.jackson_coincident", jackson_integral(id, 0.7, 0.7, ctx).value, 0.0);
        QFunction zero = [](double) { return 0.0; };
        expect("qcalculus.bilateral_zero", jackson_integral_0inf(zero, ctx).value, 0.0);
        expect("qcalculus.rl_zero", rl_fractional_integral(zero, 0.5, 1.0, ctx).value, 0.0);
        expect("qcalculus.rl_unit", rl_fractional_integral(one, 0.5, 1.0, ctx).value,
               1.0 / q_gamma(1.5, ctx), 1e-12);
        expect("qcalculus.caputo_constant", caputo_derivative(c, 0.5, 1.0, ctx).value, 0.0,
               1e-13);
        expect("qcalculus.caputo_linear", caputo_derivative(id, 0.5, 1.0, ctx).value,
               1.0 / q_gamma(1.5, ctx), 1e-11);
    }
    {
        SpectralModel model = make_model({0.0, 1.0}, 1.0);
        expect("spectral.plancherel", sobolev_norm(CoefficientField{{3.0, 4.0}}, model, 0.0),
               5.0);
        expect("spectral.sobolev_d2",
               sobolev_norm(CoefficientField{{1.0, 1.0}}, model, 2.0), std::sqrt(5.0));
        SpectralModel single = make_model({0.0}, 1.0);
        TimeGrid grid = make_time_grid(1.0, ctx.q, 1e-8);
        auto b = direct_solve_suborder(0.5, CoefficientField{{2.0}}, nullptr, single, grid, ctx);
        expect("spectral.initial_datum", b.traces[0].back(), 2.0);
        double t3 = grid.nodes[3];
        expect("spectral.source_free_trace", b.traces[0][3],
               2.0 * q_mittag_leffler({0.5, 1.0}, -std::pow(t3, 0.5), ctx).value, 1e-11);
        auto [ib, f] =
            inverse_solve(0.5, CoefficientField{{0.8}}, CoefficientField{{0.8}}, 0.4,
                          make_model({1.0}, 1.0), ctx);
        expect("spectral.inverse_steady_source", f.coefficients[0], 1.6);
        expect("spectral.inverse_endpoint", ib.traces[0][0], 0.8);
    }
    {
        auto r = ml_bounds_check(0.5, 0.0, ctx);
        expect("bounds.z0_value", r.value, 1.0);
        expect("bounds.z0_lower", r.lower, 1.0);
        expect("bounds.z0_upper", r.upper, 1.0);
        auto d = ml_decay_check({0.5, 0.5}, 0.0, ctx);
        expect("bounds.decay_z0_beta_half", d.value, 1.0 / q_gamma(0.5, ctx), 1e-13);
    }
    return checks;
}

// Deterministic plain-text rendering: one line per check plus a summary line.
inline std::string render_text(const std::vector<Check>& checks) {
    std::string out;
    int failed = 0;
    for (const Check& c : checks) {
        out += c.pass ? "PASS " : "FAIL ";
        out += c.name;
        out += "  worst=" + qcalc::detail::fmt_double(c.worst);
        out += " tol=" + qcalc::detail::fmt_double(c.tolerance);
        if (!c.detail.empty()) out += "  (" + c.detail + ")";
        out += "\n";
        if (!c.pass) ++failed;
    }
    out += "---\n";
    out += std::to_string(checks.size() - failed) + "/" + std::to_string(checks.size()) +
           " checks passed\n";
    return out;
}

inline bool all_pass(const std::vector<Check>& checks) {
    for (const Check& c : checks)
        if (!c.pass) return false;
    return true;
}

}  // namespace qcalc::verify
