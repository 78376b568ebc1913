#pragma once

#include <cmath>
#include <functional>
#include <limits>

#include "qcalc/context.hpp"
#include "qcalc/qcore.hpp"

namespace qcalc {

// Pointwise evaluable function on the positive reals. Evaluators must be pure:
// the composite operators below re-evaluate freely and may do so concurrently.
using QFunction = std::function<double(double)>;

// Two-point q-difference quotient (f(x) - f(qx)) / (x (1-q)). Exact: the only
// error is the evaluation error of f itself.
inline double q_derivative(const QFunction& f, double x, const QContext& ctx) {
    if (x == 0.0)
        throw ZeroPoint("qcalculus", "q_derivative",
                        "the quotient is undefined at x = 0; supply the value analytically");
    return (f(x) - f(ctx.q * x)) / (x * (1.0 - ctx.q));
}

// n-fold q-derivative, evaluated by nesting the two-point quotient.
inline double q_derivative_n(const QFunction& f, int n, double x, const QContext& ctx) {
    if (n == 0) return f(x);
    if (n == 1) return q_derivative(f, x, ctx);
    QFunction inner = [&f, n, &ctx](double t) { return q_derivative_n(f, n - 1, t, ctx); };
    return q_derivative(inner, x, ctx);
}

namespace detail {

// Geometric-grid quadrature sum_{m>=0} (1-q) c q^m f(c q^m) with adaptive
// truncation. The tail is bounded from the observed decay of the increments.
inline SeriesResult jackson_base(const QFunction& f, double c, const QContext& ctx) {
    SeriesResult r;
    if (c == 0.0) return r;
    CompensatedSum sum;
    const double scale = (1.0 - ctx.q) * c;
    double qm = 1.0;
    double prev = 0.0;
    double early_max = 0.0;
    int m = 0;
    for (; m < ctx.max_terms; ++m) {
        double term = scale * qm * f(c * qm);
        sum.add(term);
        if (m < 8) early_max = std::max(early_max, std::abs(term));
        if (m >= 2 && qm < ctx.eps_series) {
            double rho = std::abs(prev) > 0.0 ? std::min(std::abs(term / prev), 0.999) : ctx.q;
            rho = std::max(rho, ctx.q);
            double bound = std::abs(term) * rho / (1.0 - rho);
            if (bound <= ctx.eps_series * std::max(1.0, std::abs(sum.value()))) {
                r.value = sum.value();
                r.terms_used = m + 1;
                r.tail_estimate = bound;
                r.status = SeriesStatus::Converged;
                return r;
            }
        }
        prev = term;
        qm *= ctx.q;
    }
    r.value = sum.value();
    r.terms_used = m;
    r.tail_estimate = std::abs(prev) / (1.0 - ctx.q);
    // If the increments did not decay over the run, the defining sum is not
    // absolutely convergent for this integrand.
    if (std::abs(prev) > early_max && early_max > 0.0)
        throw NonAbsolutelyConvergent("qcalculus", "jackson_integral",
                                      "increments fail to decay on the q-grid");
    r.status = SeriesStatus::Truncated;
    return r;
}

}  // namespace detail

// Jackson integral over [a, b], as the difference of the two base integrals
// anchored at 0.
inline SeriesResult jackson_integral(const QFunction& f, double a, double b, const QContext& ctx) {
    if (a < 0.0 || b < 0.0)
        throw InvalidArgument("qcalculus", "jackson_integral", "limits must be nonnegative");
    if (a == b) return SeriesResult{};
    SeriesResult ib = detail::jackson_base(f, b, ctx);
    SeriesResult ia = detail::jackson_base(f, a, ctx);
    SeriesResult r;
    r.value = ib.value - ia.value;
    r.terms_used = ib.terms_used + ia.terms_used;
    r.tail_estimate = ib.tail_estimate + ia.tail_estimate;
    r.status = (ia.status == SeriesStatus::Truncated || ib.status == SeriesStatus::Truncated)
                   ? SeriesStatus::Truncated
                   : SeriesStatus::Converged;
    return r;
}

// Bilateral Jackson integral over (0, inf): (1-q) sum_{m=-inf}^{inf} q^m f(q^m),
// each side truncated independently by its own tail tolerance.
inline SeriesResult jackson_integral_0inf(const QFunction& f, const QContext& ctx) {
    SeriesResult r;
    CompensatedSum sum;
    const double scale = 1.0 - ctx.q;
    int used = 0;
    // m >= 0 side: weights decay geometrically.
    {
        double qm = 1.0;
        double prev = 0.0;
        int m = 0;
        for (; m < ctx.max_terms; ++m) {
            double term = scale * qm * f(qm);
            sum.add(term);
            if (m >= 2 && qm < ctx.eps_series &&
                std::abs(term) <= ctx.eps_series * std::max(1.0, std::abs(sum.value())) &&
                std::abs(prev) <= ctx.eps_series * std::max(1.0, std::abs(sum.value())))
                break;
            prev = term;
            qm *= ctx.q;
        }
        if (m >= ctx.max_terms) r.status = SeriesStatus::Truncated;
        used += m + 1;
    }
    // m < 0 side: weights grow, so f must decay; demand consecutive small
    // terms before stopping and flag growth as non-convergence.
    {
        double qm = 1.0 / ctx.q;
        double prev = std::numeric_limits<double>::infinity();
        int small_run = 0;
        int growth_run = 0;
        int m = 0;
        for (; m < ctx.max_terms; ++m) {
            double term = scale * qm * f(qm);
            sum.add(term);
            double tol = ctx.eps_series * std::max(1.0, std::abs(sum.value()));
            small_run = std::abs(term) <= tol ? small_run + 1 : 0;
            if (small_run >= 3) break;
            growth_run = std::abs(term) > std::abs(prev) ? growth_run + 1 : 0;
            if (growth_run >= 12)
                throw NonAbsolutelyConvergent("qcalculus", "jackson_integral_0inf",
                                              "terms grow on the m < 0 side of the bilateral sum");
            prev = term;
            qm /= ctx.q;
        }
        if (m >= ctx.max_terms) r.status = SeriesStatus::Truncated;
        used += m + 1;
    }
    r.value = sum.value();
    r.terms_used = used;
    r.tail_estimate = ctx.eps_series * std::max(1.0, std::abs(r.value));
    return r;
}

// Riemann-Liouville q-fractional integral of order alpha at base point 0:
//   (1/Gamma_q(alpha)) int_0^x x^{alpha-1} (q t/x; q)_{alpha-1} f(t) d_q t.
// On the Jackson nodes t = x q^m the kernel argument is the exact power
// q^{m+1}; the kernel values follow the one-step recursion of (a;q)_inf.
inline SeriesResult rl_fractional_integral(const QFunction& f,
                                           double alpha,
                                           double x,
                                           const QContext& ctx) {
    if (!(alpha > 0.0))
        throw InvalidArgument("qcalculus", "rl_fractional_integral", "alpha must be positive");
    if (!(x > 0.0))
        throw InvalidArgument("qcalculus", "rl_fractional_integral", "x must be positive");
    const double q = ctx.q;
    const double front = std::pow(x, alpha) * (1.0 - q) * recip_q_gamma(alpha, ctx);
    // P_m = (q^{m+1}; q)_inf, Q_m = (q^{m+alpha}; q)_inf, advanced by division.
    double P = q_pochhammer_inf(q, ctx).value;
    double Q = q_pochhammer_inf(std::pow(q, alpha), ctx).value;
    double qp1 = q;                     // q^{m+1}
    double qpa = std::pow(q, alpha);    // q^{m+alpha}
    CompensatedSum sum;
    SeriesResult r;
    double qm = 1.0;
    double prev = 0.0;
    int m = 0;
    for (; m < ctx.max_terms; ++m) {
        double kernel = P / Q;
        double term = qm * kernel * f(x * qm);
        sum.add(term);
        if (m >= 2 && qm < ctx.eps_series) {
            double rho = std::abs(prev) > 0.0 ? std::min(std::abs(term / prev), 0.999) : q;
            rho = std::max(rho, q);
            double bound = std::abs(term) * rho / (1.0 - rho);
            if (bound <= ctx.eps_series * std::max(1.0, std::abs(sum.value()))) {
                r.value = front * sum.value();
                r.terms_used = m + 1;
                r.tail_estimate = std::abs(front) * bound;
                r.status = SeriesStatus::Converged;
                return r;
            }
        }
        prev = term;
        P /= 1.0 - qp1;
        Q /= 1.0 - qpa;
        qp1 *= q;
        qpa *= q;
        qm *= q;
    }
    r.value = front * sum.value();
    r.terms_used = m;
    r.tail_estimate = std::abs(front) * std::abs(prev) / (1.0 - q);
    r.status = SeriesStatus::Truncated;
    return r;
}

// Caputo fractional q-derivative: the fractional integral of order
// ceil(alpha) - alpha applied to the ceil(alpha)-fold q-derivative. For
// integer alpha the integral factor has order 0 and is the identity, so the
// operator reduces to the plain iterated q-derivative.
inline SeriesResult caputo_derivative(const QFunction& f,
                                      double alpha,
                                      double x,
                                      const QContext& ctx) {
    if (!(alpha > 0.0))
        throw InvalidArgument("qcalculus", "caputo_derivative", "alpha must be positive");
    if (!(x > 0.0))
        throw InvalidArgument("qcalculus", "caputo_derivative", "x must be positive");
    double rounded = std::round(alpha);
    if (std::abs(alpha - rounded) < 1e-12) {
        SeriesResult r;
        r.value = q_derivative_n(f, static_cast<int>(rounded), x, ctx);
        return r;
    }
    int n = static_cast<int>(std::ceil(alpha));
    QFunction dn = [&f, n, &ctx](double t) { return q_derivative_n(f, n, t, ctx); };
    return rl_fractional_integral(dn, static_cast<double>(n) - alpha, x, ctx);
}

}  // namespace qcalc
