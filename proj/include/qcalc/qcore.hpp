#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "qcalc/context.hpp"

namespace qcalc {

// q-real number [alpha]_q = (1 - q^alpha)/(1 - q).
inline double q_number(double alpha, const QContext& ctx) {
    // -expm1(alpha*log q) keeps precision near alpha = 0.
    return -std::expm1(alpha * std::log(ctx.q)) / (1.0 - ctx.q);
}

// Finite q-shifted factorial (a;q)_n = prod_{k=0}^{n-1} (1 - q^k a).
inline double q_pochhammer(double a, int n, const QContext& ctx) {
    double p = 1.0;
    double t = a;
    for (int k = 0; k < n; ++k) {
        p *= (1.0 - t);
        t *= ctx.q;
    }
    return p;
}

// Infinite q-shifted factorial (a;q)_inf. The factors approach 1 geometrically;
// after truncating at q^N a the omitted factors multiply the result by at most
// exp(|a| q^N / (1-q)), which is recorded as the tail estimate.
inline SeriesResult q_pochhammer_inf(double a, const QContext& ctx) {
    SeriesResult r;
    double p = 1.0;
    double t = a;
    int k = 0;
    const double thr = (1.0 - ctx.q) * ctx.eps_product;
    while (std::abs(t) > thr && k < ctx.max_terms) {
        p *= (1.0 - t);
        t *= ctx.q;
        ++k;
        if (p == 0.0) break;  // an exact zero factor pins the product
    }
    r.value = p;
    r.terms_used = k;
    double rel_tail = std::expm1(std::abs(t) / (1.0 - ctx.q));
    r.tail_estimate = rel_tail * std::abs(p);
    if (p == 0.0) {
        r.tail_estimate = 0.0;
        r.status = SeriesStatus::Converged;
    } else if (std::abs(t) <= thr) {
        r.status = SeriesStatus::Converged;
    } else {
        r.status = SeriesStatus::Truncated;
    }
    return r;
}

namespace detail {

// log |Gamma_q(x)| with sign, via the termwise-combined sum
//   log Gamma_q(x) = sum_k [log(1-q^{k+1}) - log(1-q^{k+x})] + (1-x) log(1-q).
// Combining the two products term by term keeps the sum O(1) even when each
// product alone underflows (q close to 1).
struct LogGamma {
    double log_abs;
    int sign;
};

inline LogGamma log_q_gamma(double x, const QContext& ctx) {
    const double q = ctx.q;
    double qk1 = q;                 // q^{k+1}
    double qkx = std::pow(q, x);    // q^{k+x}
    double logsum = 0.0;
    int sign = 1;
    const double thr = (1.0 - q) * ctx.eps_product;
    for (int k = 0; k < ctx.max_terms; ++k) {
        if (qk1 <= thr && qkx <= thr) break;
        double num = 1.0 - qk1;
        double den = 1.0 - qkx;
        if (den == 0.0)
            throw PoleError("qcore", "q_gamma", "pole at x = " + std::to_string(x));
        if (den < 0.0) sign = -sign;
        logsum += std::log(num) - std::log(std::abs(den));
        qk1 *= q;
        qkx *= q;
    }
    return {logsum + (1.0 - x) * std::log1p(-q), sign};
}

}  // namespace detail

// q-Gamma function. Poles at x = 0, -1, -2, ...; x is treated as a nonpositive
// integer when it is within 1e-12 of one.
inline double q_gamma(double x, const QContext& ctx) {
    double n = std::round(x);
    if (std::abs(x - n) < 1e-12 && n <= 0.0)
        throw PoleError("qcore", "q_gamma", "pole at nonpositive integer x = " + std::to_string(x));
    auto lg = detail::log_q_gamma(x, ctx);
    return lg.sign * std::exp(lg.log_abs);
}

// 1/Gamma_q(x), entire in x: returns 0 at the nonpositive-integer poles and
// underflows cleanly to 0 for very large x instead of overflowing.
inline double recip_q_gamma(double x, const QContext& ctx) {
    double n = std::round(x);
    if (std::abs(x - n) < 1e-12 && n <= 0.0) return 0.0;
    auto lg = detail::log_q_gamma(x, ctx);
    double l = -lg.log_abs;
    if (l < -745.0) return 0.0;
    return lg.sign * std::exp(l);
}

// Real-index q-shifted factorial (a;q)_nu = (a;q)_inf / (a q^nu; q)_inf.
inline SeriesResult q_pochhammer_real(double a, double nu, const QContext& ctx) {
    SeriesResult num = q_pochhammer_inf(a, ctx);
    SeriesResult den = q_pochhammer_inf(a * std::pow(ctx.q, nu), ctx);
    if (std::abs(den.value) < 1e-14)
        throw DivisionByZeroProduct("qcore", "q_pochhammer_real",
                                    "(a q^nu; q)_inf vanishes within tolerance");
    SeriesResult r;
    r.value = num.value / den.value;
    r.terms_used = num.terms_used + den.terms_used;
    double rel = 0.0;
    if (num.value != 0.0) rel += num.tail_estimate / std::abs(num.value);
    rel += den.tail_estimate / std::abs(den.value);
    r.tail_estimate = rel * std::abs(r.value);
    r.status = (num.status == SeriesStatus::Truncated || den.status == SeriesStatus::Truncated)
                   ? SeriesStatus::Truncated
                   : SeriesStatus::Converged;
    return r;
}

// q-factorial [n]_q! = [1]_q [2]_q ... [n]_q; equals Gamma_q(n+1).
inline double q_factorial(int n, const QContext& ctx) {
    double p = 1.0;
    for (int k = 1; k <= n; ++k) p *= q_number(static_cast<double>(k), ctx);
    return p;
}

}  // namespace qcalc
