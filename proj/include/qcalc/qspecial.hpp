#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "qcalc/context.hpp"
#include "qcalc/qcore.hpp"

namespace qcalc {

// Parameters of the two-parameter q-Mittag-Leffler family.
struct MLParams {
    double alpha;  // fractional order, > 0
    double beta;   // second parameter, >= 0
};

enum class EvalMode { SeriesOnly, SeriesThenAccelerate };

// How to evaluate outside the series radius: refuse, or extrapolate the
// alternating partial sums with Wynn's epsilon algorithm.
struct EvalStrategy {
    EvalMode mode = EvalMode::SeriesThenAccelerate;
    int accel_table_size = 40;
};

namespace detail {

// Wynn epsilon algorithm, moving-lozenge form: one counter-diagonal of the
// epsilon table is kept and updated per incoming partial sum.
class WynnAccelerator {
public:
    double next(double partial_sum) {
        diag_.push_back(partial_sum);
        if (diag_.size() == 1) return partial_sum;
        double aux2 = 0.0;
        for (std::size_t j = diag_.size() - 1; j > 0; --j) {
            double aux1 = aux2;
            aux2 = diag_[j - 1];
            double diff = diag_[j] - aux2;
            if (std::abs(diff) <= std::numeric_limits<double>::min())
                diag_[j - 1] = aux1 + 1.0 / std::numeric_limits<double>::max();
            else
                diag_[j - 1] = aux1 + 1.0 / diff;
        }
        return diag_.size() % 2 == 1 ? diag_[0] : diag_[1];
    }

private:
    std::vector<double> diag_;
};

// Shared summation engine for the Mittag-Leffler type series. `term(k)`
// returns the k-th term; `ratio_limit` is the asymptotic |term_{k+1}/term_k|.
// Inside the radius the series is summed with a geometric tail bound; outside,
// the alternating partial sums are extrapolated and the most stable stretch of
// the epsilon-table diagonal is taken as the value.
template <typename TermFn>
SeriesResult sum_ml_series(TermFn&& term,
                           double ratio_limit,
                           bool alternating,
                           const QContext& ctx,
                           const EvalStrategy& strat,
                           const char* module,
                           const char* op) {
    SeriesResult r;
    if (ratio_limit < 0.999) {
        CompensatedSum sum;
        double prev = 0.0;
        int k = 0;
        for (; k < ctx.max_terms; ++k) {
            double t = term(k);
            sum.add(t);
            if (k >= 2) {
                double rho = ratio_limit;
                if (prev != 0.0) rho = std::max(rho, std::min(std::abs(t / prev), 0.999));
                double bound = std::abs(t) * rho / (1.0 - rho);
                if (bound <= ctx.eps_series * std::max(1.0, std::abs(sum.value()))) {
                    r.value = sum.value();
                    r.terms_used = k + 1;
                    r.tail_estimate = bound;
                    r.status = SeriesStatus::Converged;
                    return r;
                }
            }
            prev = t;
        }
        r.value = sum.value();
        r.terms_used = k;
        r.tail_estimate = std::abs(prev) * ratio_limit / (1.0 - ratio_limit);
        r.status = SeriesStatus::Truncated;
        return r;
    }

    if (strat.mode == EvalMode::SeriesOnly || !alternating)
        throw OutsideRadius(module, op,
                            "argument outside the series radius and acceleration unavailable");
    if (strat.accel_table_size < 4)
        throw InvalidArgument(module, op, "accel_table_size must be >= 4 when accelerating");

    WynnAccelerator wynn;
    CompensatedSum sum;
    std::vector<double> estimates;
    estimates.reserve(static_cast<std::size_t>(strat.accel_table_size));
    int fed = 0;
    for (int k = 0; k < strat.accel_table_size; ++k) {
        double t = term(k);
        sum.add(t);
        // Once the divergent terms outgrow the double mantissa the epsilon
        // table only picks up roundoff, so stop feeding it.
        if (k > 0 && std::abs(sum.value()) > 1e18) break;
        estimates.push_back(wynn.next(sum.value()));
        ++fed;
    }
    // Pick the most stable stretch of the diagonal. Successive estimates
    // alternate between the even and odd columns of the epsilon table, which
    // converge at different rates, so stability is judged between estimates
    // of the same parity; two consecutive differences guard against the
    // accidental agreement of a single pair.
    double best_window = std::numeric_limits<double>::infinity();
    double best_value = estimates.back();
    double best_tail = std::numeric_limits<double>::infinity();
    for (std::size_t i = 4; i < estimates.size(); ++i) {
        double d1 = std::abs(estimates[i] - estimates[i - 2]);
        double d0 = std::abs(estimates[i - 2] - estimates[i - 4]);
        if (d1 + d0 < best_window) {
            best_window = d1 + d0;
            best_value = estimates[i];
            best_tail = d1;
        }
    }
    if (estimates.size() < 5 ||
        best_window > 100.0 * ctx.eps_series * std::max(1.0, std::abs(best_value)))
        throw AccelerationFailed(module, op, "epsilon table did not stabilize to 100*eps_series");
    r.value = best_value;
    r.terms_used = fed;
    r.tail_estimate = best_tail;
    r.status = SeriesStatus::Accelerated;
    return r;
}

}  // namespace detail

// q-exponential e_q(x). Inside the radius |x|(1-q) < 1 the defining series is
// summed directly; outside, the Euler product continuation 1/((1-q)x; q)_inf
// is used (the two agree on the common domain).
inline SeriesResult q_exp(double x, const QContext& ctx) {
    const double w = (1.0 - ctx.q) * x;
    if (std::abs(w) < 0.999) {
        double t = 1.0;
        auto term = [&, k_expect = 0](int k) mutable {
            if (k != k_expect) {
                t = 1.0;
                for (int j = 1; j <= k; ++j) t *= x / q_number(static_cast<double>(j), ctx);
                k_expect = k;
            }
            double out = t;
            ++k_expect;
            t *= x / q_number(static_cast<double>(k_expect), ctx);
            return out;
        };
        return detail::sum_ml_series(term, std::abs(w), x < 0.0, ctx, EvalStrategy{},
                                     "qspecial", "q_exp");
    }
    SeriesResult r;
    // Product continuation; poles where (1-q)x = q^{-n}.
    if (w > 1.0) {
        double n = std::round(-std::log(w) / std::log(ctx.q));
        if (n >= 0.0 && std::abs(w * std::pow(ctx.q, n) - 1.0) < 1e-12)
            throw PoleError("qspecial", "q_exp", "(1-q)x hits q^{-n}, pole of the product form");
    }
    SeriesResult p = q_pochhammer_inf(w, ctx);
    if (p.value == 0.0)
        throw PoleError("qspecial", "q_exp", "(1-q)x hits q^{-n}, pole of the product form");
    r.value = 1.0 / p.value;
    r.terms_used = p.terms_used;
    r.tail_estimate = (p.value != 0.0 ? p.tail_estimate / std::abs(p.value) : 0.0) * std::abs(r.value);
    r.status = p.status == SeriesStatus::Truncated ? SeriesStatus::Truncated
                                                   : SeriesStatus::Accelerated;
    return r;
}

// Two-parameter q-Mittag-Leffler function: sum_k z^k / Gamma_q(alpha k + beta).
// Convergent for |z|(1-q)^alpha < 1; for negative z beyond the radius the
// alternating series is summed by Wynn extrapolation.
inline SeriesResult q_mittag_leffler(const MLParams& p,
                                     double z,
                                     const QContext& ctx,
                                     const EvalStrategy& strat = {}) {
    if (!(p.alpha > 0.0))
        throw InvalidArgument("qspecial", "q_mittag_leffler", "alpha must be positive");
    if (p.beta < 0.0)
        throw InvalidArgument("qspecial", "q_mittag_leffler", "beta must be nonnegative");
    const double ratio = std::abs(z) * std::pow(1.0 - ctx.q, p.alpha);
    if (ratio >= 0.999 && z > 0.0)
        throw OutsideRadius("qspecial", "q_mittag_leffler",
                            "z > 0 outside the series radius has no alternating tail");
    double zk = 1.0;
    double zval = z;
    auto term = [&, k_expect = 0](int k) mutable {
        if (k != k_expect) {  // terms are only requested in order
            zk = std::pow(zval, k);
            k_expect = k;
        }
        double t = zk * recip_q_gamma(p.alpha * k + p.beta, ctx);
        zk *= zval;
        ++k_expect;
        return t;
    };
    return detail::sum_ml_series(term, ratio, z < 0.0, ctx, strat, "qspecial", "q_mittag_leffler");
}

// q-translation of the Mittag-Leffler kernel:
//   sum_k c^k t^{alpha k} (q^alpha s/t; q)_{alpha k} / Gamma_q(alpha k + beta).
// At s = 0 this reduces to q_mittag_leffler(p, c t^alpha).
inline SeriesResult translated_ml(const MLParams& p,
                                  double c,
                                  double t,
                                  double s,
                                  const QContext& ctx,
                                  const EvalStrategy& strat = {}) {
    if (!(t > 0.0))
        throw InvalidArgument("qspecial", "translated_ml", "t must be positive");
    if (s < 0.0 || s > t * (1.0 + 1e-12))
        throw InvalidTranslation("qspecial", "translated_ml", "translation requires 0 <= s <= t");
    const double z_eff = c * std::pow(t, p.alpha);
    const double ratio = std::abs(z_eff) * std::pow(1.0 - ctx.q, p.alpha);
    if (ratio >= 0.999 && z_eff > 0.0)
        throw OutsideRadius("qspecial", "translated_ml",
                            "c t^alpha > 0 outside the series radius has no alternating tail");
    const double w = std::pow(ctx.q, p.alpha) * s / t;
    const SeriesResult winf = q_pochhammer_inf(w, ctx);
    double zk = 1.0;
    auto term = [&, k_expect = 0](int k) mutable {
        if (k != k_expect) {
            zk = std::pow(z_eff, k);
            k_expect = k;
        }
        double denom = q_pochhammer_inf(w * std::pow(ctx.q, p.alpha * k), ctx).value;
        double poch = winf.value / denom;
        double t_k = zk * poch * recip_q_gamma(p.alpha * k + p.beta, ctx);
        zk *= z_eff;
        ++k_expect;
        return t_k;
    };
    return detail::sum_ml_series(term, ratio, z_eff < 0.0, ctx, strat, "qspecial",
                                 "translated_ml");
}

}  // namespace qcalc
