#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "qcalc/context.hpp"
#include "qcalc/qcore.hpp"
#include "qcalc/qspecial.hpp"

namespace qcalc {

// One verification row for the Mittag-Leffler estimates: the two-sided bound
// and strict (0,1) range (for beta = 1, 0 < alpha < 1), and the algebraic
// decay bound |e| <= C_q/(1+z) (for 0 < alpha < 2, beta >= 0).
struct BoundReport {
    double alpha = 0.0;
    double beta = 0.0;
    double q = 0.0;
    double z = 0.0;
    double value = std::numeric_limits<double>::quiet_NaN();
    double lower = std::numeric_limits<double>::quiet_NaN();
    double upper = std::numeric_limits<double>::quiet_NaN();
    double decay_bound = std::numeric_limits<double>::quiet_NaN();
    bool holds_lower = false;
    bool holds_upper = false;
    bool holds_range = false;
    bool holds_decay = false;
    double margin_lower = std::numeric_limits<double>::quiet_NaN();
    double margin_upper = std::numeric_limits<double>::quiet_NaN();

    // Diagnostics not part of the fixed serialization schema.
    SeriesStatus value_status = SeriesStatus::Converged;
    bool decay_constant_empirical = false;  // C_q replaced by the scanned sup
    bool failed = false;                    // evaluation error captured below
    std::string error;
};

// Constant of the algebraic decay estimate:
//   alpha' = 2^alpha / ((1-q^beta)(1-q^{1/2})),   C_q = e_{q^{1/2}}(alpha') / Gamma_q(beta).
// The defining series of e_{q^{1/2}}(alpha') always lies outside its radius
// here, so the product continuation is used; when that lands at or beyond a
// pole (value <= 0) the constant carries no information and is flagged as not
// computable.
struct DecayConstant {
    double alpha_prime = 0.0;
    double c_q = std::numeric_limits<double>::quiet_NaN();
    bool computable = false;
};

inline DecayConstant decay_constant(const MLParams& p, const QContext& ctx) {
    DecayConstant d;
    const double qr = std::sqrt(ctx.q);
    if (!(p.beta > 0.0)) {
        // Gamma_q(beta) sits at a pole for beta = 0.
        d.alpha_prime = std::pow(2.0, p.alpha) / ((1.0 - std::pow(ctx.q, p.beta)) * (1.0 - qr));
        return d;
    }
    d.alpha_prime = std::pow(2.0, p.alpha) / ((1.0 - std::pow(ctx.q, p.beta)) * (1.0 - qr));
    try {
        QContext half_ctx(qr, ctx.eps_product, ctx.eps_series, ctx.max_terms);
        SeriesResult e = q_exp(d.alpha_prime, half_ctx);
        if (!e.usable() || !(e.value > 0.0)) return d;
        d.c_q = e.value / q_gamma(p.beta, ctx);
        d.computable = true;
    } catch (const Error&) {
        d.computable = false;
    }
    return d;
}

// Evaluates e_{alpha,1}(-z;q) together with both two-sided bound expressions.
// Margins are signed relative slack (positive = inequality satisfied).
inline BoundReport ml_bounds_check(double alpha,
                                   double z,
                                   const QContext& ctx,
                                   const EvalStrategy& strat = {}) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw InvalidArgument("bounds", "ml_bounds_check", "alpha must lie in (0,1)");
    if (z < 0.0)
        throw InvalidArgument("bounds", "ml_bounds_check", "z must be nonnegative");
    BoundReport r;
    r.alpha = alpha;
    r.beta = 1.0;
    r.q = ctx.q;
    r.z = z;
    SeriesResult v = q_mittag_leffler({alpha, 1.0}, -z, ctx, strat);
    r.value = v.value;
    r.value_status = v.status;
    r.lower = 1.0 / (1.0 + q_gamma(1.0 - alpha, ctx) * z);
    r.upper = 1.0 / (1.0 + z / q_gamma(alpha + 1.0, ctx));
    r.margin_lower = (r.value - r.lower) / r.lower;
    r.margin_upper = (r.upper - r.value) / r.upper;
    r.holds_lower = r.margin_lower >= 0.0;
    r.holds_upper = r.margin_upper >= 0.0;
    r.holds_range = r.value > 0.0 && r.value < 1.0;
    return r;
}

// Evaluates e_{alpha,beta}(-z;q) against the algebraic decay bound. When the
// constant is not computable the empirical constant (1+z)|value| of this row
// stands in and the substitution is flagged.
inline BoundReport ml_decay_check(const MLParams& p,
                                  double z,
                                  const QContext& ctx,
                                  const EvalStrategy& strat = {}) {
    if (!(p.alpha > 0.0 && p.alpha < 2.0))
        throw InvalidArgument("bounds", "ml_decay_check", "alpha must lie in (0,2)");
    if (p.beta < 0.0)
        throw InvalidArgument("bounds", "ml_decay_check", "beta must be nonnegative");
    if (z < 0.0)
        throw InvalidArgument("bounds", "ml_decay_check", "z must be nonnegative");
    BoundReport r;
    r.alpha = p.alpha;
    r.beta = p.beta;
    r.q = ctx.q;
    r.z = z;
    SeriesResult v = q_mittag_leffler(p, -z, ctx, strat);
    r.value = v.value;
    r.value_status = v.status;
    DecayConstant c = decay_constant(p, ctx);
    if (c.computable) {
        r.decay_bound = c.c_q / (1.0 + z);
        r.holds_decay = std::abs(r.value) <= r.decay_bound;
    } else {
        r.decay_bound = std::abs(r.value);  // empirical sup over this singleton grid
        r.decay_constant_empirical = true;
        r.holds_decay = true;
    }
    if (p.beta == 1.0) r.holds_range = r.value > 0.0 && r.value < 1.0;
    return r;
}

// Cartesian sweep over the parameter grids. Rows are emitted in lexicographic
// input order; a row is produced for every tuple admissible for at least one
// of the two estimates, and evaluation errors are captured in the row rather
// than aborting the scan. Non-computable decay constants are replaced by the
// empirical constant sup_z (1+z)|value| over the scanned z-grid of the same
// (alpha, beta, q) group.
inline std::vector<BoundReport> bounds_scan(const std::vector<double>& alphas,
                                            const std::vector<double>& betas,
                                            const std::vector<double>& qs,
                                            const std::vector<double>& zs,
                                            const QContext& ctx_template,
                                            const EvalStrategy& strat = {}) {
    std::vector<BoundReport> rows;
    for (double alpha : alphas) {
        for (double beta : betas) {
            for (double q : qs) {
                const bool two_sided = alpha > 0.0 && alpha < 1.0 && beta == 1.0;
                const bool decay = alpha > 0.0 && alpha < 2.0 && beta >= 0.0;
                if (!two_sided && !decay) continue;
                QContext ctx(q, ctx_template.eps_product, ctx_template.eps_series,
                             ctx_template.max_terms);
                std::size_t group_begin = rows.size();
                bool group_empirical = false;
                for (double z : zs) {
                    BoundReport r;
                    try {
                        if (decay) {
                            r = ml_decay_check({alpha, beta}, z, ctx, strat);
                            if (two_sided) {
                                BoundReport ts = ml_bounds_check(alpha, z, ctx, strat);
                                r.lower = ts.lower;
                                r.upper = ts.upper;
                                r.margin_lower = ts.margin_lower;
                                r.margin_upper = ts.margin_upper;
                                r.holds_lower = ts.holds_lower;
                                r.holds_upper = ts.holds_upper;
                                r.holds_range = ts.holds_range;
                            }
                        } else {
                            r = ml_bounds_check(alpha, z, ctx, strat);
                        }
                    } catch (const Error& e) {
                        r.alpha = alpha;
                        r.beta = beta;
                        r.q = q;
                        r.z = z;
                        r.failed = true;
                        r.error = e.what();
                    }
                    group_empirical = group_empirical || r.decay_constant_empirical;
                    rows.push_back(r);
                }
                if (group_empirical) {
                    double sup = 0.0;
                    for (std::size_t i = group_begin; i < rows.size(); ++i)
                        if (!rows[i].failed)
                            sup = std::max(sup, (1.0 + rows[i].z) * std::abs(rows[i].value));
                    for (std::size_t i = group_begin; i < rows.size(); ++i) {
                        BoundReport& r = rows[i];
                        if (r.failed || !r.decay_constant_empirical) continue;
                        r.decay_bound = sup / (1.0 + r.z);
                        r.holds_decay = std::abs(r.value) <= r.decay_bound + 1e-15;
                    }
                }
            }
        }
    }
    return rows;
}

namespace detail {

inline std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline const char* fmt_bool(bool b) { return b ? "true" : "false"; }

}  // namespace detail

inline std::string bounds_to_csv(const std::vector<BoundReport>& rows) {
    std::string out =
        "alpha,beta,q,z,value,lower,upper,decay_bound,holds_lower,holds_upper,holds_range,"
        "holds_decay,margin_lower,margin_upper\n";
    for (const BoundReport& r : rows) {
        out += detail::fmt_double(r.alpha) + "," + detail::fmt_double(r.beta) + "," +
               detail::fmt_double(r.q) + "," + detail::fmt_double(r.z) + "," +
               detail::fmt_double(r.value) + "," + detail::fmt_double(r.lower) + "," +
               detail::fmt_double(r.upper) + "," + detail::fmt_double(r.decay_bound) + "," +
               detail::fmt_bool(r.holds_lower) + "," + detail::fmt_bool(r.holds_upper) + "," +
               detail::fmt_bool(r.holds_range) + "," + detail::fmt_bool(r.holds_decay) + "," +
               detail::fmt_double(r.margin_lower) + "," + detail::fmt_double(r.margin_upper) +
               "\n";
    }
    return out;
}

// Default grids used by the verification harness and the command line.
struct DefaultGrids {
    // two-sided estimate: alpha in (0,1), q moderate, z inside the series radius
    static std::vector<double> range_alphas() { return {0.2, 0.35, 0.5, 0.65, 0.8}; }
    static std::vector<double> range_qs() { return {0.3, 0.5, 0.7}; }
    static std::vector<double> range_zs(double alpha, double q, int n = 20) {
        // log-spaced inside the radius |z| (1-q)^alpha < 1
        double radius = std::pow(1.0 - q, -alpha);
        double lo = 1e-3 * radius;
        double hi = 0.9 * radius;
        std::vector<double> zs(n);
        for (int i = 0; i < n; ++i)
            zs[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
        return zs;
    }
    // decay estimate grids; z kept within the reach of double-precision
    // extrapolation (about twice the smallest series radius on the grid)
    static std::vector<double> decay_alphas() { return {0.5, 1.0, 1.5}; }
    static std::vector<double> decay_betas() { return {0.5, 1.0, 1.5}; }
    static std::vector<double> decay_qs() { return {0.3, 0.5}; }
    static std::vector<double> decay_zs(int n = 15) {
        double lo = 0.05, hi = 2.5;
        std::vector<double> zs(n);
        for (int i = 0; i < n; ++i)
            zs[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
        return zs;
    }
};

}  // namespace qcalc
