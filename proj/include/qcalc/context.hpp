#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace qcalc {

// Base class for every failure the library can raise. Carries the module and
// operation that failed so front ends can report machine-readable locations.
class Error : public std::runtime_error {
public:
    Error(std::string module, std::string op, const std::string& message)
        : std::runtime_error(module + "." + op + ": " + message),
          module_(std::move(module)),
          op_(std::move(op)) {}

    const std::string& module() const noexcept { return module_; }
    const std::string& op() const noexcept { return op_; }

private:
    std::string module_;
    std::string op_;
};

struct InvalidArgument : Error {
    using Error::Error;
};
struct PoleError : Error {
    using Error::Error;
};
struct DivisionByZeroProduct : Error {
    using Error::Error;
};
struct OutsideRadius : Error {
    using Error::Error;
};
struct AccelerationFailed : Error {
    using Error::Error;
};
struct InvalidTranslation : Error {
    using Error::Error;
};
struct ZeroPoint : Error {
    using Error::Error;
};
struct NonAbsolutelyConvergent : Error {
    using Error::Error;
};
struct DenominatorUnderflow : Error {
    using Error::Error;
};
struct NoBasis : Error {
    using Error::Error;
};
struct InsufficientGrid : Error {
    using Error::Error;
};

// Evaluation context shared by every series and product in the library.
// q is the base of the calculus; the tolerances drive truncation decisions.
// Immutable after construction, safe to share across threads.
struct QContext {
    double q;
    double eps_product = 1e-16;  // infinite-product truncation tolerance
    double eps_series = 1e-14;   // series tail tolerance
    int max_terms = 10000;       // hard cap on any summation length

    explicit QContext(double q_in,
                      double eps_product_in = 1e-16,
                      double eps_series_in = 1e-14,
                      int max_terms_in = 10000,
                      double q_min = 1e-3,
                      double q_max = 0.999)
        : q(q_in), eps_product(eps_product_in), eps_series(eps_series_in), max_terms(max_terms_in) {
        if (!(q > 0.0 && q < 1.0))
            throw InvalidArgument("qcore", "QContext", "q must lie strictly in (0,1)");
        // Products and series degenerate near the endpoints; the window is
        // configurable for callers that accept the longer runtimes.
        if (q < q_min - 1e-15 || q > q_max + 1e-15)
            throw InvalidArgument("qcore", "QContext",
                                  "q outside configured window [" + std::to_string(q_min) + ", " +
                                      std::to_string(q_max) + "]");
        if (!(eps_product > 0.0) || !(eps_series > 0.0))
            throw InvalidArgument("qcore", "QContext", "tolerances must be strictly positive");
        if (max_terms < 1)
            throw InvalidArgument("qcore", "QContext", "max_terms must be >= 1");
    }

    QContext with_max_terms(int n) const {
        QContext c = *this;
        c.max_terms = n < 1 ? 1 : n;
        return c;
    }
};

enum class SeriesStatus {
    Converged,    // tail bound met the series tolerance
    Accelerated,  // value obtained by analytic continuation or extrapolation
    Truncated,    // max_terms reached before the tolerance
    Diverged      // no usable value; callers must treat as error
};

inline const char* to_string(SeriesStatus s) {
    switch (s) {
        case SeriesStatus::Converged: return "converged";
        case SeriesStatus::Accelerated: return "accelerated";
        case SeriesStatus::Truncated: return "truncated";
        case SeriesStatus::Diverged: return "diverged";
    }
    return "unknown";
}

// A numeric value together with the convergence diagnostics of the
// summation or product that produced it.
struct SeriesResult {
    double value = 0.0;
    int terms_used = 0;
    double tail_estimate = 0.0;  // absolute bound on the omitted tail
    SeriesStatus status = SeriesStatus::Converged;

    bool usable() const noexcept { return status != SeriesStatus::Diverged; }
};

// Neumaier-compensated accumulator; series terms here span many orders of
// magnitude, so plain summation loses the small ones.
class CompensatedSum {
public:
    void add(double x) noexcept {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace qcalc
