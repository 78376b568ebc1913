#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qcalc/bounds.hpp"
#include "qcalc/context.hpp"
#include "qcalc/spectral.hpp"

namespace qcalc {

struct IoError : Error {
    using Error::Error;
};

namespace io {

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("io", "read_text_file", "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("io", "write_text_file", "cannot open " + path);
    out << content;
    if (!out) throw IoError("io", "write_text_file", "write failed for " + path);
}

namespace detail {

inline std::vector<std::pair<long, double>> parse_two_column_csv(const std::string& text,
                                                                 const std::string& header,
                                                                 const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw IoError("io", "parse_csv", origin + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != header)
        throw IoError("io", "parse_csv",
                      origin + ": expected header '" + header + "', got '" + line + "'");
    std::vector<std::pair<long, double>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw IoError("io", "parse_csv",
                          origin + ": line " + std::to_string(lineno) + " has no comma");
        try {
            long k = std::stol(line.substr(0, comma));
            double v = std::stod(line.substr(comma + 1));
            rows.emplace_back(k, v);
        } catch (const std::exception&) {
            throw IoError("io", "parse_csv",
                          origin + ": cannot parse line " + std::to_string(lineno));
        }
    }
    return rows;
}

}  // namespace detail

// Eigenvalue file: header "k,lambda", 1-based consecutive k in ascending order.
inline std::vector<double> read_eigenvalue_csv(const std::string& path) {
    auto rows = detail::parse_two_column_csv(read_text_file(path), "k,lambda", path);
    if (rows.empty()) throw IoError("io", "read_eigenvalue_csv", path + ": no rows");
    std::vector<double> ev;
    ev.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].first != static_cast<long>(i) + 1)
            throw IoError("io", "read_eigenvalue_csv",
                          path + ": mode indices must be 1..K in order");
        ev.push_back(rows[i].second);
    }
    return ev;
}

// Coefficient file: header "k,value", 1-based consecutive k.
inline CoefficientField read_coefficient_csv(const std::string& path) {
    auto rows = detail::parse_two_column_csv(read_text_file(path), "k,value", path);
    if (rows.empty()) throw IoError("io", "read_coefficient_csv", path + ": no rows");
    CoefficientField c;
    c.coefficients.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].first != static_cast<long>(i) + 1)
            throw IoError("io", "read_coefficient_csv",
                          path + ": mode indices must be 1..K in order");
        c.coefficients.push_back(rows[i].second);
    }
    return c;
}

inline std::string fmt_double(double x) { return qcalc::detail::fmt_double(x); }

// Long-format solution export: one row per (mode, time node).
inline std::string solution_to_csv(const SolutionBundle& bundle) {
    std::string out = "mode,t,u\n";
    for (int k = 0; k < bundle.model.modes(); ++k)
        for (int i = 0; i < bundle.grid.node_count(); ++i)
            out += std::to_string(k + 1) + "," +
                   fmt_double(bundle.grid.nodes[static_cast<std::size_t>(i)]) + "," +
                   fmt_double(bundle.traces[static_cast<std::size_t>(k)]
                                           [static_cast<std::size_t>(i)]) +
                   "\n";
    return out;
}

inline nlohmann::json solution_diagnostics(const SolutionBundle& bundle) {
    nlohmann::json modes = nlohmann::json::array();
    for (int k = 0; k < bundle.model.modes(); ++k) {
        nlohmann::json m;
        m["mode"] = k + 1;
        m["status"] = to_string(bundle.mode_status[static_cast<std::size_t>(k)]);
        if (!bundle.mode_ok(k)) m["error"] = bundle.mode_errors[static_cast<std::size_t>(k)];
        modes.push_back(m);
    }
    nlohmann::json j;
    j["alpha"] = bundle.alpha;
    j["horizon"] = bundle.grid.horizon;
    j["modes"] = modes;
    j["grid_depth"] = bundle.grid.depth();
    if (std::isfinite(bundle.residual_max)) j["residual_max"] = bundle.residual_max;
    return j;
}

inline nlohmann::json bounds_to_json(const std::vector<BoundReport>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const BoundReport& r : rows) {
        nlohmann::json j;
        j["alpha"] = r.alpha;
        j["beta"] = r.beta;
        j["q"] = r.q;
        j["z"] = r.z;
        j["value"] = r.value;
        j["lower"] = r.lower;
        j["upper"] = r.upper;
        j["decay_bound"] = r.decay_bound;
        j["holds_lower"] = r.holds_lower;
        j["holds_upper"] = r.holds_upper;
        j["holds_range"] = r.holds_range;
        j["holds_decay"] = r.holds_decay;
        j["margin_lower"] = r.margin_lower;
        j["margin_upper"] = r.margin_upper;
        arr.push_back(j);
    }
    return arr;
}

// Aggregate pass rates and worst margins of a scan, for the summary report.
inline nlohmann::json bounds_summary(const std::vector<BoundReport>& rows) {
    nlohmann::json j;
    int n = 0, failed = 0, lower_viol = 0, upper_viol = 0, range_viol = 0, decay_viol = 0,
        empirical = 0;
    double worst_lower = std::numeric_limits<double>::infinity();
    double worst_upper = std::numeric_limits<double>::infinity();
    nlohmann::json violations = nlohmann::json::array();
    for (const BoundReport& r : rows) {
        ++n;
        if (r.failed) {
            ++failed;
            nlohmann::json v;
            v["alpha"] = r.alpha;
            v["beta"] = r.beta;
            v["q"] = r.q;
            v["z"] = r.z;
            v["error"] = r.error;
            violations.push_back(v);
            continue;
        }
        if (std::isfinite(r.margin_lower)) worst_lower = std::min(worst_lower, r.margin_lower);
        if (std::isfinite(r.margin_upper)) worst_upper = std::min(worst_upper, r.margin_upper);
        bool viol = false;
        if (std::isfinite(r.lower) && !r.holds_lower) ++lower_viol, viol = true;
        if (std::isfinite(r.upper) && !r.holds_upper) ++upper_viol, viol = true;
        if (r.beta == 1.0 && !r.holds_range) ++range_viol, viol = true;
        if (!r.holds_decay) ++decay_viol, viol = true;
        if (r.decay_constant_empirical) ++empirical;
        if (viol) {
            nlohmann::json v;
            v["alpha"] = r.alpha;
            v["beta"] = r.beta;
            v["q"] = r.q;
            v["z"] = r.z;
            v["margin_lower"] = r.margin_lower;
            v["margin_upper"] = r.margin_upper;
            violations.push_back(v);
        }
    }
    j["rows"] = n;
    j["evaluation_failures"] = failed;
    j["lower_violations"] = lower_viol;
    j["upper_violations"] = upper_viol;
    j["range_violations"] = range_viol;
    j["decay_violations"] = decay_viol;
    j["empirical_decay_constant_rows"] = empirical;
    if (std::isfinite(worst_lower)) j["worst_margin_lower"] = worst_lower;
    if (std::isfinite(worst_upper)) j["worst_margin_upper"] = worst_upper;
    j["violations"] = violations;
    return j;
}

}  // namespace io
}  // namespace qcalc
