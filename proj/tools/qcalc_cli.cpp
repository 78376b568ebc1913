// Command-line front end: evaluate the special functions, run the bound
// scans, solve direct/inverse problems, and run the verification suites.
// Identical configuration and inputs produce byte-identical report files.

#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qcalc/qcalc.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitCompute = 4;
constexpr int kExitVerifyFailed = 5;

struct ConfigError : qcalc::Error {
    using Error::Error;
};

// Everything a run needs, mirrored 1:1 by the JSON config file. Flags given
// on the command line win over config-file values.
struct RunConfig {
    std::string command;
    double q = 0.5;
    double alpha = 0.5;
    double beta = 1.0;
    double horizon = 1.0;
    int modes = 1;
    double mass_shift = 1.0;
    std::string model = "builtin:dirichlet-sine";
    std::string phi_path;
    std::string rho_path;
    std::string out_path;
    std::string format = "csv";
    bool accelerate = true;
    double eps_series = 1e-14;
    double eps_product = 1e-16;
    int max_terms = 10000;
    std::string fn;
    double x = 0.0;
    std::string echo_config_path;
};

nlohmann::json config_to_json(const RunConfig& c) {
    nlohmann::json j;
    j["command"] = c.command;
    j["q"] = c.q;
    j["eps-series"] = c.eps_series;
    j["eps-product"] = c.eps_product;
    j["max-terms"] = c.max_terms;
    j["out"] = c.out_path;
    j["format"] = c.format;
    j["accelerate"] = c.accelerate ? "on" : "off";
    if (c.command == "eval") {
        j["fn"] = c.fn;
        j["x"] = c.x;
        j["alpha"] = c.alpha;
        j["beta"] = c.beta;
    } else if (c.command == "solve-direct" || c.command == "solve-inverse") {
        j["alpha"] = c.alpha;
        j["T"] = c.horizon;
        j["modes"] = c.modes;
        j["mass-shift"] = c.mass_shift;
        j["model"] = c.model;
        j["phi"] = c.phi_path;
        j["rho"] = c.rho_path;
    }
    return j;
}

// Reads a JSON config file and turns its key/value pairs into synthetic
// command-line arguments, skipping any key the user already passed
// explicitly (so real flags win on conflict).
std::vector<std::string> merge_config_args(const std::vector<std::string>& argv_in) {
    std::vector<std::string> args = argv_in;
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size())
                throw ConfigError("cli", "config", "--config requires a path");
            config_path = args[i + 1];
            args.erase(args.begin() + static_cast<long>(i),
                       args.begin() + static_cast<long>(i) + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
            args.erase(args.begin() + static_cast<long>(i));
            break;
        }
    }
    if (config_path.empty()) return args;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(qcalc::io::read_text_file(config_path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("cli", "config", config_path + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError("cli", "config", config_path + ": expected an object");
    auto given = [&](const std::string& flag) {
        for (const std::string& a : args)
            if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
        return false;
    };
    for (const auto& [key, value] : j.items()) {
        if (key == "command") {
            if (args.empty() || args[0].rfind("--", 0) == 0)
                args.insert(args.begin(), value.get<std::string>());
            continue;
        }
        std::string flag = "--" + key;
        if (given(flag)) continue;
        std::string sval = value.is_string() ? value.get<std::string>() : value.dump();
        if (sval.empty()) continue;
        args.push_back(flag + "=" + sval);
    }
    return args;
}

qcalc::QContext make_context(const RunConfig& c) {
    return qcalc::QContext(c.q, c.eps_product, c.eps_series, c.max_terms);
}

qcalc::EvalStrategy make_strategy(const RunConfig& c) {
    qcalc::EvalStrategy s;
    s.mode = c.accelerate ? qcalc::EvalMode::SeriesThenAccelerate : qcalc::EvalMode::SeriesOnly;
    return s;
}

qcalc::SpectralModel load_model(const RunConfig& c) {
    if (c.model == "builtin:dirichlet-sine")
        return qcalc::dirichlet_sine_model(c.modes, c.mass_shift);
    if (c.model.rfind("file:", 0) == 0) {
        auto ev = qcalc::io::read_eigenvalue_csv(c.model.substr(5));
        if (c.modes > 0 && c.modes < static_cast<int>(ev.size()))
            ev.resize(static_cast<std::size_t>(c.modes));
        return qcalc::make_model(std::move(ev), c.mass_shift);
    }
    throw ConfigError("cli", "model",
                      "unknown model '" + c.model + "' (builtin:dirichlet-sine or file:PATH)");
}

void write_or_print(const std::string& out_path, const std::string& content) {
    if (out_path.empty())
        std::fputs(content.c_str(), stdout);
    else
        qcalc::io::write_text_file(out_path, content);
}

int run_eval(const RunConfig& cfg) {
    qcalc::QContext ctx = make_context(cfg);
    qcalc::EvalStrategy strat = make_strategy(cfg);
    double value;
    if (cfg.fn == "qnumber")
        value = qcalc::q_number(cfg.x, ctx);
    else if (cfg.fn == "qgamma")
        value = qcalc::q_gamma(cfg.x, ctx);
    else if (cfg.fn == "qfactorial")
        value = qcalc::q_factorial(static_cast<int>(cfg.x), ctx);
    else if (cfg.fn == "qexp")
        value = qcalc::q_exp(cfg.x, ctx).value;
    else if (cfg.fn == "qpochinf")
        value = qcalc::q_pochhammer_inf(cfg.x, ctx).value;
    else if (cfg.fn == "ml")
        value = qcalc::q_mittag_leffler({cfg.alpha, cfg.beta}, cfg.x, ctx, strat).value;
    else
        throw ConfigError("cli", "eval",
                          "unknown --fn '" + cfg.fn +
                              "' (qnumber|qgamma|qfactorial|qexp|qpochinf|ml)");
    write_or_print(cfg.out_path, qcalc::io::fmt_double(value) + "\n");
    return kExitOk;
}

int run_bounds_scan(const RunConfig& cfg) {
    qcalc::QContext tmpl = make_context(cfg);
    qcalc::EvalStrategy strat = make_strategy(cfg);
    std::vector<qcalc::BoundReport> rows;
    // two-sided estimate grid: z depends on (alpha, q) to stay inside the radius
    for (double alpha : qcalc::DefaultGrids::range_alphas())
        for (double q : qcalc::DefaultGrids::range_qs()) {
            auto part = qcalc::bounds_scan({alpha}, {1.0}, {q},
                                           qcalc::DefaultGrids::range_zs(alpha, q), tmpl, strat);
            rows.insert(rows.end(), part.begin(), part.end());
        }
    // decay grid: shared z list
    auto decay = qcalc::bounds_scan(
        qcalc::DefaultGrids::decay_alphas(), qcalc::DefaultGrids::decay_betas(),
        qcalc::DefaultGrids::decay_qs(), qcalc::DefaultGrids::decay_zs(), tmpl, strat);
    rows.insert(rows.end(), decay.begin(), decay.end());

    std::string payload = cfg.format == "json" ? qcalc::io::bounds_to_json(rows).dump(2) + "\n"
                                               : qcalc::bounds_to_csv(rows);
    std::string summary = qcalc::io::bounds_summary(rows).dump(2) + "\n";
    if (cfg.out_path.empty()) {
        std::fputs(payload.c_str(), stdout);
        std::fputs(summary.c_str(), stdout);
    } else {
        qcalc::io::write_text_file(cfg.out_path, payload);
        qcalc::io::write_text_file(cfg.out_path + ".summary.json", summary);
    }
    return kExitOk;
}

int run_solve_direct(const RunConfig& cfg) {
    if (cfg.phi_path.empty()) throw ConfigError("cli", "solve-direct", "--phi is required");
    qcalc::QContext ctx = make_context(cfg);
    qcalc::EvalStrategy strat = make_strategy(cfg);
    qcalc::SpectralModel model = load_model(cfg);
    qcalc::CoefficientField phi = qcalc::io::read_coefficient_csv(cfg.phi_path);
    if (phi.size() != model.modes())
        throw ConfigError("cli", "solve-direct", "--phi length does not match the model");
    qcalc::TimeGrid grid = qcalc::make_time_grid(cfg.horizon, ctx.q);
    qcalc::SolutionBundle bundle;
    if (cfg.alpha <= 1.0) {
        bundle = qcalc::direct_solve_suborder(cfg.alpha, phi, nullptr, model, grid, ctx, strat);
    } else {
        if (cfg.rho_path.empty())
            throw ConfigError("cli", "solve-direct", "--rho is required for alpha > 1");
        qcalc::CoefficientField rho = qcalc::io::read_coefficient_csv(cfg.rho_path);
        if (rho.size() != model.modes())
            throw ConfigError("cli", "solve-direct", "--rho length does not match the model");
        bundle = qcalc::direct_solve_superorder(cfg.alpha, phi, rho, nullptr, model, grid, ctx,
                                                strat);
    }
    try {
        bundle.residual_max = qcalc::residual_check(bundle, cfg.alpha, model, ctx);
    } catch (const qcalc::InsufficientGrid&) {
        // residual not computable on this grid; diagnostics simply omit it
    }
    nlohmann::json diag = qcalc::io::solution_diagnostics(bundle);
    auto report = qcalc::energy_estimate_report(bundle, phi, nullptr, 0.0, ctx);
    diag["energy_estimate"] = {{"lhs", report.lhs}, {"rhs", report.rhs}, {"ratio", report.ratio}};
    diag["config"] = config_to_json(cfg);
    std::string base = cfg.out_path.empty() ? "solution" : cfg.out_path;
    qcalc::io::write_text_file(base + ".solution.csv", qcalc::io::solution_to_csv(bundle));
    qcalc::io::write_text_file(base + ".diagnostics.json", diag.dump(2) + "\n");
    return kExitOk;
}

int run_solve_inverse(const RunConfig& cfg) {
    if (cfg.phi_path.empty() || cfg.rho_path.empty())
        throw ConfigError("cli", "solve-inverse", "--phi and --rho are required");
    qcalc::QContext ctx = make_context(cfg);
    qcalc::EvalStrategy strat = make_strategy(cfg);
    qcalc::SpectralModel model = load_model(cfg);
    qcalc::CoefficientField phi = qcalc::io::read_coefficient_csv(cfg.phi_path);
    qcalc::CoefficientField rho = qcalc::io::read_coefficient_csv(cfg.rho_path);
    if (phi.size() != model.modes() || rho.size() != model.modes())
        throw ConfigError("cli", "solve-inverse", "coefficient files do not match the model");
    auto [bundle, source] =
        qcalc::inverse_solve(cfg.alpha, phi, rho, cfg.horizon, model, ctx, strat);
    try {
        bundle.residual_max = qcalc::residual_check(bundle, cfg.alpha, model, ctx);
    } catch (const qcalc::InsufficientGrid&) {
    }
    nlohmann::json diag = qcalc::io::solution_diagnostics(bundle);
    auto energy = qcalc::energy_estimate_report(bundle, phi, &rho, 0.0, ctx);
    auto src_rep = qcalc::source_estimate_report(source, phi, rho, model, 0.0);
    diag["energy_estimate"] = {{"lhs", energy.lhs}, {"rhs", energy.rhs}, {"ratio", energy.ratio}};
    diag["source_estimate"] = {
        {"lhs", src_rep.lhs}, {"rhs", src_rep.rhs}, {"ratio", src_rep.ratio}};
    diag["config"] = config_to_json(cfg);
    std::string base = cfg.out_path.empty() ? "solution" : cfg.out_path;
    qcalc::io::write_text_file(base + ".solution.csv", qcalc::io::solution_to_csv(bundle));
    std::string src_csv = "k,value\n";
    for (int k = 0; k < source.size(); ++k)
        src_csv += std::to_string(k + 1) + "," + qcalc::io::fmt_double(source[k]) + "\n";
    qcalc::io::write_text_file(base + ".source.csv", src_csv);
    qcalc::io::write_text_file(base + ".diagnostics.json", diag.dump(2) + "\n");
    return kExitOk;
}

nlohmann::json checks_to_json(const std::vector<qcalc::verify::Check>& checks) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : checks) {
        nlohmann::json j;
        j["name"] = c.name;
        j["pass"] = c.pass;
        j["worst"] = c.worst;
        j["tolerance"] = c.tolerance;
        if (!c.detail.empty()) j["detail"] = c.detail;
        arr.push_back(j);
    }
    return arr;
}

int run_checks(const std::vector<qcalc::verify::Check>& checks, const RunConfig& cfg) {
    std::string payload = cfg.format == "json" ? checks_to_json(checks).dump(2) + "\n"
                                               : qcalc::verify::render_text(checks);
    write_or_print(cfg.out_path, payload);
    if (!cfg.out_path.empty()) std::fputs(qcalc::verify::render_text(checks).c_str(), stdout);
    return qcalc::verify::all_pass(checks) ? kExitOk : kExitVerifyFailed;
}

nlohmann::json error_json(const std::string& module, const std::string& op,
                          const std::string& message) {
    nlohmann::json j;
    j["error"] = {{"module", module}, {"op", op}, {"message", message}};
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    CLI::App app{"q-calculus special functions, bound verification, and fractional solvers"};
    app.require_subcommand(1);

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--q", cfg.q, "base q in (0,1)");
        sub->add_option("--eps-series", cfg.eps_series, "series tail tolerance");
        sub->add_option("--eps-product", cfg.eps_product, "product truncation tolerance");
        sub->add_option("--max-terms", cfg.max_terms, "summation length cap");
        sub->add_option("--out", cfg.out_path, "output path (stdout when omitted)");
        sub->add_option("--format", cfg.format, "csv|json")
            ->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--accelerate", cfg.accelerate,
                        "on|off: extrapolate alternating series beyond the radius")
            ->transform(
                CLI::CheckedTransformer(std::map<std::string, bool>{{"on", true}, {"off", false}}));
        sub->add_option("--echo-config", cfg.echo_config_path,
                        "write the effective configuration as JSON and continue");
    };

    CLI::App* eval = app.add_subcommand("eval", "evaluate a special function");
    eval->add_option("--fn", cfg.fn, "qnumber|qgamma|qfactorial|qexp|qpochinf|ml")->required();
    eval->add_option("--x", cfg.x, "argument")->required();
    eval->add_option("--alpha", cfg.alpha, "Mittag-Leffler alpha");
    eval->add_option("--beta", cfg.beta, "Mittag-Leffler beta");
    add_common(eval);

    CLI::App* scan = app.add_subcommand("bounds-scan", "run the default bound-verification grids");
    add_common(scan);

    CLI::App* direct = app.add_subcommand("solve-direct", "solve the direct problem (f = 0)");
    direct->add_option("--alpha", cfg.alpha, "fractional order in (0,2)")->required();
    direct->add_option("--T", cfg.horizon, "time horizon");
    direct->add_option("--modes", cfg.modes, "mode truncation K");
    direct->add_option("--model", cfg.model, "builtin:dirichlet-sine | file:PATH");
    direct->add_option("--mass-shift", cfg.mass_shift, "mass shift m > 0");
    direct->add_option("--phi", cfg.phi_path, "initial data coefficients (k,value)");
    direct->add_option("--rho", cfg.rho_path, "first-derivative data, required for alpha > 1");
    add_common(direct);

    CLI::App* inverse = app.add_subcommand("solve-inverse", "recover the time-independent source");
    inverse->add_option("--alpha", cfg.alpha, "fractional order in (0,1)")->required();
    inverse->add_option("--T", cfg.horizon, "final time");
    inverse->add_option("--modes", cfg.modes, "mode truncation K");
    inverse->add_option("--model", cfg.model, "builtin:dirichlet-sine | file:PATH");
    inverse->add_option("--mass-shift", cfg.mass_shift, "mass shift m > 0");
    inverse->add_option("--phi", cfg.phi_path, "initial data coefficients");
    inverse->add_option("--rho", cfg.rho_path, "final data coefficients");
    add_common(inverse);

    CLI::App* verify = app.add_subcommand("verify", "run the full invariant suite");
    add_common(verify);

    CLI::App* selftest = app.add_subcommand("selftest", "run the fixed-value fixtures");
    add_common(selftest);

    std::vector<std::string> raw(argv + 1, argv + argc);
    try {
        std::vector<std::string> merged = merge_config_args(raw);
        std::vector<const char*> cargs;
        cargs.push_back(argv[0]);
        for (const std::string& a : merged) cargs.push_back(a.c_str());
        try {
            app.parse(static_cast<int>(cargs.size()), const_cast<char**>(cargs.data()));
        } catch (const CLI::ParseError& e) {
            if (e.get_exit_code() == 0) return app.exit(e);  // --help
            std::cerr << error_json("cli", "parse", e.what()).dump() << "\n";
            return kExitConfig;
        }
        if (eval->parsed()) cfg.command = "eval";
        if (scan->parsed()) cfg.command = "bounds-scan";
        if (direct->parsed()) cfg.command = "solve-direct";
        if (inverse->parsed()) cfg.command = "solve-inverse";
        if (verify->parsed()) cfg.command = "verify";
        if (selftest->parsed()) cfg.command = "selftest";
        if (!cfg.echo_config_path.empty())
            qcalc::io::write_text_file(cfg.echo_config_path, config_to_json(cfg).dump(2) + "\n");

        if (cfg.command == "eval") return run_eval(cfg);
        if (cfg.command == "bounds-scan") return run_bounds_scan(cfg);
        if (cfg.command == "solve-direct") return run_solve_direct(cfg);
        if (cfg.command == "solve-inverse") return run_solve_inverse(cfg);
        if (cfg.command == "verify") return run_checks(qcalc::verify::run_invariants(), cfg);
        if (cfg.command == "selftest") return run_checks(qcalc::verify::run_selftest(), cfg);
        throw ConfigError("cli", "parse", "no subcommand selected");
    } catch (const ConfigError& e) {
        std::cerr << error_json(e.module(), e.op(), e.what()).dump() << "\n";
        return kExitConfig;
    } catch (const qcalc::InvalidArgument& e) {
        std::cerr << error_json(e.module(), e.op(), e.what()).dump() << "\n";
        return kExitConfig;
    } catch (const qcalc::IoError& e) {
        std::cerr << error_json(e.module(), e.op(), e.what()).dump() << "\n";
        return kExitIo;
    } catch (const qcalc::Error& e) {
        std::cerr << error_json(e.module(), e.op(), e.what()).dump() << "\n";
        return kExitCompute;
    } catch (const std::exception& e) {
        std::cerr << error_json("cli", "run", e.what()).dump() << "\n";
        return kExitCompute;
    }
}
