#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "paneitz/blowup.hpp"
#include "paneitz/geometry.hpp"

namespace paneitz::cli {

namespace fs = std::filesystem;

namespace {

struct ValidationFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <class T>
Json optional_json(const std::optional<T>& v) {
    return v ? Json(*v) : Json(nullptr);
}

}  // namespace

Json RunConfig::canonical() const {
    return {{"command", command},
            {"profile", profile},
            {"n", n},
            {"k", optional_json(k)},
            {"m0", m0},
            {"m1", m1},
            {"D", D},
            {"alpha", optional_json(alpha)},
            {"beta", optional_json(beta)},
            {"einstein", optional_json(einstein)},
            {"q", q},
            {"N", N},
            {"max_iter", solver.max_iter},
            {"tol_residual", solver.tol_residual},
            {"newton_damping", solver.newton_damping},
            {"mpa_path_points", solver.mpa_path_points},
            {"mpa_step", solver.mpa_step},
            {"mpa_handoff", solver.mpa_handoff},
            {"dm_max_m", solver.dm_max_m},
            {"dm_restarts", solver.dm_restarts},
            {"dm_tol", solver.dm_tol},
            {"dm_max_iter", solver.dm_max_iter},
            {"seed", solver.seed},
            {"direction", direction},
            {"e_scale", e_scale},
            {"trials", trials},
            {"s", s},
            {"gamma_min", gamma_min},
            {"gamma_max", gamma_max},
            {"gamma_count", gamma_count},
            {"R_max", R_max},
            {"shoot_tol", shoot_tol},
            {"trace_gamma", optional_json(trace_gamma)}};
}

std::vector<std::string> validate(const RunConfig& cfg) {
    std::vector<std::string> issues;
    if (!(cfg.q > 1)) issues.push_back("q = " + std::to_string(cfg.q) + ": the equation requires q > 1");
    if (cfg.N < 16) issues.push_back("N = " + std::to_string(cfg.N) + ": grid requires N >= 16");
    const bool needs_coefficients =
        cfg.command == "solve" || cfg.command == "sweep-dm" || cfg.command == "probe-embedding";
    if (cfg.command == "coefficients") {
        if (!cfg.einstein) issues.push_back("coefficients requires --sc (scalar curvature)");
        else if (!(*cfg.einstein > 0)) issues.push_back("scalar curvature requires sc > 0");
        if (cfg.n < 5) issues.push_back("coefficients requires n >= 5");
    }
    if (needs_coefficients) {
        const bool pair = cfg.alpha.has_value() && cfg.beta.has_value();
        const bool partial = cfg.alpha.has_value() != cfg.beta.has_value();
        if (cfg.einstein && (cfg.alpha || cfg.beta))
            issues.push_back("give either alpha and beta or einstein, not both");
        else if (!cfg.einstein && !pair)
            issues.push_back(partial ? "alpha and beta must be given together" : "requires alpha and beta, or einstein");
        if (cfg.einstein && !(*cfg.einstein > 0)) issues.push_back("einstein scalar curvature requires sc > 0");
        if (cfg.alpha && !(*cfg.alpha > 0)) issues.push_back("requires alpha > 0");
        if (cfg.beta && !(*cfg.beta > 0)) issues.push_back("requires beta > 0");
    }
    if (cfg.command == "solve" && cfg.direction < 0) issues.push_back("direction must be >= 0");
    if (cfg.command == "solve" && !(cfg.e_scale > 1)) issues.push_back("e_scale must be > 1 so that I(e) < 0");
    if (cfg.command == "probe-embedding" && cfg.trials < 1) issues.push_back("trials must be >= 1");
    if (cfg.command == "blowup") {
        if (cfg.s < 1) issues.push_back("blowup requires s >= 1");
        if (cfg.gamma_count < 1) issues.push_back("blowup requires gamma_count >= 1");
        if (!(cfg.R_max > 1e-3)) issues.push_back("blowup requires R_max > 1e-3");
        if (!(cfg.shoot_tol > 0)) issues.push_back("blowup requires shoot_tol > 0");
    }
    try {
        cfg.solver.validate();
    } catch (const std::invalid_argument& e) {
        issues.push_back(e.what());
    }
    return issues;
}

namespace {

FoliationProfile resolve_profile(const RunConfig& cfg) {
    const auto names = builtin_profile_names();
    if (std::find(names.begin(), names.end(), cfg.profile) != names.end())
        return builtin_profile(cfg.profile, cfg.n, cfg.k);
    if (fs::exists(cfg.profile)) {
        if (!(cfg.D > 0)) throw GeometryError("tabulated profile requires --D > 0");
        return load_profile(read_profile_csv(cfg.profile), cfg.n, cfg.m0, cfg.m1, cfg.D,
                            fs::path(cfg.profile).stem().string());
    }
    throw GeometryError("unknown profile '" + cfg.profile + "' (not a builtin name or a readable file)");
}

PaneitzCoefficients resolve_coefficients(const RunConfig& cfg) {
    if (cfg.einstein) return einstein_coefficients(cfg.n, *cfg.einstein).with_exponent(cfg.q);
    return make_coefficients(*cfg.alpha, *cfg.beta, cfg.q);
}

std::string format_double(double v) {
    std::ostringstream s;
    s << std::setprecision(12) << v;
    return s.str();
}

std::string rational_text(const Rational& r) { return r.str(); }

double rational_value(const Rational& r) { return r.convert_to<double>(); }

struct Context {
    RunConfig cfg;
    OutputHeader header;
    std::ostream& out;
    std::ostream& err;

    fs::path path(const std::string& name) const { return fs::path(cfg.out_dir) / name; }

    void write_json(const std::string& name, const std::string& key, Json body) const {
        write_text_file(path(name), with_header(header, key, std::move(body)).dump(2) + "\n");
        out << "wrote " << path(name).string() << '\n';
    }

    template <class Writer>
    void write_csv(const std::string& name, Writer&& writer) const {
        std::ostringstream s;
        write_csv_header(s, header);
        writer(s);
        write_text_file(path(name), s.str());
        out << "wrote " << path(name).string() << '\n';
    }
};

int cmd_coefficients(const Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto ec = einstein_coefficients(cfg.n, *cfg.einstein);
    auto row = [&](const std::string& name, const Rational& v) {
        ctx.out << std::left << std::setw(22) << name << std::setw(28) << rational_text(v) << format_double(rational_value(v))
                << '\n';
    };
    ctx.out << std::left << std::setw(22) << "quantity" << std::setw(28) << "exact" << "decimal" << '\n';
    row("n", Rational(cfg.n));
    row("sc", ec.sc);
    row("Q", ec.Q);
    row("alpha", ec.alpha);
    row("beta", ec.beta);
    row("alpha^2-4beta", ec.discriminant);
    row("4sc^2/(n^2(n-1)^2)", ec.closed_form);
    row("4sc^2/(n-1)^2", ec.display_without_n);
    const auto c = ec.with_exponent(cfg.q);
    if (c.factors) {
        ctx.out << std::left << std::setw(22) << "c1" << std::setw(28) << "-" << format_double(c.factors->c1) << '\n';
        ctx.out << std::left << std::setw(22) << "c2" << std::setw(28) << "-" << format_double(c.factors->c2) << '\n';
    }
    ctx.out << "alpha^2-4beta = 4sc^2/(n^2(n-1)^2): " << (ec.matches_closed_form() ? "holds" : "FAILS") << '\n';
    ctx.out << "alpha^2-4beta = 4sc^2/(n-1)^2: " << (ec.matches_display_without_n() ? "holds" : "does not hold")
            << '\n';
    const double qf = critical_exponent(cfg.n, 0);
    ctx.out << "critical exponent (m = 0): " << (std::isinf(qf) ? std::string("inf") : format_double(qf)) << '\n';
    return ok;
}

int cmd_profiles(const Context& ctx, bool explicit_profile) {
    const auto& cfg = ctx.cfg;
    std::vector<FoliationProfile> profiles;
    if (explicit_profile) {
        profiles.push_back(resolve_profile(cfg));
    } else {
        for (const auto& name : builtin_profile_names()) {
            std::optional<int> k = cfg.k;
            if (name == "sphere_subsphere" && !k) k = 1;
            profiles.push_back(builtin_profile(name, cfg.n, name == "sphere_subsphere" ? k : std::nullopt));
        }
    }
    bool all_passed = true;
    for (const auto& p : profiles) {
        const auto report = validate_profile(p, 1e-2);
        const double qf = critical_exponent(p);
        ctx.out << p.name << ": n=" << p.n << " m0=" << p.m0 << " m1=" << p.m1 << " D=" << format_double(p.D)
                << " q_f=" << (std::isinf(qf) ? std::string("inf") : format_double(qf)) << '\n';
        for (const auto& c : report.checks)
            ctx.out << "  " << (c.passed ? "pass " : "FAIL ") << c.name << " measured=" << format_double(c.measured)
                    << " expected=" << format_double(c.expected) << (c.detail.empty() ? "" : " " + c.detail) << '\n';
        all_passed = all_passed && report.passed();
        if (cfg.export_profile) ctx.write_json("profile_" + p.name + ".json", "profile", profile_to_json(p));
    }
    return all_passed ? ok : validation_error;
}

std::vector<double> end_point(const DiscreteOperator& op, const RunConfig& cfg) {
    std::vector<double> v(op.size(), 1.0);
    if (cfg.direction > 0) {
        if (cfg.direction + 1 > op.size()) throw ValidationFailure("direction exceeds the grid size");
        const auto basis = eigenbasis(op.grid(), cfg.direction + 1);
        v = basis.vectors[cfg.direction];
        const double peak = *std::max_element(v.begin(), v.end(), [](double a, double b) {
            return std::abs(a) < std::abs(b);
        });
        for (double& x : v) x /= std::abs(peak);
    }
    const double scale = cfg.e_scale * nehari_scale(op, v);
    for (double& x : v) x *= scale;
    return v;
}

int cmd_solve(const Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto profile = resolve_profile(cfg);
    const DiscreteOperator op(build_grid(profile, cfg.N), resolve_coefficients(cfg));
    const auto e = end_point(op, cfg);
    MountainPassTrace trace;
    auto record = mountain_pass(op, e, cfg.solver, &trace);
    record.task = "solve:direction=" + std::to_string(cfg.direction);
    ctx.write_json("solve_record.json", "record", record_to_json(record, op, profile.name));
    ctx.write_csv("solve_profile.csv", [&](std::ostream& s) { write_profile_csv(s, op.grid(), record); });
    ctx.out << "I=" << format_double(record.I_value) << " E=" << format_double(record.E_value)
            << " residual=" << record.residual << " sign_changes=" << record.sign_changes
            << " converged=" << (record.converged ? "yes" : "no") << '\n';
    if (!record.converged) {
        ctx.err << "solve: residual " << record.residual << " above tol_residual " << cfg.solver.tol_residual << '\n';
        return not_converged;
    }
    return ok;
}

int cmd_sweep(const Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto profile = resolve_profile(cfg);
    const DiscreteOperator op(build_grid(profile, cfg.N), resolve_coefficients(cfg));
    const auto sweep = high_energy_sweep(op, cfg.solver);

    Json levels = Json::array();
    for (const auto& level : sweep.levels) {
        levels.push_back({{"m", level.m},
                          {"d_m", level.d_m},
                          {"escaped", level.escaped},
                          {"seed_values", level.seed_values},
                          {"seed_spread", level.seed_spread},
                          {"spread_warning", level.spread_warning},
                          {"raw", record_to_json(level.raw, op, profile.name)},
                          {"refined", record_to_json(level.refined, op, profile.name)}});
        if (level.spread_warning)
            ctx.err << "warning: d_" << level.m << " seed spread " << level.seed_spread << " exceeds 1%\n";
    }
    Json records = Json::array();
    for (const auto& r : sweep.records) records.push_back(record_to_json(r, op, profile.name));
    ctx.write_json("sweep_records.json", "sweep", {{"levels", levels}, {"records", records}});
    ctx.write_csv("sweep_summary.csv", [&](std::ostream& s) { write_sweep_summary_csv(s, sweep); });

    ctx.out << std::left << std::setw(4) << "m" << std::setw(18) << "d_m" << std::setw(18) << "I" << std::setw(14)
            << "residual" << "sign_changes" << '\n';
    for (const auto& level : sweep.levels)
        ctx.out << std::left << std::setw(4) << level.m << std::setw(18) << format_double(level.d_m) << std::setw(18)
                << format_double(level.refined.I_value) << std::setw(14) << level.refined.residual
                << level.refined.sign_changes << '\n';
    const bool any = std::any_of(sweep.records.begin(), sweep.records.end(),
                                 [](const SolutionRecord& r) { return r.converged && !r.trivial; });
    if (!any) {
        ctx.err << "sweep-dm: no refined record reached tol_residual\n";
        return not_converged;
    }
    return ok;
}

int cmd_blowup(const Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto table = oscillation_sweep(cfg.s, cfg.q, uniform_grid(cfg.gamma_min, cfg.gamma_max, cfg.gamma_count),
                                         cfg.R_max, cfg.shoot_tol, cfg.solver.jobs);
    ctx.write_csv("blowup_sweep.csv", [&](std::ostream& s) { write_sweep_csv(s, table); });
    if (cfg.trace_gamma) {
        ShootOptions opts;
        opts.record_steps = true;
        const auto shot = shoot(cfg.s, cfg.q, *cfg.trace_gamma, cfg.R_max, cfg.shoot_tol, opts);
        ctx.write_csv("blowup_trace.csv", [&](std::ostream& s) { write_trace_csv(s, shot); });
    }
    const double threshold = cfg.s > 4 ? (cfg.s + 4.0) / (cfg.s - 4.0) : INFINITY;
    ctx.out << "s=" << cfg.s << " q=" << format_double(cfg.q) << " (s+4)/(s-4)="
            << (std::isinf(threshold) ? std::string("inf") : format_double(threshold)) << " R_max=" << cfg.R_max
            << '\n';
    for (auto c : {ShotClass::sign_change, ShotClass::blow_up, ShotClass::positive_to_horizon,
                   ShotClass::integration_failure})
        ctx.out << to_string(c) << " fraction " << format_double(table.fraction(c)) << '\n';
    return ok;
}

int cmd_probe(const Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto profile = resolve_profile(cfg);
    const DiscreteOperator op(build_grid(profile, cfg.N), resolve_coefficients(cfg));
    const std::vector<double> one(op.size(), 1.0);
    const double value = embedding_constant_probe(op, cfg.trials, cfg.solver.seed);
    ctx.out << "ratio at u=1: " << format_double(lq_ratio(op, one)) << '\n';
    ctx.out << "embedding constant lower bound (" << cfg.trials << " trials): " << format_double(value) << '\n';
    return ok;
}

std::string flag_name(const std::string& key) {
    std::string f = key;
    std::replace(f.begin(), f.end(), '_', '-');
    return "--" + f;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    std::string config_path;
    std::map<std::string, std::function<void(const Json&)>> setters;

    CLI::App app{"paneitz-lab: f-invariant solutions of the Paneitz-type equation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", tool_version());

    auto bind = [&](CLI::App* sub, const std::string& key, auto& target, const std::string& help) {
        sub->add_option(flag_name(key), target, help);
        setters[key] = [&target](const Json& j) {
            using T = std::remove_reference_t<decltype(target)>;
            if constexpr (requires { typename T::value_type; } && !std::is_same_v<T, std::string>) {
                if (j.is_null()) target.reset();
                else target = j.get<typename T::value_type>();
            } else {
                target = j.get<T>();
            }
        };
    };
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config; flags override its fields");
        bind(sub, "out", cfg.out_dir, "output directory (env PANEITZ_LAB_OUT overrides the config file)");
        bind(sub, "q", cfg.q, "exponent q > 1");
    };
    auto add_geometry = [&](CLI::App* sub) {
        bind(sub, "profile", cfg.profile, "builtin profile name or a CSV table with header t,logA");
        bind(sub, "n", cfg.n, "ambient dimension");
        bind(sub, "k", cfg.k, "sub-sphere dimension for sphere_subsphere");
        bind(sub, "m0", cfg.m0, "focal dimension at t = 0 (tabulated profiles)");
        bind(sub, "m1", cfg.m1, "focal dimension at t = D (tabulated profiles)");
        bind(sub, "D", cfg.D, "interval length (tabulated profiles)");
    };
    auto add_operator = [&](CLI::App* sub) {
        add_geometry(sub);
        bind(sub, "alpha", cfg.alpha, "coefficient of -Laplacian");
        bind(sub, "beta", cfg.beta, "zeroth-order coefficient");
        bind(sub, "einstein", cfg.einstein, "derive alpha, beta from an Einstein metric with this scalar curvature");
        bind(sub, "N", cfg.N, "grid cells");
        bind(sub, "seed", cfg.solver.seed, "seed for all random starts");
        bind(sub, "jobs", cfg.solver.jobs, "worker threads");
    };
    auto add_solver = [&](CLI::App* sub) {
        bind(sub, "max_iter", cfg.solver.max_iter, "iteration cap for Newton and the path phase");
        bind(sub, "tol_residual", cfg.solver.tol_residual, "residual tolerance");
        bind(sub, "newton_damping", cfg.solver.newton_damping, "initial Newton step in (0, 1]");
        bind(sub, "mpa_path_points", cfg.solver.mpa_path_points, "mountain-pass path nodes");
        bind(sub, "mpa_step", cfg.solver.mpa_step, "relative cap on a path move");
        bind(sub, "mpa_handoff", cfg.solver.mpa_handoff, "relative gradient at which Newton takes over");
        bind(sub, "dm_max_m", cfg.solver.dm_max_m, "largest m in the d_m sweep");
        bind(sub, "dm_restarts", cfg.solver.dm_restarts, "seeded restarts per d_m");
        bind(sub, "dm_tol", cfg.solver.dm_tol, "relative stopping tolerance of the d_m ascent");
        bind(sub, "dm_max_iter", cfg.solver.dm_max_iter, "iteration cap of the d_m ascent");
    };

    auto* coefficients = app.add_subcommand("coefficients", "Einstein coefficient table in exact arithmetic");
    add_common(coefficients);
    bind(coefficients, "n", cfg.n, "ambient dimension");
    bind(coefficients, "einstein", cfg.einstein, "scalar curvature");
    coefficients->add_option("--sc", cfg.einstein, "scalar curvature (alias of --einstein)");

    auto* profiles = app.add_subcommand("profiles", "list or validate foliation profiles");
    add_common(profiles);
    add_geometry(profiles);
    profiles->add_flag("--export", cfg.export_profile, "write profile JSON to the output directory");

    auto* solve = app.add_subcommand("solve", "mountain pass followed by Newton");
    add_common(solve);
    add_operator(solve);
    add_solver(solve);
    bind(solve, "direction", cfg.direction, "0: constant end point; d >= 1: eigenvector d+1");
    bind(solve, "e_scale", cfg.e_scale, "end point e = e_scale * a(v) * v");

    auto* sweep = app.add_subcommand("sweep-dm", "d_m levels and Newton-refined minimizers");
    add_common(sweep);
    add_operator(sweep);
    add_solver(sweep);

    auto* blowup = app.add_subcommand("blowup", "radial shooting sweep for Delta^2 w = w^q");
    add_common(blowup);
    bind(blowup, "s", cfg.s, "effective dimension");
    bind(blowup, "gamma_min", cfg.gamma_min, "smallest w''(0)");
    bind(blowup, "gamma_max", cfg.gamma_max, "largest w''(0)");
    bind(blowup, "gamma_count", cfg.gamma_count, "number of shots");
    bind(blowup, "R_max", cfg.R_max, "horizon");
    bind(blowup, "shoot_tol", cfg.shoot_tol, "integrator tolerance");
    bind(blowup, "trace_gamma", cfg.trace_gamma, "also dump the trace of this shot");
    bind(blowup, "jobs", cfg.solver.jobs, "worker threads");

    auto* probe = app.add_subcommand("probe-embedding", "lower bound for the discrete embedding constant");
    add_common(probe);
    add_operator(probe);
    bind(probe, "trials", cfg.trials, "ascent runs");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::CallForVersion&) {
        out << tool_version() << '\n';
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return validation_error;
    }

    CLI::App* active = app.get_subcommands().front();
    cfg.command = active->get_name();

    bool explicit_profile = active->get_option_no_throw("--profile") && active->count("--profile") > 0;
    const bool out_given = active->get_option("--out")->count() > 0;
    try {
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw ValidationFailure("cannot read config file " + config_path);
            Json file;
            try {
                file = Json::parse(in);
            } catch (const Json::parse_error& e) {
                throw ValidationFailure(std::string("config is not valid JSON: ") + e.what());
            }
            if (!file.is_object()) throw ValidationFailure("config must be a JSON object");
            for (const auto& [key, value] : file.items()) {
                if (key == "command") continue;
                const std::string flag = key == "sc" ? "--sc" : flag_name(key);
                const auto it = setters.find(key == "sc" ? "einstein" : key);
                if (it == setters.end()) throw ValidationFailure("unknown config key '" + key + "'");
                auto* option = active->get_option_no_throw(flag);
                if (option && option->count() > 0) continue;  // flags win
                if (auto* alias = active->get_option_no_throw("--sc"); key == "einstein" && alias && alias->count() > 0) continue;
                try {
                    it->second(value);
                } catch (const Json::exception& e) {
                    throw ValidationFailure("config key '" + key + "' has the wrong type");
                }
                if (key == "profile") explicit_profile = true;
            }
        }
        if (!out_given) {
            if (const char* env = std::getenv("PANEITZ_LAB_OUT"); env && *env) cfg.out_dir = env;
        }
        const auto issues = validate(cfg);
        if (!issues.empty()) {
            for (const auto& issue : issues) err << "error: " << issue << '\n';
            return validation_error;
        }

        const Context ctx{cfg, make_header(cfg.canonical()), out, err};
        if (cfg.command == "coefficients") return cmd_coefficients(ctx);
        if (cfg.command == "profiles") return cmd_profiles(ctx, explicit_profile);
        if (cfg.command == "solve") return cmd_solve(ctx);
        if (cfg.command == "sweep-dm") return cmd_sweep(ctx);
        if (cfg.command == "blowup") return cmd_blowup(ctx);
        if (cfg.command == "probe-embedding") return cmd_probe(ctx);
        err << "error: unknown command " << cfg.command << '\n';
        return validation_error;
    } catch (const ValidationFailure& e) {
        err << "error: " << e.what() << '\n';
        return validation_error;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return validation_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return runtime_failure;
    }
}

}  // namespace paneitz::cli
