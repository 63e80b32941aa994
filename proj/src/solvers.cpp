#include "paneitz/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "paneitz/parallel.hpp"

namespace paneitz {

void SolverConfig::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw std::invalid_argument(std::string("SolverConfig: ") + what);
    };
    require(max_iter >= 1, "max_iter must be >= 1");
    require(tol_residual > 0, "tol_residual must be > 0");
    require(newton_damping > 0 && newton_damping <= 1, "newton_damping must lie in (0, 1]");
    require(mpa_path_points >= 3, "mpa_path_points must be >= 3");
    require(mpa_step > 0, "mpa_step must be > 0");
    require(mpa_handoff > 0, "mpa_handoff must be > 0");
    require(dm_max_m >= 0, "dm_max_m must be >= 0");
    require(dm_restarts >= 1, "dm_restarts must be >= 1");
    require(dm_tol > 0, "dm_tol must be > 0");
    require(dm_max_iter >= 1, "dm_max_iter must be >= 1");
    require(jobs >= 1, "jobs must be >= 1");
}

// ---------------------------------------------------------------- Newton

SolutionRecord newton_refine(const DiscreteOperator& op, std::span<const Extended> u0, const SolverConfig& cfg,
                             NewtonTrace* trace) {
    require_size(op, u0.size(), "newton_refine");
    for (const Extended& x : u0)
        if (!std::isfinite(static_cast<double>(x))) throw std::invalid_argument("newton_refine: u0 must be finite");

    const double q = op.coeffs().q;
    const int n = op.size();
    const BandMatrix<Extended> b = op.B_extended();
    const Extended shift = Extended(1e-8 * op.B_norm());
    // keep iterating past tol_residual while quadratic convergence lasts
    const double polish = cfg.tol_residual * 1e-6;

    std::vector<Extended> u(u0.begin(), u0.end());
    std::vector<Extended> f = gradient_I<Extended>(op, u);
    double r = static_cast<double>(norm_w<Extended>(op.grid(), f));
    std::vector<Extended> best = u;
    double best_r = r;
    if (trace) trace->residuals.push_back(r);

    int iterations = 0;
    while (iterations < cfg.max_iter && r > polish) {
        BandMatrix<Extended> jac = b;
        for (int j = 0; j < n; ++j) jac(j, j) -= Extended(q) * pow_value(abs_value(u[j]), q - 1.0);
        std::optional<BandLU<Extended>> lu;
        try {
            lu.emplace(jac, 1e-30);
        } catch (const SingularMatrix&) {
            for (int j = 0; j < n; ++j) jac(j, j) += shift;
            lu.emplace(jac);
            if (trace) ++trace->shifted_steps;
        }
        std::vector<Extended> du(n);
        for (int j = 0; j < n; ++j) du[j] = -f[j];
        lu->solve_in_place(du);

        double step = cfg.newton_damping;
        bool accepted = false;
        std::vector<Extended> trial(n), f_trial;
        double r_trial = 0;
        while (step >= 1e-6) {
            for (int j = 0; j < n; ++j) trial[j] = u[j] + Extended(step) * du[j];
            f_trial = gradient_I<Extended>(op, trial);
            r_trial = static_cast<double>(norm_w<Extended>(op.grid(), f_trial));
            if (r_trial < (1.0 - 1e-4 * step) * r) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        ++iterations;
        if (!accepted) break;
        u.swap(trial);
        f.swap(f_trial);
        r = r_trial;
        if (trace) trace->residuals.push_back(r);
        if (r < best_r) {
            best_r = r;
            best = u;
        }
    }
    return make_record(op, best, "newton", iterations, cfg.tol_residual);
}

SolutionRecord newton_refine(const DiscreteOperator& op, std::span<const double> u0, const SolverConfig& cfg,
                             NewtonTrace* trace) {
    const auto x = to_extended(u0);
    return newton_refine(op, std::span<const Extended>(x), cfg, trace);
}

// ---------------------------------------------------------- mountain pass

namespace {

double b_norm(const DiscreteOperator& op, std::span<const double> u) {
    return std::sqrt(std::max(0.0, op.quadratic_form<double>(u)));
}

// u - B^{-1}(|u|^{q-1}u): the gradient of I in the B inner product.
std::vector<double> sobolev_gradient(const DiscreteOperator& op, std::span<const double> u) {
    const double q = op.coeffs().q;
    std::vector<double> nl(u.size());
    for (std::size_t j = 0; j < u.size(); ++j) nl[j] = odd_power(u[j], q);
    auto g = op.solve(nl);
    for (std::size_t j = 0; j < u.size(); ++j) g[j] = u[j] - g[j];
    return g;
}

double b_distance(const DiscreteOperator& op, std::span<const double> a, std::span<const double> b) {
    std::vector<double> d(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) d[j] = a[j] - b[j];
    return b_norm(op, d);
}

}  // namespace

SolutionRecord mountain_pass(const DiscreteOperator& op, std::span<const double> e, const SolverConfig& cfg,
                             MountainPassTrace* trace) {
    cfg.validate();
    require_size(op, e.size(), "mountain_pass");
    const double end_value = functional_I<double>(op, e);
    if (!(end_value < 0)) throw std::invalid_argument("mountain_pass: requires I(e) < 0");

    const int initial = cfg.mpa_path_points;
    const int capacity = 4 * initial;
    std::vector<std::vector<double>> nodes(initial);
    std::vector<double> values(initial);
    for (int k = 0; k < initial; ++k) {
        const double s = static_cast<double>(k) / (initial - 1);
        nodes[k].resize(e.size());
        for (std::size_t j = 0; j < e.size(); ++j) nodes[k][j] = s * e[j];
        values[k] = functional_I<double>(op, nodes[k]);
    }
    const double spacing = b_norm(op, e) / (initial - 1);

    MountainPassTrace local;
    MountainPassTrace& tr = trace ? *trace : local;
    tr = MountainPassTrace{};

    auto argmax_interior = [&] {
        int best = 1;
        for (int k = 2; k + 1 < static_cast<int>(nodes.size()); ++k)
            if (values[k] > values[best]) best = k;
        return best;
    };

    int iterations = 0;
    for (; iterations < cfg.max_iter; ++iterations) {
        const int top = argmax_interior();
        tr.path_max.push_back(values[top]);
        if (!(values[top] > 0)) tr.interior_positive = false;

        const auto& u = nodes[top];
        const auto g = sobolev_gradient(op, u);
        const double g_norm = b_norm(op, g), u_norm = b_norm(op, u);
        if (g_norm <= cfg.mpa_handoff * u_norm) {
            tr.handed_off = true;
            break;
        }
        double tau = std::min(1.0, cfg.mpa_step * u_norm / g_norm);
        bool moved = false;
        std::vector<double> cand(u.size()), mid(u.size());
        double cand_value = 0;
        // the polyline through the moved node must stay below the old maximum
        auto segment_ok = [&](int other) {
            for (std::size_t j = 0; j < u.size(); ++j) mid[j] = 0.5 * (cand[j] + nodes[other][j]);
            return functional_I<double>(op, mid) <= values[top];
        };
        while (tau > 1e-12) {
            for (std::size_t j = 0; j < u.size(); ++j) cand[j] = u[j] - tau * g[j];
            cand_value = functional_I<double>(op, cand);
            if (cand_value < values[top] && segment_ok(top - 1) && segment_ok(top + 1)) {
                moved = true;
                break;
            }
            tau *= 0.5;
        }
        if (!moved) break;
        nodes[top] = std::move(cand);
        values[top] = cand_value;

        // split long segments next to the moved node
        for (int left : {top, top - 1}) {
            if (static_cast<int>(nodes.size()) >= capacity) break;
            const auto& a = nodes[left];
            const auto& b = nodes[left + 1];
            if (b_distance(op, a, b) <= 2 * spacing) continue;
            std::vector<double> half(a.size());
            for (std::size_t j = 0; j < a.size(); ++j) half[j] = 0.5 * (a[j] + b[j]);
            const double half_value = functional_I<double>(op, half);
            nodes.insert(nodes.begin() + left + 1, std::move(half));
            values.insert(values.begin() + left + 1, half_value);
        }
    }
    tr.path_points = static_cast<int>(nodes.size());

    auto record = newton_refine(op, nodes[argmax_interior()], cfg);
    record.solver = "mountain_pass+newton";
    record.iterations += iterations;
    return record;
}

// ------------------------------------------------------------------- d_m

namespace {

struct LevelSearch {
    double value = 0;
    std::vector<double> u;  // normalized to <Bu,u>_w = 1
    int iterations = 0;
    std::vector<double> seed_values;
};

// Q(a(u)u) for the Nehari scale a(u).
double level_of(const DiscreteOperator& op, std::span<const double> u) {
    const double a = nehari_scale(op, u);
    return a * a * op.quadratic_form<double>(u);
}

std::uint64_t stream_id(int m, int restart) {
    return (static_cast<std::uint64_t>(m) << 32) | static_cast<std::uint64_t>(restart);
}

LevelSearch search_level(const DiscreteOperator& op, int m, const SolverConfig& cfg, const Eigenbasis* basis,
                         const std::vector<std::vector<double>>& warm_starts, int jobs) {
    const int seeded = cfg.dm_restarts;
    const int total = seeded + static_cast<int>(warm_starts.size());
    std::vector<RatioAscent> runs(total);
    parallel_for(total, jobs, [&](int i) {
        auto start = i < seeded ? random_profile(op, cfg.seed, stream_id(m, i)) : warm_starts[i - seeded];
        require_size(op, start.size(), "dm_minimize warm start");
        runs[i] = maximize_lq_ratio(op, std::move(start), basis, m, cfg.dm_tol, cfg.dm_max_iter);
    });

    LevelSearch out;
    int best = -1;
    for (int i = 0; i < total; ++i) {
        const double v = level_of(op, runs[i].u);
        if (i < seeded) out.seed_values.push_back(v);
        if (best < 0 || v < out.value) {
            best = i;
            out.value = v;
        }
    }
    out.u = std::move(runs[best].u);
    out.iterations = runs[best].iterations;
    return out;
}

DmResult finalize_level(const DiscreteOperator& op, int m, LevelSearch search, const SolverConfig& cfg,
                        const Eigenbasis* basis) {
    DmResult r;
    r.m = m;
    r.d_m = search.value;
    r.seed_values = std::move(search.seed_values);
    if (!r.seed_values.empty()) {
        const auto [lo, hi] = std::minmax_element(r.seed_values.begin(), r.seed_values.end());
        r.seed_spread = (*hi - *lo) / *lo;
        r.spread_warning = r.seed_spread > 0.01;
    }
    const std::string task = "dm:m=" + std::to_string(m);

    const double a = nehari_scale(op, search.u);
    std::vector<Extended> on_t(search.u.size());
    for (std::size_t j = 0; j < on_t.size(); ++j) on_t[j] = Extended(a) * Extended(search.u[j]);
    r.raw = make_record(op, on_t, "dm_minimize", search.iterations, cfg.tol_residual);
    r.raw.task = task;

    // solutions satisfy <Bu,u>_w = sum |u|^{q+1} w, i.e. they sit at the ray peak
    const double peak = ray_peak_scale(op, search.u);
    std::vector<double> start(search.u.size());
    for (std::size_t j = 0; j < start.size(); ++j) start[j] = peak * search.u[j];
    r.refined = newton_refine(op, start, cfg);
    r.refined.solver = "dm_minimize+newton";
    r.refined.task = task;

    if (m > 0) {
        std::vector<double> rest = r.refined.u;
        project_out(op.grid(), *basis, m, rest);
        std::vector<double> along(rest.size());
        for (std::size_t j = 0; j < rest.size(); ++j) along[j] = r.refined.u[j] - rest[j];
        const double total = norm_w<double>(op.grid(), r.refined.u);
        r.escaped = norm_w<double>(op.grid(), along) > 1e-6 * std::max(total, 1e-300);
    }
    r.minimizer = std::move(search.u);
    return r;
}

}  // namespace

DmResult dm_minimize(const DiscreteOperator& op, int m, const SolverConfig& cfg, const Eigenbasis* basis,
                     const std::vector<std::vector<double>>& warm_starts) {
    cfg.validate();
    if (m < 0 || m >= op.size()) throw std::invalid_argument("dm_minimize: m must lie in [0, N)");
    Eigenbasis local;
    if (m > 0 && (!basis || basis->size() < m)) {
        local = eigenbasis(op.grid(), m);
        basis = &local;
    }
    auto search = search_level(op, m, cfg, basis, warm_starts, cfg.jobs);
    return finalize_level(op, m, std::move(search), cfg, basis);
}

double profile_distance(const Grid& g, std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw std::invalid_argument("profile_distance: dimension mismatch");
    std::vector<double> minus(u.size()), plus(u.size());
    for (std::size_t j = 0; j < u.size(); ++j) {
        minus[j] = u[j] - v[j];
        plus[j] = u[j] + v[j];
    }
    const double scale = std::max(norm_w<double>(g, u), norm_w<double>(g, v));
    if (scale == 0) return 0.0;
    return std::min(norm_w<double>(g, minus), norm_w<double>(g, plus)) / scale;
}

SweepResult high_energy_sweep(const DiscreteOperator& op, const SolverConfig& cfg) {
    cfg.validate();
    const int top = cfg.dm_max_m;
    if (top >= op.size()) throw std::invalid_argument("high_energy_sweep: dm_max_m must be < N");
    Eigenbasis basis;
    if (top > 0) basis = eigenbasis(op.grid(), top);

    std::vector<LevelSearch> searches(top + 1);
    parallel_for(top + 1, cfg.jobs, [&](int m) { searches[m] = search_level(op, m, cfg, &basis, {}, 1); });

    // feasible-set inclusion: the E_{m+1} minimizer is admissible for E_m
    for (int m = top - 1; m >= 0; --m) {
        auto ascent = maximize_lq_ratio(op, searches[m + 1].u, &basis, m, cfg.dm_tol, cfg.dm_max_iter);
        const double v = level_of(op, ascent.u);
        if (v < searches[m].value) {
            searches[m].value = v;
            searches[m].u = std::move(ascent.u);
            searches[m].iterations = ascent.iterations;
        }
    }

    SweepResult out;
    out.levels.resize(top + 1);
    parallel_for(top + 1, cfg.jobs,
                 [&](int m) { out.levels[m] = finalize_level(op, m, std::move(searches[m]), cfg, &basis); });

    for (const auto& level : out.levels) {
        const auto& rec = level.refined;
        const bool duplicate = std::any_of(out.records.begin(), out.records.end(), [&](const SolutionRecord& kept) {
            return profile_distance(op.grid(), kept.u, rec.u) < 1e-6;
        });
        if (!duplicate) out.records.push_back(rec);
    }
    std::stable_sort(out.records.begin(), out.records.end(),
                     [](const SolutionRecord& a, const SolutionRecord& b) { return a.I_value < b.I_value; });
    return out;
}

}  // namespace paneitz
