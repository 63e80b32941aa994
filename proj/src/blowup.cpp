#include "paneitz/blowup.hpp"

#include <boost/math/tools/toms748_solve.hpp>
#include <boost/numeric/odeint.hpp>

#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>

#include "paneitz/extended.hpp"
#include "paneitz/parallel.hpp"

namespace paneitz {

namespace odeint = boost::numeric::odeint;

std::string to_string(ShotClass c) {
    switch (c) {
        case ShotClass::sign_change: return "sign_change";
        case ShotClass::blow_up: return "blow_up";
        case ShotClass::positive_to_horizon: return "positive_to_horizon";
        case ShotClass::integration_failure: return "integration_failure";
    }
    return "unknown";
}

void RadialRhs::operator()(const RadialState& y, RadialState& dy, double r) const {
    dy[0] = y[1];
    dy[1] = y[2];
    dy[2] = y[3];
    const double source = odd_power(y[0], q);
    if (s == 1 && !general_form) {
        dy[3] = source;
        return;
    }
    const double a = s - 1.0, b = (s - 1.0) * (s - 3.0);
    dy[3] = source - 2.0 * a / r * y[3] - b / (r * r) * y[2] + b / (r * r * r) * y[1];
}

RadialState taylor_start(int s, double q, double gamma, double r) {
    const double c4 = 1.0 / (8.0 * s * (s + 2.0));
    const double c6 = q * gamma / (48.0 * (s + 2.0) * (s + 4.0));
    const double r2 = r * r, r3 = r2 * r, r4 = r2 * r2, r5 = r4 * r, r6 = r3 * r3;
    return {1.0 + 0.5 * gamma * r2 + c4 * r4 + c6 * r6, gamma * r + 4 * c4 * r3 + 6 * c6 * r5,
            gamma + 12 * c4 * r2 + 30 * c6 * r4, 24 * c4 * r + 120 * c6 * r3};
}

namespace {

bool finite_state(const RadialState& y) {
    for (double v : y)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace

ShootingOutcome shoot(int s, double q, double gamma, double R_max, double tol, const ShootOptions& opts) {
    if (s < 1) throw std::invalid_argument("shoot: s must be >= 1");
    if (!(q > 1)) throw std::invalid_argument("shoot: requires q > 1");
    if (!(opts.r0 > 0) || !(R_max > opts.r0)) throw std::invalid_argument("shoot: requires 0 < r0 < R_max");
    if (!(tol > 0)) throw std::invalid_argument("shoot: tol must be > 0");
    if (!std::isfinite(gamma)) throw std::invalid_argument("shoot: gamma must be finite");

    ShootingOutcome out;
    out.s = s;
    out.q = q;
    out.gamma = gamma;

    const RadialRhs rhs{s, q};
    auto stepper = odeint::make_dense_output(tol, tol, odeint::runge_kutta_dopri5<RadialState>());
    const RadialState start = taylor_start(s, q, gamma, opts.r0);
    stepper.initialize(start, opts.r0, 1e-2 * opts.r0);

    double next_sample = opts.r0;
    auto sample_until = [&](double r_end) {
        if (!(opts.trace_spacing > 0)) return;
        RadialState y;
        while (next_sample <= r_end) {
            stepper.calc_state(next_sample, y);
            out.trace.push_back({next_sample, y});
            next_sample += opts.trace_spacing;
        }
    };
    if (opts.record_steps) out.trace.push_back({opts.r0, start});
    if (opts.trace_spacing > 0) {
        out.trace.push_back({opts.r0, start});
        next_sample += opts.trace_spacing;
    }

    auto w_at = [&](double r) {
        RadialState y;
        stepper.calc_state(r, y);
        return y[0];
    };
    auto locate = [&](auto&& f, double a, double b) {
        std::uintmax_t iterations = 200;
        const auto fa = f(a), fb = f(b);
        if (fa == 0) return a;
        if (fb == 0 || (fa > 0) == (fb > 0)) return b;
        const auto bracket =
            boost::math::tools::toms748_solve(f, a, b, fa, fb, boost::math::tools::eps_tolerance<double>(50), iterations);
        return 0.5 * (bracket.first + bracket.second);
    };

    double w_prev = start[0];
    while (true) {
        if (out.steps >= opts.max_steps) {
            out.classification = ShotClass::integration_failure;
            out.radius = stepper.current_time();
            return out;
        }
        std::pair<double, double> span;
        try {
            span = stepper.do_step(rhs);
        } catch (const odeint::odeint_error&) {
            out.classification = ShotClass::integration_failure;
            out.radius = stepper.current_time();
            return out;
        }
        ++out.steps;
        const double r_prev = span.first;
        const double r_end = std::min(span.second, R_max);
        RadialState y;
        stepper.calc_state(r_end, y);
        if (!finite_state(y) || span.second - span.first <= 1e-15 * span.second) {
            out.classification = ShotClass::integration_failure;
            out.radius = r_prev;
            return out;
        }

        if (w_prev > 0 && y[0] <= 0) {
            sample_until(r_end);
            out.classification = ShotClass::sign_change;
            out.radius = locate(w_at, r_prev, r_end);
            return out;
        }
        if (std::abs(y[0]) > opts.blowup_threshold) {
            sample_until(r_end);
            out.classification = ShotClass::blow_up;
            out.radius = locate([&](double r) { return std::abs(w_at(r)) - opts.blowup_threshold; }, r_prev, r_end);
            return out;
        }
        sample_until(r_end);
        if (opts.record_steps) out.trace.push_back({r_end, y});
        if (span.second >= R_max) {
            out.classification = ShotClass::positive_to_horizon;
            out.radius = R_max;
            return out;
        }
        w_prev = y[0];
    }
}

double OscillationTable::fraction(ShotClass c) const {
    if (outcomes.empty()) return 0.0;
    std::size_t k = 0;
    for (const auto& o : outcomes) k += o.classification == c;
    return static_cast<double>(k) / outcomes.size();
}

double OscillationTable::sign_change_fraction() const { return fraction(ShotClass::sign_change); }

OscillationTable oscillation_sweep(int s, double q, const std::vector<double>& gamma_grid, double R_max, double tol,
                                   int jobs) {
    if (gamma_grid.empty()) throw std::invalid_argument("oscillation_sweep: empty gamma grid");
    OscillationTable table;
    table.s = s;
    table.q = q;
    table.R_max = R_max;
    table.outcomes.resize(gamma_grid.size());
    parallel_for(static_cast<int>(gamma_grid.size()), jobs,
                 [&](int i) { table.outcomes[i] = shoot(s, q, gamma_grid[i], R_max, tol); });
    return table;
}

std::vector<double> uniform_grid(double lo, double hi, int count) {
    if (count < 1) throw std::invalid_argument("uniform_grid: count must be >= 1");
    if (count == 1) return {lo};
    std::vector<double> g(count);
    for (int i = 0; i < count; ++i) g[i] = lo + (hi - lo) * i / (count - 1);
    return g;
}

void write_sweep_csv(std::ostream& os, const OscillationTable& table) {
    os << "gamma,classification,radius\n";
    const auto old = os.precision(17);
    for (const auto& o : table.outcomes) os << o.gamma << ',' << to_string(o.classification) << ',' << o.radius << '\n';
    os.precision(old);
}

void write_trace_csv(std::ostream& os, const ShootingOutcome& outcome) {
    os << "r,w,w1,w2,w3\n";
    const auto old = os.precision(17);
    for (const auto& p : outcome.trace) os << p.r << ',' << p.y[0] << ',' << p.y[1] << ',' << p.y[2] << ',' << p.y[3] << '\n';
    os.precision(old);
}

}  // namespace paneitz
