#include "paneitz/variational.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace paneitz {

namespace {

double positive_scale(const DiscreteOperator& op, std::span<const double> u, double factor, const char* who) {
    require_size(op, u.size(), who);
    const double p = energy<double>(op, u);
    if (!(p > 0)) throw std::invalid_argument(std::string(who) + ": u must be nonzero");
    const double q = op.coeffs().q;
    return std::pow(factor * op.quadratic_form<double>(u) / p, 1.0 / (q - 1.0));
}

}  // namespace

double nehari_scale(const DiscreteOperator& op, std::span<const double> u) {
    return positive_scale(op, u, (op.coeffs().q + 1.0) / 2.0, "nehari_scale");
}

double ray_peak_scale(const DiscreteOperator& op, std::span<const double> u) {
    return positive_scale(op, u, 1.0, "ray_peak_scale");
}

double residual(const DiscreteOperator& op, std::span<const Extended> u) {
    const auto f = gradient_I<Extended>(op, u);
    return static_cast<double>(norm_w<Extended>(op.grid(), f));
}

double residual(const DiscreteOperator& op, std::span<const double> u, std::span<const double> tail) {
    require_size(op, u.size(), "residual");
    const auto x = to_extended(u, tail);
    return residual(op, std::span<const Extended>(x));
}

int sign_changes(std::span<const double> u, double sigma) {
    double peak = 0;
    for (double x : u) peak = std::max(peak, std::abs(x));
    if (peak == 0) return 0;
    const double threshold = sigma * peak;
    int changes = 0, last = 0;
    for (double x : u) {
        if (std::abs(x) <= threshold) continue;
        const int s = x > 0 ? 1 : -1;
        if (last != 0 && s != last) ++changes;
        last = s;
    }
    return changes;
}

SolutionRecord make_record(const DiscreteOperator& op, std::span<const Extended> u, std::string solver,
                           int iterations, double tol_residual) {
    require_size(op, u.size(), "make_record");
    SolutionRecord r;
    split_extended(u, r.u, r.u_tail);
    r.residual = residual(op, u);
    r.I_value = static_cast<double>(functional_I<Extended>(op, u));
    r.E_value = static_cast<double>(energy<Extended>(op, u));
    r.sign_changes = sign_changes(r.u);
    r.solver = std::move(solver);
    r.iterations = iterations;
    r.converged = std::isfinite(r.residual) && r.residual < tol_residual;
    r.trivial = std::all_of(r.u.begin(), r.u.end(), [](double x) { return x == 0.0; }) ||
                static_cast<double>(norm_w<Extended>(op.grid(), u)) < 1e-12;
    return r;
}

double lq_ratio(const DiscreteOperator& op, std::span<const double> u) {
    const double q = op.coeffs().q;
    return std::pow(energy<double>(op, u), 1.0 / (q + 1.0)) / std::sqrt(op.quadratic_form<double>(u));
}

RatioAscent maximize_lq_ratio(const DiscreteOperator& op, std::vector<double> start, const Eigenbasis* basis,
                              int deflate, double tol, int max_iter) {
    require_size(op, start.size(), "maximize_lq_ratio");
    const double q = op.coeffs().q;
    auto project = [&](std::vector<double>& v) {
        if (basis && deflate > 0) project_out(op.grid(), *basis, deflate, v);
    };
    auto normalize = [&](std::vector<double>& v) {
        const double qf = op.quadratic_form<double>(v);
        if (!(qf > 0)) throw std::invalid_argument("maximize_lq_ratio: start vanishes on the admissible subspace");
        const double s = 1.0 / std::sqrt(qf);
        for (double& x : v) x *= s;
    };

    RatioAscent out;
    out.u = std::move(start);
    project(out.u);
    normalize(out.u);
    double p = energy<double>(op, out.u);
    std::vector<double> nl(out.u.size());
    for (out.iterations = 0; out.iterations < max_iter; ++out.iterations) {
        for (std::size_t j = 0; j < nl.size(); ++j) nl[j] = odd_power(out.u[j], q);
        auto v = op.solve(nl);
        project(v);
        normalize(v);
        const double p_new = energy<double>(op, v);
        if (!(p_new >= p)) {
            // rounding-level loss: the iteration has reached its fixed point
            out.converged = true;
            break;
        }
        out.u = std::move(v);
        const bool done = (p_new - p) <= tol * p_new;
        p = p_new;
        if (done) {
            out.converged = true;
            ++out.iterations;
            break;
        }
    }
    out.ratio = std::pow(p, 1.0 / (q + 1.0));
    return out;
}

std::vector<double> random_profile(const DiscreteOperator& op, std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> noise(op.size());
    for (double& x : noise) x = normal(rng);
    return op.solve(noise);
}

double embedding_constant_probe(const DiscreteOperator& op, int trials, std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("embedding_constant_probe: trials must be >= 1");
    double best = 0.0;
    for (int k = 0; k < trials; ++k) {
        std::vector<double> start = k == 0 ? std::vector<double>(op.size(), 1.0) : random_profile(op, seed, k);
        const auto ascent = maximize_lq_ratio(op, std::move(start), nullptr, 0, 1e-14, 20000);
        best = std::max(best, ascent.ratio);
    }
    return best;
}

}  // namespace paneitz
