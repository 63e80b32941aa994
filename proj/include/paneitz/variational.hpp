#pragma once

// The functional I(u) = 1/2 <Bu,u>_w - 1/(q+1) sum |u|^{q+1} w, its
// w-gradient, the scaling onto T = {I = 0}, and nodal diagnostics.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "paneitz/discretize.hpp"
#include "paneitz/extended.hpp"

namespace paneitz {

inline void require_size(const DiscreteOperator& op, std::size_t n, const char* who) {
    if (static_cast<int>(n) != op.size())
        throw std::invalid_argument(std::string(who) + ": dimension mismatch (" + std::to_string(n) + " vs grid " +
                                    std::to_string(op.size()) + ")");
}

/// sum |u_j|^{q+1} w_j
template <class T>
T energy(const DiscreteOperator& op, std::span<const T> u) {
    require_size(op, u.size(), "energy");
    const auto& g = op.grid();
    const double q = op.coeffs().q;
    T acc(0);
    for (int j = 0; j < g.N; ++j) acc += abs_value(odd_power(u[j], q) * u[j]) * T(g.w[j]);
    return acc;
}

template <class T>
T functional_I(const DiscreteOperator& op, std::span<const T> u) {
    require_size(op, u.size(), "functional_I");
    const double q = op.coeffs().q;
    return op.quadratic_form<T>(u) / T(2) - energy<T>(op, u) / T(q + 1);
}

/// Bu - |u|^{q-1}u, the gradient of I in the weighted product.
template <class T>
std::vector<T> gradient_I(const DiscreteOperator& op, std::span<const T> u) {
    require_size(op, u.size(), "gradient_I");
    std::vector<T> g = op.apply<T>(u);
    const double q = op.coeffs().q;
    for (std::size_t j = 0; j < u.size(); ++j) g[j] -= odd_power(u[j], q);
    return g;
}

/// a(u) with a(u) u on T: ((q+1) <Bu,u>_w / (2 sum |u|^{q+1} w))^{1/(q-1)}.
double nehari_scale(const DiscreteOperator& op, std::span<const double> u);

/// Maximizer of t -> I(t u) over t > 0: (<Bu,u>_w / sum |u|^{q+1} w)^{1/(q-1)}.
double ray_peak_scale(const DiscreteOperator& op, std::span<const double> u);

/// ||Bu - |u|^{q-1}u||_w evaluated in extended precision on u + tail.
double residual(const DiscreteOperator& op, std::span<const double> u, std::span<const double> tail = {});
double residual(const DiscreteOperator& op, std::span<const Extended> u);

/// Strict sign alternations among entries with |u_j| > sigma * max|u|.
int sign_changes(std::span<const double> u, double sigma = 1e-8);

struct SolutionRecord {
    std::vector<double> u;       // profile rounded to double
    std::vector<double> u_tail;  // u + u_tail reproduces the extended-precision iterate
    double residual = 0.0;
    double I_value = 0.0;
    double E_value = 0.0;
    int sign_changes = 0;
    std::string solver;
    int iterations = 0;
    bool converged = false;
    bool trivial = false;
    std::string task;  // provenance, e.g. "dm:m=3"

    std::vector<Extended> profile() const { return to_extended(u, u_tail); }
};

SolutionRecord make_record(const DiscreteOperator& op, std::span<const Extended> u, std::string solver,
                           int iterations, double tol_residual);

/// Normalized ascent of (sum |u|^{q+1} w)^{1/(q+1)} / <Bu,u>_w^{1/2} on the
/// w-complement of the first `deflate` basis vectors. Each step is
/// u <- P B^{-1}(|u|^{q-1}u), rescaled to <Bu,u>_w = 1; the objective never
/// decreases because sum |u|^{q+1} w is convex.
struct RatioAscent {
    std::vector<double> u;  // normalized, <Bu,u>_w = 1
    double ratio = 0.0;
    int iterations = 0;
    bool converged = false;
};

RatioAscent maximize_lq_ratio(const DiscreteOperator& op, std::vector<double> start, const Eigenbasis* basis,
                              int deflate, double tol, int max_iter);

double lq_ratio(const DiscreteOperator& op, std::span<const double> u);

/// Largest observed ratio over `trials` ascents (trial 0 starts from the
/// constant, the rest from seeded random profiles). A lower bound for the
/// discrete embedding constant.
double embedding_constant_probe(const DiscreteOperator& op, int trials, std::uint64_t seed = 1);

/// Deterministic smooth random start: B^{-1} applied to seeded white noise.
std::vector<double> random_profile(const DiscreteOperator& op, std::uint64_t seed, std::uint64_t stream);

}  // namespace paneitz
