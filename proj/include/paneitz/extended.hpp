#pragma once

// Quad-precision scalar used where the fourth-order operator amplifies
// double rounding beyond the solver tolerances.

#include <quadmath.h>

#include <cmath>
#include <span>
#include <vector>

namespace paneitz {

using Extended = __float128;

inline double abs_value(double x) { return std::fabs(x); }
inline Extended abs_value(Extended x) { return fabsq(x); }
inline double sqrt_value(double x) { return std::sqrt(x); }
inline Extended sqrt_value(Extended x) { return sqrtq(x); }
inline double pow_value(double x, double e) { return std::pow(x, e); }
inline Extended pow_value(Extended x, double e) { return powq(x, Extended(e)); }

// |u|^{q-1} u
template <class T>
inline T odd_power(T u, double q) {
    if (u == T(0)) return T(0);
    return pow_value(abs_value(u), q - 1.0) * u;
}

inline std::vector<Extended> to_extended(std::span<const double> u) {
    return {u.begin(), u.end()};
}

inline std::vector<Extended> to_extended(std::span<const double> hi, std::span<const double> tail) {
    std::vector<Extended> out(hi.begin(), hi.end());
    for (std::size_t i = 0; i < tail.size() && i < out.size(); ++i) out[i] += tail[i];
    return out;
}

// Splits an extended vector into its double rounding and the remainder.
inline void split_extended(std::span<const Extended> u, std::vector<double>& hi, std::vector<double>& tail) {
    hi.resize(u.size());
    tail.resize(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        hi[i] = static_cast<double>(u[i]);
        tail[i] = static_cast<double>(u[i] - Extended(hi[i]));
    }
}

}  // namespace paneitz
