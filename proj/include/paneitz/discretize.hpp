#pragma once

// Staggered-grid, flux-form discretization of the weighted Laplacian
// (1/A)(A u')' on (0, D) and of B = lap^2 - alpha lap + beta I.

#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "paneitz/band_matrix.hpp"
#include "paneitz/extended.hpp"
#include "paneitz/geometry.hpp"

namespace paneitz {

struct Grid {
    int N = 0;
    double D = 0.0;
    double dt = 0.0;
    std::vector<double> t;       // midpoints (j + 1/2) dt
    std::vector<double> w;       // quadrature weights A(t_j) dt
    std::vector<double> a_edge;  // A(j dt), j = 0..N, zero at both ends

    double volume() const;  // sum of w
};

Grid build_grid(const FoliationProfile& p, int N);

/// Weighted inner product sum u_j v_j w_j.
template <class T>
T dot_w(const Grid& g, std::span<const T> u, std::span<const T> v) {
    T acc(0);
    for (int j = 0; j < g.N; ++j) acc += u[j] * v[j] * T(g.w[j]);
    return acc;
}

template <class T>
T norm_w(const Grid& g, std::span<const T> u) {
    return sqrt_value(dot_w<T>(g, u, u));
}

/// (lap u)_j = [a_{j+1}(u_{j+1}-u_j) - a_j(u_j-u_{j-1})] / (w_j dt). Exact zero on constants.
template <class T>
void apply_laplacian(const Grid& g, std::span<const T> u, std::span<T> out) {
    const T inv_dt = T(1) / T(g.dt);
    T flux_left(0);
    for (int j = 0; j < g.N; ++j) {
        const T flux_right = j + 1 < g.N ? T(g.a_edge[j + 1]) * (u[j + 1] - u[j]) * inv_dt : T(0);
        out[j] = (flux_right - flux_left) / T(g.w[j]);
        flux_left = flux_right;
    }
}

/// Discrete Dirichlet energy -<lap u, u>_w = sum a_j (u_j - u_{j-1})^2 / dt.
template <class T>
T dirichlet_energy(const Grid& g, std::span<const T> u) {
    T acc(0);
    for (int j = 1; j < g.N; ++j) {
        const T d = u[j] - u[j - 1];
        acc += T(g.a_edge[j]) * d * d;
    }
    return acc / T(g.dt);
}

template <class T>
BandMatrix<T> assemble_laplacian_as(const Grid& g) {
    BandMatrix<T> lap(g.N, 1, 1);
    const T dt(g.dt);
    for (int j = 0; j < g.N; ++j) {
        const T scale = T(1) / (T(g.w[j]) * dt);
        if (j > 0) lap(j, j - 1) = T(g.a_edge[j]) * scale;
        if (j + 1 < g.N) lap(j, j + 1) = T(g.a_edge[j + 1]) * scale;
        lap(j, j) = -(T(g.a_edge[j]) + T(g.a_edge[j + 1])) * scale;
    }
    return lap;
}

BandMatrix<double> assemble_laplacian(const Grid& g);

template <class T>
BandMatrix<T> paneitz_matrix_as(const BandMatrix<T>& lap, double alpha, double beta) {
    BandMatrix<T> b = band_product(lap, lap);
    for (int i = 0; i < lap.size(); ++i) {
        for (int j = std::max(0, i - 1); j <= std::min(lap.size() - 1, i + 1); ++j) b(i, j) -= T(alpha) * lap(i, j);
        b(i, i) += T(beta);
    }
    return b;
}

class DiscreteOperator {
public:
    DiscreteOperator(Grid grid, PaneitzCoefficients coeffs);

    const Grid& grid() const { return grid_; }
    const PaneitzCoefficients& coeffs() const { return coeffs_; }
    int size() const { return grid_.N; }
    const BandMatrix<double>& lap() const { return lap_; }
    const BandMatrix<double>& B() const { return B_; }
    double B_norm() const { return B_norm_; }

    /// Matrix-free B u in flux form: lap(lap u) - alpha lap u + beta u.
    template <class T>
    void apply(std::span<const T> u, std::span<T> out) const {
        std::vector<T> l(u.size()), ll(u.size());
        apply_laplacian<T>(grid_, u, l);
        apply_laplacian<T>(grid_, l, ll);
        const T alpha(coeffs_.alpha), beta(coeffs_.beta);
        for (std::size_t j = 0; j < u.size(); ++j) out[j] = ll[j] - alpha * l[j] + beta * u[j];
    }

    template <class T>
    std::vector<T> apply(std::span<const T> u) const {
        std::vector<T> out(u.size());
        apply<T>(u, out);
        return out;
    }

    /// <Bu,u>_w = |lap u|_w^2 + alpha E_dir(u) + beta |u|_w^2, each term nonnegative.
    template <class T>
    T quadratic_form(std::span<const T> u) const {
        std::vector<T> l(u.size());
        apply_laplacian<T>(grid_, u, l);
        return dot_w<T>(grid_, l, l) + T(coeffs_.alpha) * dirichlet_energy<T>(grid_, u) +
               T(coeffs_.beta) * dot_w<T>(grid_, u, u);
    }

    /// Solves B x = y with the banded LU of B.
    std::vector<double> solve(std::span<const double> y) const;

    /// Two-stage solve (-lap + c1)z = y, (-lap + c2)x = z; requires alpha^2 >= 4 beta.
    std::vector<double> solve_factored(std::span<const double> y) const;

    BandMatrix<Extended> B_extended() const;

private:
    Grid grid_;
    PaneitzCoefficients coeffs_;
    BandMatrix<double> lap_;
    BandMatrix<double> B_;
    double B_norm_ = 0.0;
    std::shared_ptr<const BandLU<double>> B_lu_;
    std::shared_ptr<const BandLU<double>> factor1_lu_, factor2_lu_;
};

DiscreteOperator assemble_paneitz(const Grid& g, const PaneitzCoefficients& c);

/// First m eigenpairs of -lap, orthonormal in the weighted product.
struct Eigenbasis {
    std::vector<double> values;
    std::vector<std::vector<double>> vectors;
    int size() const { return static_cast<int>(values.size()); }
};

Eigenbasis eigenbasis(const Grid& g, int m);

/// Removes the components along the given w-orthonormal vectors.
void project_out(const Grid& g, const Eigenbasis& basis, int count, std::span<double> u);

void write_operator_csv(std::ostream& os, const BandMatrix<double>& m);
void write_eigenpairs_csv(std::ostream& os, const Grid& g, const Eigenbasis& basis);

}  // namespace paneitz
