#include "paneitz/discretize.hpp"

#include <lapacke.h>

#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace paneitz {

double Grid::volume() const { return std::accumulate(w.begin(), w.end(), 0.0); }

Grid build_grid(const FoliationProfile& p, int N) {
    if (N < 16) throw std::invalid_argument("build_grid: N must be >= 16, got " + std::to_string(N));
    if (!(p.D > 0)) throw std::invalid_argument("build_grid: profile has no interval length");
    Grid g;
    g.N = N;
    g.D = p.D;
    g.dt = p.D / N;
    g.t.resize(N);
    g.w.resize(N);
    g.a_edge.assign(N + 1, 0.0);
    for (int j = 0; j < N; ++j) {
        g.t[j] = (j + 0.5) * g.dt;
        g.w[j] = p.area(g.t[j]) * g.dt;
        if (!(g.w[j] > 0) || !std::isfinite(g.w[j]))
            throw std::invalid_argument("build_grid: non-positive weight at t=" + std::to_string(g.t[j]));
    }
    for (int j = 1; j < N; ++j) g.a_edge[j] = p.area(j * g.dt);
    return g;
}

BandMatrix<double> assemble_laplacian(const Grid& g) { return assemble_laplacian_as<double>(g); }

DiscreteOperator::DiscreteOperator(Grid grid, PaneitzCoefficients coeffs)
    : grid_(std::move(grid)), coeffs_(coeffs) {
    if (!(coeffs_.alpha > 0) || !(coeffs_.beta > 0))
        throw std::invalid_argument("assemble_paneitz: requires alpha > 0 and beta > 0");
    lap_ = assemble_laplacian_as<double>(grid_);
    // Assemble B in extended precision so its entries round once.
    B_ = paneitz_matrix_as<Extended>(assemble_laplacian_as<Extended>(grid_), coeffs_.alpha, coeffs_.beta)
             .cast<double>();
    B_norm_ = B_.max_abs();
    B_lu_ = std::make_shared<const BandLU<double>>(B_);
    if (coeffs_.factors) {
        BandMatrix<double> f1(grid_.N, 1, 1), f2(grid_.N, 1, 1);
        for (int i = 0; i < grid_.N; ++i)
            for (int j = std::max(0, i - 1); j <= std::min(grid_.N - 1, i + 1); ++j) f1(i, j) = f2(i, j) = -lap_(i, j);
        for (int i = 0; i < grid_.N; ++i) {
            f1(i, i) += coeffs_.factors->c1;
            f2(i, i) += coeffs_.factors->c2;
        }
        factor1_lu_ = std::make_shared<const BandLU<double>>(f1);
        factor2_lu_ = std::make_shared<const BandLU<double>>(f2);
    }
}

std::vector<double> DiscreteOperator::solve(std::span<const double> y) const {
    if (static_cast<int>(y.size()) != grid_.N) throw std::invalid_argument("solve: dimension mismatch");
    return B_lu_->solve(y);
}

std::vector<double> DiscreteOperator::solve_factored(std::span<const double> y) const {
    if (!factor1_lu_) throw std::logic_error("solve_factored: alpha^2 < 4 beta, no real factorization");
    if (static_cast<int>(y.size()) != grid_.N) throw std::invalid_argument("solve_factored: dimension mismatch");
    auto z = factor1_lu_->solve(y);
    factor2_lu_->solve_in_place(z);
    return z;
}

BandMatrix<Extended> DiscreteOperator::B_extended() const {
    return paneitz_matrix_as<Extended>(assemble_laplacian_as<Extended>(grid_), coeffs_.alpha, coeffs_.beta);
}

DiscreteOperator assemble_paneitz(const Grid& g, const PaneitzCoefficients& c) { return DiscreteOperator(g, c); }

Eigenbasis eigenbasis(const Grid& g, int m) {
    if (m < 1 || m > g.N) throw std::invalid_argument("eigenbasis: m must lie in [1, N]");
    const int n = g.N;
    // diag(w)^{1/2} (-lap) diag(w)^{-1/2} is symmetric tridiagonal
    std::vector<double> d(n), e(n, 0.0);
    for (int j = 0; j < n; ++j) d[j] = (g.a_edge[j] + g.a_edge[j + 1]) / (g.w[j] * g.dt);
    for (int j = 0; j + 1 < n; ++j) e[j] = -g.a_edge[j + 1] / (g.dt * std::sqrt(g.w[j] * g.w[j + 1]));

    std::vector<double> values(n), z(static_cast<std::size_t>(n) * m);
    std::vector<lapack_int> support(2 * static_cast<std::size_t>(m));
    lapack_int found = 0;
    const lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', 'I', n, d.data(), e.data(), 0.0, 0.0, 1, m, 0.0,
                                           &found, values.data(), z.data(), n, support.data());
    if (info != 0 || found != m) throw std::runtime_error("eigenbasis: LAPACK dstevr failed, info=" + std::to_string(info));

    Eigenbasis basis;
    basis.values.assign(values.begin(), values.begin() + m);
    basis.vectors.resize(m);
    const double volume = g.volume();
    for (int k = 0; k < m; ++k) {
        auto& v = basis.vectors[k];
        v.resize(n);
        if (k == 0) {
            // the kernel is known exactly
            basis.values[0] = 0.0;
            std::fill(v.begin(), v.end(), 1.0 / std::sqrt(volume));
            continue;
        }
        for (int j = 0; j < n; ++j) v[j] = z[static_cast<std::size_t>(k) * n + j] / std::sqrt(g.w[j]);
        for (int i = 0; i < k; ++i) {
            const double c = dot_w<double>(g, v, basis.vectors[i]);
            for (int j = 0; j < n; ++j) v[j] -= c * basis.vectors[i][j];
        }
        double norm = norm_w<double>(g, v);
        if (v[0] < 0) norm = -norm;  // sign convention: positive at the M0 end
        for (double& x : v) x /= norm;
    }
    return basis;
}

void project_out(const Grid& g, const Eigenbasis& basis, int count, std::span<double> u) {
    if (count > basis.size()) throw std::invalid_argument("project_out: basis too small");
    for (int i = 0; i < count; ++i) {
        const auto& e = basis.vectors[i];
        const double c = dot_w<double>(g, u, e);
        for (int j = 0; j < g.N; ++j) u[j] -= c * e[j];
    }
}

void write_operator_csv(std::ostream& os, const BandMatrix<double>& m) {
    os << "row,col,value\n";
    os.precision(17);
    for (int i = 0; i < m.size(); ++i)
        for (int j = std::max(0, i - m.lower()); j <= std::min(m.size() - 1, i + m.upper()); ++j)
            os << i << ',' << j << ',' << m(i, j) << '\n';
}

void write_eigenpairs_csv(std::ostream& os, const Grid& g, const Eigenbasis& basis) {
    os << "index,eigenvalue";
    for (int j = 0; j < g.N; ++j) os << ",u" << j;
    os << '\n';
    os.precision(17);
    for (int k = 0; k < basis.size(); ++k) {
        os << k << ',' << basis.values[k];
        for (double x : basis.vectors[k]) os << ',' << x;
        os << '\n';
    }
}

}  // namespace paneitz
