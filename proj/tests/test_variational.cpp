#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "paneitz/variational.hpp"

using namespace paneitz;

namespace {

struct Setup {
    Grid g;
    DiscreteOperator op;
    Setup(int N, double alpha = 5.5, double beta = 6.5625, double q = 3.0)
        : g(build_grid(builtin_profile("sphere_point", 5), N)), op(g, make_coefficients(alpha, beta, q)) {}
};

double I_of(const DiscreteOperator& op, std::span<const double> u) { return functional_I<double>(op, u); }

std::vector<double> scaled(std::span<const double> u, double s) {
    std::vector<double> v(u.begin(), u.end());
    for (double& x : v) x *= s;
    return v;
}

}  // namespace

TEST_CASE("functional on constants") {
    Setup s(400);
    const double V = s.g.volume(), beta = 6.5625, q = 3;
    std::vector<double> zero(s.g.N, 0.0);
    CHECK(I_of(s.op, zero) == 0.0);
    for (double k : {0.3, 1.0, 2.0, 7.5}) {
        std::vector<double> c(s.g.N, k);
        const double expected = (0.5 * beta * k * k - std::pow(k, q + 1) / (q + 1)) * V;
        CHECK(I_of(s.op, c) == doctest::Approx(expected).epsilon(1e-12));
    }
    std::vector<double> root(s.g.N, std::sqrt(beta));
    CHECK(I_of(s.op, root) == doctest::Approx(beta * beta * V / 4).epsilon(1e-12));
    CHECK_THROWS_AS(I_of(s.op, std::vector<double>(3, 1.0)), std::invalid_argument);
}

TEST_CASE("gradient") {
    Setup s(400);
    std::vector<double> root(s.g.N, std::sqrt(6.5625));
    const auto g0 = gradient_I<double>(s.op, root);
    double worst = 0;
    for (double x : g0) worst = std::max(worst, std::abs(x));
    CHECK(worst < 1e-12);
    const auto gz = gradient_I<double>(s.op, std::vector<double>(s.g.N, 0.0));
    for (double x : gz) CHECK(x == 0.0);

    for (std::uint64_t k = 0; k < 20; ++k) {
        const auto u = random_profile(s.op, 11, k), v = random_profile(s.op, 12, k);
        const double eps = 1e-5;
        std::vector<double> up(u), um(u);
        for (int j = 0; j < s.g.N; ++j) {
            up[j] += eps * v[j];
            um[j] -= eps * v[j];
        }
        const double fd = (I_of(s.op, up) - I_of(s.op, um)) / (2 * eps);
        const double exact = dot_w<double>(s.g, gradient_I<double>(s.op, u), v);
        CHECK(std::abs(fd - exact) < 1e-6 * std::abs(exact));
    }
}

TEST_CASE("oddness is exact") {
    Setup s(200);
    for (std::uint64_t k = 0; k < 5; ++k) {
        const auto u = random_profile(s.op, 3, k);
        const auto minus = scaled(u, -1.0);
        CHECK(I_of(s.op, u) == I_of(s.op, minus));
        const auto gp = gradient_I<double>(s.op, u), gm = gradient_I<double>(s.op, minus);
        for (int j = 0; j < s.g.N; ++j) CHECK(gp[j] == -gm[j]);
    }
}

TEST_CASE("nehari scale") {
    Setup two(200, 5.5, 2.0, 3.0);
    std::vector<double> one(two.g.N, 1.0);
    CHECK(nehari_scale(two.op, one) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK_THROWS_AS(nehari_scale(two.op, std::vector<double>(two.g.N, 0.0)), std::invalid_argument);

    Setup s(400);
    for (std::uint64_t k = 0; k < 20; ++k) {
        const auto u = random_profile(s.op, 21, k);
        const double a = nehari_scale(s.op, u);
        const auto au = scaled(u, a);
        CHECK(std::abs(nehari_scale(s.op, au) - 1.0) < 1e-12);
        // a(u) u lies on T = {I = 0}
        CHECK(std::abs(I_of(s.op, au)) < 1e-10 * s.op.quadratic_form<double>(au));
        // the ray peak is the stationary point of t -> I(t u), and a(u) = ((q+1)/2)^{1/(q-1)} t*(u)
        const double peak = ray_peak_scale(s.op, u);
        CHECK(a == doctest::Approx(peak * std::sqrt(2.0)).epsilon(1e-12));
        const auto pu = scaled(u, peak);
        const double slope = dot_w<double>(s.g, gradient_I<double>(s.op, pu), pu);
        CHECK(std::abs(slope) < 1e-8 * std::abs(I_of(s.op, pu)));
    }
}

TEST_CASE("ray scan: t -> I(t u) peaks at the ray peak") {
    Setup s(400);
    for (std::uint64_t k = 0; k < 5; ++k) {
        const auto u = random_profile(s.op, 31, k);
        const double peak = ray_peak_scale(s.op, u), a = nehari_scale(s.op, u);
        const double t_max = 2 * a;
        double best_t = 0, best_value = -INFINITY;
        for (int i = 1; i <= 1000; ++i) {
            const double t = t_max * i / 1000;
            const double v = I_of(s.op, scaled(u, t));
            if (v > best_value) {
                best_value = v;
                best_t = t;
            }
        }
        CHECK(std::abs(best_t - peak) <= t_max / 1000);
        CHECK(std::abs(best_t - a) > t_max / 1000);  // a(u) is where I returns to zero, not the peak
    }
}

TEST_CASE("energy, residual and sign changes") {
    Setup s(800);
    std::vector<double> root(s.g.N, std::sqrt(6.5625));
    CHECK(residual(s.op, root) < 1e-10 * norm_w<double>(s.g, root));
    CHECK(sign_changes(root) == 0);
    CHECK(energy<double>(s.op, root) == doctest::Approx(6.5625 * 6.5625 * s.g.volume()).epsilon(1e-12));

    std::vector<double> zero(s.g.N, 0.0);
    CHECK(energy<double>(s.op, zero) == 0.0);
    CHECK(residual(s.op, zero) == 0.0);
    CHECK(sign_changes(zero) == 0);

    std::vector<double> cosine(s.g.N);
    for (int j = 0; j < s.g.N; ++j) cosine[j] = std::cos(M_PI * s.g.t[j] / s.g.D);
    CHECK(sign_changes(cosine) == 1);
    CHECK(sign_changes(std::vector<double>{1, -1e-12, 1}) == 0);  // below threshold
    CHECK(sign_changes(std::vector<double>{1, -1, 1, -1}) == 3);

    const auto rec = make_record(s.op, to_extended(root), "test", 0, 1e-8);
    CHECK(rec.converged);
    CHECK_FALSE(rec.trivial);
    CHECK(std::abs(rec.I_value - 0.25 * rec.E_value) < 1e-6 * std::max(1.0, rec.E_value));
    const auto zrec = make_record(s.op, to_extended(zero), "test", 0, 1e-8);
    CHECK(zrec.trivial);
}

TEST_CASE("embedding constant probe") {
    Setup s(300);
    std::vector<double> one(s.g.N, 1.0);
    const double at_one = lq_ratio(s.op, one);
    const double p2 = embedding_constant_probe(s.op, 2), p4 = embedding_constant_probe(s.op, 4);
    CHECK(p2 >= at_one);
    CHECK(p4 >= p2);
    CHECK_THROWS_AS(embedding_constant_probe(s.op, 0), std::invalid_argument);

    Setup coarse(500), fine(1000);
    const double a = embedding_constant_probe(coarse.op, 3), b = embedding_constant_probe(fine.op, 3);
    CHECK(std::abs(a - b) < 0.01 * b);
}

TEST_CASE("ratio ascent is monotone and respects the deflation") {
    Setup s(400);
    const auto basis = eigenbasis(s.g, 3);
    auto start = random_profile(s.op, 5, 0);
    const auto r = maximize_lq_ratio(s.op, start, &basis, 3, 1e-14, 20000);
    CHECK(r.converged);
    CHECK(s.op.quadratic_form<double>(r.u) == doctest::Approx(1.0).epsilon(1e-12));
    for (int i = 0; i < 3; ++i) CHECK(std::abs(dot_w<double>(s.g, r.u, basis.vectors[i])) < 1e-10);
    project_out(s.g, basis, 3, start);
    CHECK(r.ratio >= lq_ratio(s.op, start));
}
