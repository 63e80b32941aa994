#include "paneitz/spline.hpp"

#include <algorithm>
#include <stdexcept>

#include "paneitz/band_matrix.hpp"

namespace paneitz {

CubicSpline::CubicSpline(std::span<const double> x, std::span<const double> y)
    : x_(x.begin(), x.end()), y_(y.begin(), y.end()), m_(x.size(), 0.0) {
    const int n = static_cast<int>(x_.size());
    if (n < 4 || y_.size() != x_.size()) throw std::invalid_argument("CubicSpline: need at least 4 knots");
    for (int i = 1; i < n; ++i)
        if (!(x_[i] > x_[i - 1])) throw std::invalid_argument("CubicSpline: abscissae must increase strictly");

    std::vector<double> h(n - 1);
    for (int i = 0; i + 1 < n; ++i) h[i] = x_[i + 1] - x_[i];

    // Rows 0 and n-1 carry the not-a-knot conditions (third derivative
    // continuous across x_1 and x_{n-2}); they reach two columns off-diagonal.
    BandMatrix<double> a(n, 2, 2);
    std::vector<double> rhs(n, 0.0);
    a(0, 0) = h[1];
    a(0, 1) = -(h[0] + h[1]);
    a(0, 2) = h[0];
    for (int i = 1; i + 1 < n; ++i) {
        a(i, i - 1) = h[i - 1];
        a(i, i) = 2.0 * (h[i - 1] + h[i]);
        a(i, i + 1) = h[i];
        rhs[i] = 6.0 * ((y_[i + 1] - y_[i]) / h[i] - (y_[i] - y_[i - 1]) / h[i - 1]);
    }
    a(n - 1, n - 3) = h[n - 2];
    a(n - 1, n - 2) = -(h[n - 3] + h[n - 2]);
    a(n - 1, n - 1) = h[n - 3];
    m_ = BandLU<double>(a).solve(rhs);
}

std::size_t CubicSpline::interval(double t) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), t);
    std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    return std::min(i, x_.size() - 2);
}

double CubicSpline::value(double t) const {
    const std::size_t i = interval(t);
    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - t) / h, b = (t - x_[i]) / h;
    return a * y_[i] + b * y_[i + 1] + ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
}

double CubicSpline::derivative(double t) const {
    const std::size_t i = interval(t);
    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - t) / h, b = (t - x_[i]) / h;
    return (y_[i + 1] - y_[i]) / h + ((1.0 - 3.0 * a * a) * m_[i] + (3.0 * b * b - 1.0) * m_[i + 1]) * h / 6.0;
}

}  // namespace paneitz
