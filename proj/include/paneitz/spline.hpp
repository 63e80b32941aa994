#pragma once

#include <span>
#include <vector>

namespace paneitz {

/// Not-a-knot cubic spline through (x_i, y_i), x strictly increasing, at least 4 knots.
class CubicSpline {
public:
    CubicSpline(std::span<const double> x, std::span<const double> y);

    double value(double t) const;
    double derivative(double t) const;
    double front() const { return x_.front(); }
    double back() const { return x_.back(); }

private:
    std::size_t interval(double t) const;

    std::vector<double> x_, y_, m_;  // m_: second derivatives at the knots
};

}  // namespace paneitz
