#include "paneitz/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>

#include "paneitz/spline.hpp"

namespace paneitz {

double FoliationProfile::area(double t) const { return std::exp(log_area(t)); }

std::vector<std::string> builtin_profile_names() { return {"sphere_point", "sphere_subsphere"}; }

FoliationProfile builtin_profile(const std::string& name, int n, std::optional<int> k) {
    if (n < 5) throw GeometryError("builtin_profile: n must be >= 5, got " + std::to_string(n));
    FoliationProfile p;
    p.n = n;
    if (name == "sphere_point") {
        // distance to a point of the round S^n
        p.name = name;
        p.D = std::numbers::pi;
        p.m0 = p.m1 = 0;
        const double e = n - 1;
        p.log_area = [e](double t) { return e * std::log(std::sin(t)); };
        p.mean_curvature = [e](double t) { return e / std::tan(t); };
        return p;
    }
    if (name == "sphere_subsphere") {
        // distance to a totally geodesic S^k in S^n
        if (!k) throw GeometryError("builtin_profile: sphere_subsphere needs k");
        if (*k < 1 || *k > n - 2)
            throw GeometryError("builtin_profile: k must satisfy 1 <= k <= n-2, got " + std::to_string(*k));
        p.name = name;
        p.D = std::numbers::pi / 2;
        p.m0 = *k;
        p.m1 = n - *k - 1;
        const double a = n - *k - 1, b = *k;
        p.log_area = [a, b](double t) { return b * std::log(std::cos(t)) + a * std::log(std::sin(t)); };
        p.mean_curvature = [a, b](double t) { return a / std::tan(t) - b * std::tan(t); };
        return p;
    }
    throw GeometryError("builtin_profile: unknown profile '" + name + "'");
}

namespace {

// logA minus the focal singularities (n-m0-1) log t + (n-m1-1) log(D-t);
// smooth up to both endpoints for genuine isoparametric data.
struct RegularPart {
    CubicSpline spline;
    double lo, hi;
    double lo_value, lo_slope, hi_value, hi_slope;

    RegularPart(CubicSpline s)
        : spline(std::move(s)), lo(spline.front()), hi(spline.back()),
          lo_value(spline.value(lo)), lo_slope(spline.derivative(lo)),
          hi_value(spline.value(hi)), hi_slope(spline.derivative(hi)) {}

    double value(double t) const {
        if (t < lo) return lo_value + lo_slope * (t - lo);
        if (t > hi) return hi_value + hi_slope * (t - hi);
        return spline.value(t);
    }
    double derivative(double t) const {
        if (t < lo) return lo_slope;
        if (t > hi) return hi_slope;
        return spline.derivative(t);
    }
};

}  // namespace

FoliationProfile load_profile(std::vector<TabulatedSample> samples, int n, int m0, int m1, double D,
                              std::string name) {
    if (samples.empty()) throw GeometryError("load_profile: empty sample table");
    if (samples.size() < 4) throw GeometryError("load_profile: need at least 4 samples");
    if (!(D > 0) || !std::isfinite(D)) throw GeometryError("load_profile: D must be positive");
    if (n < 5) throw GeometryError("load_profile: n must be >= 5");
    if (m0 < 0 || m1 < 0 || m0 > n - 2 || m1 > n - 2)
        throw GeometryError("load_profile: focal dimensions must lie in [0, n-2]");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        if (!std::isfinite(s.t) || !std::isfinite(s.log_area)) throw GeometryError("load_profile: non-finite sample");
        if (s.t <= 0 || s.t >= D) throw GeometryError("load_profile: sample t outside (0, D)");
        if (i > 0 && !(s.t > samples[i - 1].t))
            throw GeometryError("load_profile: t must be strictly increasing (row " + std::to_string(i) + ")");
    }

    const double left = n - m0 - 1, right = n - m1 - 1;
    std::vector<double> ts, regular;
    ts.reserve(samples.size());
    regular.reserve(samples.size());
    for (const auto& s : samples) {
        ts.push_back(s.t);
        regular.push_back(s.log_area - left * std::log(s.t) - right * std::log(D - s.t));
    }
    auto reg = std::make_shared<const RegularPart>(CubicSpline(ts, regular));

    // A leftover c*log(t) in the regular part shows up as t * reg'(t) ~ c.
    const double t_lo = ts.front(), t_hi = ts.back();
    const double lo_defect = t_lo * reg->lo_slope, hi_defect = (D - t_hi) * reg->hi_slope;
    constexpr double kAsymptoticTol = 0.05;
    if (std::abs(lo_defect) > kAsymptoticTol * std::max(1.0, left))
        throw GeometryError("load_profile: data near t=0 inconsistent with focal dimension m0=" + std::to_string(m0) +
                            " (t*h deviates by " + std::to_string(lo_defect) + ")");
    if (std::abs(hi_defect) > kAsymptoticTol * std::max(1.0, right))
        throw GeometryError("load_profile: data near t=D inconsistent with focal dimension m1=" + std::to_string(m1) +
                            " ((D-t)*h deviates by " + std::to_string(hi_defect) + ")");

    FoliationProfile p;
    p.name = std::move(name);
    p.n = n;
    p.m0 = m0;
    p.m1 = m1;
    p.D = D;
    p.log_area = [reg, left, right, D](double t) {
        return reg->value(t) + left * std::log(t) + right * std::log(D - t);
    };
    p.mean_curvature = [reg, left, right, D](double t) { return reg->derivative(t) + left / t - right / (D - t); };

    const auto report = validate_profile(p, 1e-2);
    if (!report.passed()) throw GeometryError("load_profile: " + report.summary());
    return p;
}

std::vector<TabulatedSample> read_profile_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw GeometryError("profile csv: empty input");
    line.erase(std::remove_if(line.begin(), line.end(), [](char c) { return c == ' ' || c == '\r'; }), line.end());
    if (line != "t,logA") throw GeometryError("profile csv: expected header 't,logA', got '" + line + "'");
    std::vector<TabulatedSample> out;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        std::istringstream ss(line);
        std::string a, b;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b))
            throw GeometryError("profile csv: malformed row " + std::to_string(row));
        try {
            out.push_back({std::stod(a), std::stod(b)});
        } catch (const std::exception&) {
            throw GeometryError("profile csv: malformed number in row " + std::to_string(row));
        }
    }
    return out;
}

std::vector<TabulatedSample> read_profile_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw GeometryError("profile csv: cannot open " + path);
    return read_profile_csv(in);
}

bool ProfileReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const ProfileCheck& c) { return c.passed; });
}

std::string ProfileReport::summary() const {
    std::ostringstream os;
    bool first = true;
    for (const auto& c : checks) {
        if (c.passed) continue;
        os << (first ? "" : "; ") << c.name << " failed";
        if (!c.detail.empty()) os << " (" << c.detail << ")";
        first = false;
    }
    return first ? "all checks passed" : os.str();
}

ProfileReport validate_profile(const FoliationProfile& p, double tol) {
    ProfileReport r;
    {
        ProfileCheck c;
        c.name = "properness";
        c.passed = p.n >= 5 && p.m0 >= 0 && p.m1 >= 0 && p.m0 <= p.n - 2 && p.m1 <= p.n - 2;
        c.measured = std::max(p.m0, p.m1);
        c.expected = p.n - 2;
        if (!c.passed) c.detail = "need n >= 5 and 0 <= m0, m1 <= n-2";
        r.checks.push_back(c);
    }
    if (!(p.D > 0) || !p.log_area || !p.mean_curvature) {
        r.checks.push_back({"definition", false, 0, 0, "missing D, logA or h"});
        return r;
    }

    for (double frac : {1e-3, 1e-4}) {
        const double t = p.D * frac;
        ProfileCheck lo;
        lo.name = "tube_limit_m0@" + std::to_string(frac);
        lo.expected = p.n - p.m0 - 1;
        lo.measured = t * p.mean_curvature(t);
        lo.passed = std::abs(lo.measured - lo.expected) <= tol * std::max(1.0, std::abs(lo.expected));
        r.checks.push_back(lo);

        ProfileCheck hi;
        hi.name = "tube_limit_m1@" + std::to_string(frac);
        hi.expected = -(p.n - p.m1 - 1);
        hi.measured = t * p.mean_curvature(p.D - t);
        hi.passed = std::abs(hi.measured - hi.expected) <= tol * std::max(1.0, std::abs(hi.expected));
        r.checks.push_back(hi);
    }

    {
        ProfileCheck c;
        c.name = "area_positive";
        c.passed = true;
        double peak = 0;
        for (int i = 1; i < 200; ++i) {
            const double a = p.area(p.D * i / 200.0);
            peak = std::max(peak, a);
            if (!(a > 0) || !std::isfinite(a)) c.passed = false;
        }
        c.measured = peak;
        if (!c.passed) c.detail = "A must be positive and finite on (0, D)";
        r.checks.push_back(c);

        for (int side = 0; side < 2; ++side) {
            ProfileCheck v;
            v.name = side == 0 ? "area_vanishes_at_0" : "area_vanishes_at_D";
            const double near = side == 0 ? p.D * 1e-4 : p.D * (1 - 1e-4);
            const double far = side == 0 ? p.D * 1e-3 : p.D * (1 - 1e-3);
            const double a_near = p.area(near), a_far = p.area(far);
            v.measured = peak > 0 ? a_near / peak : a_near;
            v.expected = 0;
            v.passed = a_near < a_far && v.measured < 1e-3;
            if (!v.passed) v.detail = "A does not decay toward the focal variety";
            r.checks.push_back(v);
        }
    }
    return r;
}

double critical_exponent(int n, int m) {
    const int den = n - m - 4;
    if (den <= 0) return std::numeric_limits<double>::infinity();
    return static_cast<double>(n - m + 4) / den;
}

double critical_exponent(const FoliationProfile& p) { return critical_exponent(p.n, p.min_focal_dimension()); }

PaneitzCoefficients make_coefficients(double alpha, double beta, double q) {
    if (!(alpha > 0) || !std::isfinite(alpha)) throw GeometryError("coefficients: requires alpha > 0");
    if (!(beta > 0) || !std::isfinite(beta)) throw GeometryError("coefficients: requires beta > 0");
    if (!(q > 1) || !std::isfinite(q)) throw GeometryError("coefficients: requires q > 1");
    PaneitzCoefficients c{alpha, beta, q, std::nullopt};
    const double disc = alpha * alpha / 4 - beta;
    if (disc >= 0) {
        const double root = std::sqrt(disc);
        const double c1 = alpha / 2 + root;
        // c2 = beta / c1 avoids cancellation when beta << alpha^2
        c.factors = Factorization{c1, beta / c1};
    }
    return c;
}

EinsteinCoefficients einstein_coefficients(int n, const Rational& sc) {
    if (n < 5) throw GeometryError("einstein_coefficients: n must be >= 5");
    if (sc <= 0) throw GeometryError("einstein_coefficients: scalar curvature must be positive");
    EinsteinCoefficients e;
    e.n = n;
    e.sc = sc;
    const Rational N(n);
    e.Q = Rational(n * n - 4) / (8 * N * (N - 1) * (N - 1)) * sc * sc;
    e.alpha = Rational(n * n - 2 * n - 4) / (2 * N * (N - 1)) * sc;
    e.beta = Rational(n - 4, 2) * e.Q;
    e.discriminant = e.alpha * e.alpha - 4 * e.beta;
    e.closed_form = 4 * sc * sc / (N * N * (N - 1) * (N - 1));
    e.display_without_n = 4 * sc * sc / ((N - 1) * (N - 1));
    return e;
}

EinsteinCoefficients einstein_coefficients(int n, double sc) {
    if (!(sc > 0) || !std::isfinite(sc)) throw GeometryError("einstein_coefficients: scalar curvature must be positive");
    return einstein_coefficients(n, Rational(sc));
}

PaneitzCoefficients EinsteinCoefficients::with_exponent(double q) const {
    return make_coefficients(static_cast<double>(alpha), static_cast<double>(beta), q);
}

}  // namespace paneitz
