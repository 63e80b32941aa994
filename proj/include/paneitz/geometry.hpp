#pragma once

// One-dimensional reduction data of an isoparametric foliation and the
// dimension-dependent constants of the Paneitz-type problem.

#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace paneitz {

using Rational = boost::multiprecision::cpp_rational;

class GeometryError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Level-set volume profile A(t) = exp(logA(t)) on (0, D) and the mean
/// curvature h = (log A)' of the level set at distance t from M0.
struct FoliationProfile {
    std::string name;
    int n = 0;
    int m0 = 0;
    int m1 = 0;
    double D = 0.0;
    std::function<double(double)> log_area;
    std::function<double(double)> mean_curvature;

    double area(double t) const;
    int min_focal_dimension() const { return m0 < m1 ? m0 : m1; }
};

struct TabulatedSample {
    double t;
    double log_area;
};

FoliationProfile builtin_profile(const std::string& name, int n, std::optional<int> k = std::nullopt);
std::vector<std::string> builtin_profile_names();

/// Cubic (not-a-knot) interpolation of logA; outside the sampled range the
/// profile continues with the tube asymptotics A ~ t^{n-m0-1}, A ~ (D-t)^{n-m1-1}.
/// Throws GeometryError on a bad table or when the data contradict the asymptotics.
FoliationProfile load_profile(std::vector<TabulatedSample> samples, int n, int m0, int m1, double D,
                              std::string name = "tabulated");

std::vector<TabulatedSample> read_profile_csv(std::istream& in);
std::vector<TabulatedSample> read_profile_csv(const std::string& path);

struct ProfileCheck {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double expected = 0.0;
    std::string detail;
};

struct ProfileReport {
    std::vector<ProfileCheck> checks;
    bool passed() const;
    std::string summary() const;
};

ProfileReport validate_profile(const FoliationProfile& p, double tol);

/// (n - m + 4) / (n - m - 4) with m = min(m0, m1); +infinity when n <= m + 4.
double critical_exponent(const FoliationProfile& p);
double critical_exponent(int n, int min_focal_dimension);

struct Factorization {
    double c1;
    double c2;
};

struct PaneitzCoefficients {
    double alpha = 0.0;
    double beta = 0.0;
    double q = 0.0;
    std::optional<Factorization> factors;  // present iff alpha^2 >= 4 beta
};

PaneitzCoefficients make_coefficients(double alpha, double beta, double q);

/// Coefficients of the Paneitz operator of an Einstein metric with scalar
/// curvature sc, in exact rational arithmetic.
struct EinsteinCoefficients {
    int n = 0;
    Rational sc;
    Rational Q;
    Rational alpha;
    Rational beta;
    Rational discriminant;       // alpha^2 - 4 beta, by substitution
    Rational closed_form;        // 4 sc^2 / (n^2 (n-1)^2)
    Rational display_without_n;  // 4 sc^2 / (n-1)^2, the variant missing n^2
    bool matches_closed_form() const { return discriminant == closed_form; }
    bool matches_display_without_n() const { return discriminant == display_without_n; }
    PaneitzCoefficients with_exponent(double q) const;
};

EinsteinCoefficients einstein_coefficients(int n, const Rational& sc);
EinsteinCoefficients einstein_coefficients(int n, double sc);

}  // namespace paneitz
