#pragma once

// Radial shooting for Delta^2 w = |w|^{q-1} w in R^s with w(0) = 1,
// w'(0) = w'''(0) = 0, w''(0) = gamma.

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace paneitz {

using RadialState = std::array<double, 4>;  // w, w', w'', w'''

enum class ShotClass { sign_change, blow_up, positive_to_horizon, integration_failure };

std::string to_string(ShotClass c);

struct TracePoint {
    double r;
    RadialState y;
};

struct ShootOptions {
    double r0 = 1e-3;                 // end of the Taylor start
    double blowup_threshold = 1e12;   // |w| above this classifies as blow_up
    bool record_steps = false;        // trace every accepted step
    double trace_spacing = 0.0;       // > 0: trace on the uniform grid r0 + k * spacing
    long max_steps = 10'000'000;
};

struct ShootingOutcome {
    int s = 0;
    double q = 0;
    double gamma = 0;
    ShotClass classification = ShotClass::integration_failure;
    double radius = 0;  // first zero, blow-up radius, horizon, or last radius reached
    long steps = 0;
    std::vector<TracePoint> trace;
};

/// Right-hand side of the first-order system. For s = 1 the radial terms are
/// absent; `general_form` evaluates the s >= 2 expression for any s.
struct RadialRhs {
    int s;
    double q;
    bool general_form = false;
    void operator()(const RadialState& y, RadialState& dy, double r) const;
};

/// Series solution through order r^6, exact up to O(r^8).
RadialState taylor_start(int s, double q, double gamma, double r);

/// Throws std::invalid_argument for s < 1, q <= 1, R_max <= r0 or tol <= 0.
ShootingOutcome shoot(int s, double q, double gamma, double R_max, double tol = 1e-10, const ShootOptions& opts = {});

struct OscillationTable {
    int s = 0;
    double q = 0;
    double R_max = 0;
    std::vector<ShootingOutcome> outcomes;
    double sign_change_fraction() const;
    double fraction(ShotClass c) const;
};

/// Throws std::invalid_argument on an empty grid. Outcomes follow the grid order.
OscillationTable oscillation_sweep(int s, double q, const std::vector<double>& gamma_grid, double R_max,
                                   double tol = 1e-10, int jobs = 1);

/// count equally spaced points from lo to hi inclusive.
std::vector<double> uniform_grid(double lo, double hi, int count);

void write_sweep_csv(std::ostream& os, const OscillationTable& table);
void write_trace_csv(std::ostream& os, const ShootingOutcome& outcome);

}  // namespace paneitz
