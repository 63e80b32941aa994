#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "paneitz/io.hpp"
#include "paneitz/solvers.hpp"

namespace paneitz::cli {

enum ExitCode : int { ok = 0, runtime_failure = 1, validation_error = 2, not_converged = 3 };

struct RunConfig {
    std::string command;
    std::string profile = "sphere_point";
    int n = 5;
    std::optional<int> k;
    int m0 = 0;   // tabulated profiles only
    int m1 = 0;
    double D = 0;
    std::optional<double> alpha;
    std::optional<double> beta;
    std::optional<double> einstein;  // scalar curvature; derives alpha and beta
    double q = 3;
    int N = 800;
    SolverConfig solver;
    std::string out_dir = "out";
    int direction = 0;     // solve: 0 = constant end point, d >= 1 = eigenvector d+1
    double e_scale = 3.0;  // solve: end point is e_scale * a(v) * v
    int trials = 8;        // probe-embedding
    int s = 6;             // blowup
    double gamma_min = -1.0;
    double gamma_max = 0.0;
    int gamma_count = 50;
    double R_max = 100.0;
    double shoot_tol = 1e-10;
    std::optional<double> trace_gamma;
    bool export_profile = false;

    /// Fields that determine results; excludes out_dir and jobs.
    Json canonical() const;
};

/// One diagnostic per violated invariant; empty when valid.
std::vector<std::string> validate(const RunConfig& cfg);

/// Entry point shared by the executable and the tests.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace paneitz::cli
