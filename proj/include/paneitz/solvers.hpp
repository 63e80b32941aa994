#pragma once

// Critical points of I: Newton polishing, the path-deformation mountain pass,
// and the constrained levels d_m over T intersected with the complement of E_m.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "paneitz/discretize.hpp"
#include "paneitz/variational.hpp"

namespace paneitz {

struct SolverConfig {
    int max_iter = 400;
    double tol_residual = 1e-8;
    double newton_damping = 1.0;  // initial Newton step length, in (0, 1]
    int mpa_path_points = 21;
    double mpa_step = 0.1;        // cap on a path move, relative to the B-norm of the point
    double mpa_handoff = 1e-6;    // relative B-gradient at which the path phase hands over to Newton
    int dm_max_m = 8;
    int dm_restarts = 20;
    double dm_tol = 1e-14;
    int dm_max_iter = 20000;
    std::uint64_t seed = 1;
    int jobs = 1;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

struct NewtonTrace {
    std::vector<double> residuals;  // one entry per iterate, starting with u0
    int shifted_steps = 0;          // Jacobians that needed the +mu I shift
};

/// Damped Newton on Bu - |u|^{q-1}u in extended precision. Never throws on
/// non-convergence: the best iterate is returned with converged = false.
SolutionRecord newton_refine(const DiscreteOperator& op, std::span<const Extended> u0, const SolverConfig& cfg,
                             NewtonTrace* trace = nullptr);
SolutionRecord newton_refine(const DiscreteOperator& op, std::span<const double> u0, const SolverConfig& cfg,
                             NewtonTrace* trace = nullptr);

struct MountainPassTrace {
    std::vector<double> path_max;    // path maximum before each deformation step
    bool interior_positive = true;   // every recorded path maximum was > 0
    int path_points = 0;             // final number of path nodes
    bool handed_off = false;         // path phase reached mpa_handoff before max_iter
};

/// Throws std::invalid_argument when I(e) >= 0.
SolutionRecord mountain_pass(const DiscreteOperator& op, std::span<const double> e, const SolverConfig& cfg,
                             MountainPassTrace* trace = nullptr);

struct DmResult {
    int m = 0;
    double d_m = 0.0;
    SolutionRecord raw;      // minimizer scaled onto T
    SolutionRecord refined;  // Newton from the ray-peak scaling of the minimizer
    bool escaped = false;    // refined profile left the complement of E_m
    std::vector<double> seed_values;
    double seed_spread = 0.0;  // (max - min) / min over seed_values
    bool spread_warning = false;
    std::vector<double> minimizer;  // normalized to <Bu,u>_w = 1
};

/// Extra starting profiles are projected onto the admissible subspace first.
/// `basis` must hold at least m vectors when m > 0.
DmResult dm_minimize(const DiscreteOperator& op, int m, const SolverConfig& cfg, const Eigenbasis* basis = nullptr,
                     const std::vector<std::vector<double>>& warm_starts = {});

struct SweepResult {
    std::vector<DmResult> levels;          // m = 0..dm_max_m
    std::vector<SolutionRecord> records;   // refined, deduplicated, sorted by I
};

SweepResult high_energy_sweep(const DiscreteOperator& op, const SolverConfig& cfg);

/// Relative distance min(|u - v|, |u + v|)_w / max(|u|_w, |v|_w).
double profile_distance(const Grid& g, std::span<const double> u, std::span<const double> v);

}  // namespace paneitz
