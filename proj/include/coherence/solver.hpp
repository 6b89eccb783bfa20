#ifndef COHERENCE_SOLVER_HPP
#define COHERENCE_SOLVER_HPP

#include <optional>
#include <utility>
#include <vector>

#include "coherence/states.hpp"

namespace coherence {

enum class StepSchedule { diminishing, polyak };

struct SolverOptions {
    int max_iterations = 6000;
    double target_accuracy = 1e-7;
    StepSchedule step_schedule = StepSchedule::polyak;
    int restarts = 2; // extra starting points beyond the first
};

struct SolverResult {
    double value = 0.0;              // min over all iterates of ||rho - diag(d)||_tr
    std::vector<double> diagonal;    // the minimizing d
    int iterations = 0;
    std::optional<double> best_lower_bound; // best dual bound found
    bool converged = false;          // true iff value - bound <= target_accuracy
};

// Minimize ||rho - diag(d)||_tr over d >= 0 (the modified measure, any
// diagonal PSD fit).
SolverResult mod_trace_distance(const DensityMatrix& rho, const SolverOptions& opts = {});

// Minimize over the probability simplex (the standard trace distance of
// coherence).
SolverResult trace_distance_coherence(const DensityMatrix& rho, const SolverOptions& opts = {});

// Objective value and one subgradient of d -> ||rho - diag(d)||_tr:
// g_i = -(U sgn(L) U^dag)_ii with sgn(0) = 0 on eigenvalues below 1e-12.
std::pair<double, std::vector<double>> subgradient_step(const DensityMatrix& rho,
                                                        const std::vector<double>& d);

// Decision for the "C' = 1" classification used by the rank sweeps. Decided
// early once either the primal value falls below the threshold or a dual
// certificate pushes the lower bound above it.
enum class UnitClass { hit, miss, undecided };
UnitClass classify_unit(const DensityMatrix& rho, double classification_tol,
                        const SolverOptions& opts = {});

struct CrossValidationReport {
    double max_qubit_discrepancy = 0.0;   // |solver - 2|rho_12|| over qubit states
    double max_pure_discrepancy = 0.0;    // |solver - closed form| over Haar pure states
    double max_incoherent_value = 0.0;    // solver value on diagonal states
    int qubit_samples = 0;
    int pure_samples = 0;
    int incoherent_samples = 0;
};

// Solver-vs-closed-form sweep over the given dimensions.
CrossValidationReport cross_validate(const std::vector<int>& dims, int samples_per_dim,
                                     std::uint64_t seed, const SolverOptions& opts = {});

} // namespace coherence

#endif
