#ifndef COHERENCE_EXPERIMENTS_HPP
#define COHERENCE_EXPERIMENTS_HPP

#include <optional>
#include <string>
#include <vector>

#include "coherence/solver.hpp"
#include "coherence/states.hpp"

namespace coherence {

struct ProportionReport {
    int dim = 0;
    int rank = 0;
    long long samples = 0; // classified samples
    long long hits = 0;
    long long excluded = 0; // solver budget exhausted without a decision
    double estimate = 0.0;
    double ci_halfwidth = 0.0;   // 99% level
    std::optional<double> exact; // 1 - n/2^(n-1), present for rank 1
    bool flagged = false;        // exact known and |estimate - exact| > 5 * ci_halfwidth
};

struct SweepConfig {
    int dim_lo = 2, dim_hi = 2;
    int rank_lo = 1, rank_hi = 1;
    long long samples = 1000;
    std::uint64_t seed = 42;
    double classification_tol = 1e-6;
};

// Proportion of Haar pure states in C^n with C'_tr = 1: exactly 1 - n/2^(n-1).
double exact_proportion(int n);

// F(2, 2n-2) density ((n-1)/(x+n-1))^n.
double f_density(int n, double x);

// Monte Carlo over Haar pure states; a hit is max_j |x_j| <= 1/sqrt(2)
// (the exact pure-state criterion; no solver involved).
ProportionReport mc_pure_proportion(int n, long long samples, std::uint64_t seed);

// Monte Carlo over rank-k Ginibre-induced density matrices; a hit is a solver
// value >= 1 - classification_tol. Undecided samples are excluded and counted.
ProportionReport mc_rank_proportion(int n, int k, long long samples, std::uint64_t seed,
                                    double classification_tol = 1e-6,
                                    const SolverOptions& opts = {});

// Smallest n whose proportion estimate reaches 1/2. Rank 1 uses the exact
// formula (crosses at n = 4); higher ranks sample.
int fifty_percent_crossing(int k, long long samples, std::uint64_t seed,
                           double classification_tol = 1e-6);

// Deterministic per-cell seed for sweep reproducibility.
std::uint64_t sweep_cell_seed(std::uint64_t master_seed, int n, int k);

struct PropertyCheck {
    std::string name;
    double worst = 0.0;
    double tolerance = 0.0;
    bool pass = true;
    std::string worst_input; // state-file serialization of the worst offender
};

struct SuiteReport {
    std::vector<PropertyCheck> checks;
    bool pass = true;
};

// C'(p1 rho1 (+) p2 rho2) = p1 C'(rho1) + p2 C'(rho2) on random block pairs,
// closed forms for the parts where available and the solver for the whole.
SuiteReport block_additivity_suite(int trials, std::uint64_t seed);

// Conditions (1) and (4) of a proper coherence measure: zero exactly on
// incoherent states, convex under random mixing.
SuiteReport proper_measure_suite(int trials, std::uint64_t seed);

// Subgradient versus central finite differences at random non-degenerate
// points.
SuiteReport gradient_check_suite(int trials, std::uint64_t seed);

// Worker count for sample-parallel loops: COHERENCE_THREADS when set,
// otherwise the hardware concurrency.
int worker_count();

} // namespace coherence

#endif
