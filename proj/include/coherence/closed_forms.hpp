#ifndef COHERENCE_CLOSED_FORMS_HPP
#define COHERENCE_CLOSED_FORMS_HPP

#include <optional>
#include <vector>

#include "coherence/states.hpp"

namespace coherence {

// Scaled diagonal fit p * delta with p >= 0. For qubit witnesses, mu records
// which member of the (non-unique) optimal family was chosen.
struct IncoherentWitness {
    double scale; // p
    DiagonalState delta;
    std::optional<double> mu;

    // The matrix p * diag(delta) as a plain diagonal vector.
    std::vector<double> scaled_diagonal() const;
};

enum class CertCase { case_a, case_b };

// Feasible point of the dual program: blocks X, Y, Z with
// [[X, Y], [Y^dag, Z]] >= 0, ||X||, ||Z|| <= 1/2, diag(Y) = 0.
struct DualCertificate {
    HermitianMatrix X;
    ComplexMatrix Y;
    HermitianMatrix Z;
    CertCase construction;
    std::optional<std::vector<double>> phases; // theta_j of the phase-closure step (case a)
    std::optional<PureState> companion;        // |y> (case a) or normalized v_+ (case b)
};

// Sum of |rho_ij| over i != j.
double l1_coherence(const DensityMatrix& rho);

// 2|rho_12|, the exact value of the modified measure on qubits.
double qubit_mod_trace(const DensityMatrix& rho);

// One member of the qubit optimal family: p*delta = diag(rho_11 - mu,
// rho_22 - mu), valid for -|rho_12| <= mu <= min(rho_11, rho_22).
IncoherentWitness qubit_optimal_set(const DensityMatrix& rho, double mu);

// Pure-state value: 1 when the largest amplitude modulus a is <= 1/sqrt(2),
// otherwise 2 a sqrt(1 - a^2).
double pure_mod_trace(const PureState& x);

// An optimal (p, delta): p = 0 with uniform delta below the threshold,
// p = 2a^2 - 1 with a point mass on the largest amplitude above it.
IncoherentWitness pure_optimal_witness(const PureState& x);

struct WitnessEigenpair {
    double lambda_plus;
    double lambda_minus;
    std::vector<cplx> v_plus;  // unnormalized
    std::vector<cplx> v_minus; // unnormalized
};

// The two nonzero eigenpairs of rho - p*delta for a real nonnegative state
// with x_1 > 1/sqrt(2): lambda_pm = (1 - x1^2) +- x1 sqrt(1 - x1^2),
// v_pm = (+-sqrt(1 - x1^2), x2, ..., xn).
WitnessEigenpair witness_eigenpair(const PureState& x);

// Phases theta (theta_1 = 0) with sum_j e^{i theta_j} w_j = 0, given
// nonnegative weights summing to 1 with max weight <= 1/2.
std::vector<double> close_phase_polygon(const std::vector<double>& w);

namespace detail {
// Damped fixed-point fallback for the phase-closure problem; exposed for
// direct testing. Returns phases with closure residual <= tol or throws.
std::vector<double> close_phase_fixed_point(const std::vector<double>& w, double tol,
                                            std::uint64_t seed);
} // namespace detail

// Dual feasible point whose objective equals pure_mod_trace(x). Input may be
// any valid pure state; the construction canonicalizes internally and maps
// the certificate back to the original basis order and phases.
DualCertificate dual_certificate_pure(const PureState& x);

// Checks the certificate's feasibility within tol (throws naming the violated
// constraint) and returns the dual objective -tr(rho (Y + Y^dag)), a lower
// bound on the modified trace distance of coherence of rho.
double verify_dual(const DualCertificate& cert, const DensityMatrix& rho, double tol);

} // namespace coherence

#endif
