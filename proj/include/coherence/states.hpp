#ifndef COHERENCE_STATES_HPP
#define COHERENCE_STATES_HPP

#include <vector>

#include "coherence/matrix.hpp"
#include "coherence/rng.hpp"

namespace coherence {

// Unit-norm complex amplitude vector.
class PureState {
public:
    explicit PureState(std::vector<cplx> amplitudes);

    int dim() const { return static_cast<int>(amp_.size()); }
    const std::vector<cplx>& amplitudes() const { return amp_; }
    const cplx& operator[](int j) const { return amp_[j]; }

    // max_j |x_j|
    double inf_norm() const;
    // index of the largest |x_j|, lowest index on ties
    int argmax_abs() const;

private:
    std::vector<cplx> amp_;
};

// Hermitian, positive semidefinite, trace-one matrix.
class DensityMatrix {
public:
    explicit DensityMatrix(HermitianMatrix m);

    static DensityMatrix from_pure(const PureState& x);

    int dim() const { return m_.dim(); }
    const HermitianMatrix& hermitian() const { return m_; }
    const ComplexMatrix& matrix() const { return m_.matrix(); }
    const cplx& operator()(int i, int j) const { return m_(i, j); }

    std::vector<double> diagonal() const;

private:
    HermitianMatrix m_;
};

// Probability vector standing for a diagonal density matrix delta.
class DiagonalState {
public:
    explicit DiagonalState(std::vector<double> weights);

    static DiagonalState uniform(int n);
    static DiagonalState point_mass(int n, int index);

    int dim() const { return static_cast<int>(w_.size()); }
    const std::vector<double>& weights() const { return w_; }
    double operator[](int j) const { return w_[j]; }

    DensityMatrix to_density() const;

private:
    std::vector<double> w_;
};

// Haar-uniform pure state: n independent standard complex Gaussians,
// normalized.
PureState haar_pure(int n, RandomStream& rng);

// Ginibre-induced random density matrix of rank k (almost surely):
// G G^dag / tr(G G^dag) for an n x k matrix of standard complex Gaussians.
DensityMatrix random_density(int n, int k, RandomStream& rng);

// Strips phases and sorts amplitudes descending (stable on ties). The
// modified trace distance of coherence is invariant under this map.
PureState canonicalize(const PureState& x);

// True iff every off-diagonal entry has modulus <= tol.
bool is_incoherent(const DensityMatrix& rho, double tol);

// Block-diagonal direct sum p1*rho1 (+) p2*rho2; requires p1 + p2 = 1.
DensityMatrix block_direct_sum(double p1, const DensityMatrix& rho1,
                               double p2, const DensityMatrix& rho2);

} // namespace coherence

#endif
