#include "coherence/states.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace coherence {

PureState::PureState(std::vector<cplx> amplitudes) : amp_(std::move(amplitudes)) {
    if (amp_.empty()) throw validation_error("pure state must have dim >= 1");
    double n2 = 0.0;
    for (const cplx& z : amp_) n2 += std::norm(z);
    if (std::abs(std::sqrt(n2) - 1.0) > 1e-12)
        throw validation_error("pure state amplitudes must have unit norm");
}

double PureState::inf_norm() const {
    double m = 0.0;
    for (const cplx& z : amp_) m = std::max(m, std::abs(z));
    return m;
}

int PureState::argmax_abs() const {
    int best = 0;
    double bv = std::abs(amp_[0]);
    for (int j = 1; j < dim(); ++j) {
        const double v = std::abs(amp_[j]);
        if (v > bv) {
            bv = v;
            best = j;
        }
    }
    return best;
}

DensityMatrix::DensityMatrix(HermitianMatrix m) : m_(std::move(m)) {
    if (std::abs(m_.trace_real() - 1.0) > 1e-10)
        throw validation_error("density matrix trace must equal 1");
    if (!psd_check(m_, 1e-10))
        throw validation_error("density matrix must be positive semidefinite");
}

DensityMatrix DensityMatrix::from_pure(const PureState& x) {
    return DensityMatrix(HermitianMatrix(outer(x.amplitudes(), x.amplitudes())));
}

std::vector<double> DensityMatrix::diagonal() const {
    std::vector<double> d(dim());
    for (int i = 0; i < dim(); ++i) d[i] = m_(i, i).real();
    return d;
}

DiagonalState::DiagonalState(std::vector<double> weights) : w_(std::move(weights)) {
    if (w_.empty()) throw validation_error("diagonal state must have dim >= 1");
    double sum = 0.0;
    for (double w : w_) {
        if (w < 0.0) throw validation_error("diagonal state weights must be nonnegative");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw validation_error("diagonal state weights must sum to 1");
}

DiagonalState DiagonalState::uniform(int n) {
    if (n < 1) throw validation_error("dim must be >= 1");
    return DiagonalState(std::vector<double>(n, 1.0 / n));
}

DiagonalState DiagonalState::point_mass(int n, int index) {
    if (n < 1 || index < 0 || index >= n) throw validation_error("point mass index out of range");
    std::vector<double> w(n, 0.0);
    w[index] = 1.0;
    return DiagonalState(std::move(w));
}

DensityMatrix DiagonalState::to_density() const {
    ComplexMatrix m(dim(), dim());
    for (int i = 0; i < dim(); ++i) m(i, i) = w_[i];
    return DensityMatrix(HermitianMatrix(std::move(m)));
}

PureState haar_pure(int n, RandomStream& rng) {
    if (n < 1) throw validation_error("haar_pure: n must be >= 1");
    std::vector<cplx> v(n);
    double n2 = 0.0;
    for (int j = 0; j < n; ++j) {
        v[j] = rng.complex_gauss();
        n2 += std::norm(v[j]);
    }
    const double inv = 1.0 / std::sqrt(n2);
    for (cplx& z : v) z *= inv;
    // Renormalize once more so the unit-norm invariant holds to 1e-12 exactly.
    double n2b = 0.0;
    for (const cplx& z : v) n2b += std::norm(z);
    const double inv2 = 1.0 / std::sqrt(n2b);
    for (cplx& z : v) z *= inv2;
    return PureState(std::move(v));
}

DensityMatrix random_density(int n, int k, RandomStream& rng) {
    if (n < 1) throw validation_error("random_density: n must be >= 1");
    if (k < 1 || k > n) throw validation_error("random_density: rank must satisfy 1 <= k <= n");
    std::vector<std::vector<cplx>> g(n, std::vector<cplx>(k));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j) g[i][j] = rng.complex_gauss();

    ComplexMatrix m(n, n);
    double tr = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            cplx s = 0.0;
            for (int c = 0; c < k; ++c) s += g[i][c] * std::conj(g[j][c]);
            m(i, j) = s;
            m(j, i) = std::conj(s);
        }
        tr += m(i, i).real();
    }
    m *= cplx(1.0 / tr, 0.0);
    return DensityMatrix(HermitianMatrix(std::move(m)));
}

PureState canonicalize(const PureState& x) {
    const int n = x.dim();
    std::vector<double> mod(n);
    for (int j = 0; j < n; ++j) mod[j] = std::abs(x[j]);
    std::stable_sort(mod.begin(), mod.end(), std::greater<double>());
    // Renormalize to absorb modulus roundoff, but leave already-normalized
    // vectors untouched so the map is exactly idempotent.
    double n2 = 0.0;
    for (double m : mod) n2 += m * m;
    const double inv = (std::abs(n2 - 1.0) > 1e-15) ? 1.0 / std::sqrt(n2) : 1.0;
    std::vector<cplx> out(n);
    for (int j = 0; j < n; ++j) out[j] = mod[j] * inv;
    return PureState(std::move(out));
}

bool is_incoherent(const DensityMatrix& rho, double tol) {
    const int n = rho.dim();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && std::abs(rho(i, j)) > tol) return false;
    return true;
}

DensityMatrix block_direct_sum(double p1, const DensityMatrix& rho1,
                               double p2, const DensityMatrix& rho2) {
    if (p1 < 0.0 || p2 < 0.0 || std::abs(p1 + p2 - 1.0) > 1e-12)
        throw validation_error("block_direct_sum: weights must be probabilities summing to 1");
    const int n1 = rho1.dim();
    const int n2 = rho2.dim();
    ComplexMatrix m(n1 + n2, n1 + n2);
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n1; ++j) m(i, j) = p1 * rho1(i, j);
    for (int i = 0; i < n2; ++i)
        for (int j = 0; j < n2; ++j) m(n1 + i, n1 + j) = p2 * rho2(i, j);
    return DensityMatrix(HermitianMatrix(std::move(m)));
}

} // namespace coherence
