#include "coherence/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace coherence {

ComplexMatrix::ComplexMatrix(int rows, int cols) : rows_(rows), cols_(cols) {
    if (rows <= 0 || cols <= 0)
        throw validation_error("matrix dimensions must be positive");
    a_.assign(static_cast<size_t>(rows) * cols, cplx(0.0, 0.0));
}

ComplexMatrix::ComplexMatrix(int rows, int cols, std::initializer_list<cplx> entries)
    : ComplexMatrix(rows, cols) {
    if (entries.size() != a_.size())
        throw validation_error("entry count does not match rows*cols");
    std::copy(entries.begin(), entries.end(), a_.begin());
}

ComplexMatrix ComplexMatrix::identity(int n) {
    ComplexMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

ComplexMatrix ComplexMatrix::zero(int rows, int cols) { return ComplexMatrix(rows, cols); }

ComplexMatrix ComplexMatrix::adjoint() const {
    ComplexMatrix m(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) m(j, i) = std::conj((*this)(i, j));
    return m;
}

cplx ComplexMatrix::trace() const {
    cplx t = 0.0;
    for (int i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
    return t;
}

double ComplexMatrix::frobenius_norm() const {
    double s = 0.0;
    for (const cplx& z : a_) s += std::norm(z);
    return std::sqrt(s);
}

double ComplexMatrix::max_abs() const {
    double m = 0.0;
    for (const cplx& z : a_) m = std::max(m, std::abs(z));
    return m;
}

ComplexMatrix ComplexMatrix::operator+(const ComplexMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw validation_error("shape mismatch in +");
    ComplexMatrix m = *this;
    for (size_t i = 0; i < a_.size(); ++i) m.a_[i] += o.a_[i];
    return m;
}

ComplexMatrix ComplexMatrix::operator-(const ComplexMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw validation_error("shape mismatch in -");
    ComplexMatrix m = *this;
    for (size_t i = 0; i < a_.size(); ++i) m.a_[i] -= o.a_[i];
    return m;
}

ComplexMatrix ComplexMatrix::operator*(const ComplexMatrix& o) const {
    if (cols_ != o.rows_) throw validation_error("shape mismatch in *");
    ComplexMatrix m(rows_, o.cols_);
    for (int i = 0; i < rows_; ++i)
        for (int k = 0; k < cols_; ++k) {
            const cplx aik = (*this)(i, k);
            if (aik == cplx(0.0, 0.0)) continue;
            for (int j = 0; j < o.cols_; ++j) m(i, j) += aik * o(k, j);
        }
    return m;
}

ComplexMatrix& ComplexMatrix::operator*=(cplx s) {
    for (cplx& z : a_) z *= s;
    return *this;
}

std::vector<cplx> ComplexMatrix::apply(const std::vector<cplx>& v) const {
    if (static_cast<int>(v.size()) != cols_) throw validation_error("shape mismatch in apply");
    std::vector<cplx> out(rows_, cplx(0.0, 0.0));
    for (int i = 0; i < rows_; ++i) {
        cplx s = 0.0;
        for (int j = 0; j < cols_; ++j) s += (*this)(i, j) * v[j];
        out[i] = s;
    }
    return out;
}

ComplexMatrix outer(const std::vector<cplx>& u, const std::vector<cplx>& v) {
    ComplexMatrix m(static_cast<int>(u.size()), static_cast<int>(v.size()));
    for (size_t i = 0; i < u.size(); ++i)
        for (size_t j = 0; j < v.size(); ++j)
            m(static_cast<int>(i), static_cast<int>(j)) = u[i] * std::conj(v[j]);
    return m;
}

double HermitianMatrix::hermiticity_residual(const ComplexMatrix& m) {
    double worst = 0.0;
    for (int i = 0; i < m.rows(); ++i)
        for (int j = i; j < m.cols(); ++j)
            worst = std::max(worst, std::abs(m(i, j) - std::conj(m(j, i))));
    return worst;
}

HermitianMatrix::HermitianMatrix(ComplexMatrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw validation_error("Hermitian matrix must be square");
    const double scale = std::max(1.0, m_.frobenius_norm());
    if (hermiticity_residual(m_) > 1e-12 * scale)
        throw validation_error("matrix is not Hermitian within tolerance");
    // Symmetrize exactly so downstream arithmetic sees H = H^dag to the bit.
    const int n = m_.rows();
    for (int i = 0; i < n; ++i) {
        m_(i, i) = cplx(m_(i, i).real(), 0.0);
        for (int j = i + 1; j < n; ++j) {
            const cplx avg = 0.5 * (m_(i, j) + std::conj(m_(j, i)));
            m_(i, j) = avg;
            m_(j, i) = std::conj(avg);
        }
    }
}

namespace {

// One cyclic Jacobi pass over all (p, q) pairs. Rotations are complex Givens
// transforms R = [[c, -s e^{ia}], [s e^{-ia}, c]] chosen to zero A[p][q].
void jacobi_sweep(ComplexMatrix& A, ComplexMatrix& V, double small) {
    const int n = A.rows();
    for (int p = 0; p < n - 1; ++p) {
        for (int q = p + 1; q < n; ++q) {
            const cplx h = A(p, q);
            const double habs = std::abs(h);
            if (habs <= small) continue;

            const cplx phase = h / habs; // e^{i arg h}
            const double a = A(p, p).real();
            const double b = A(q, q).real();
            const double tau = (a - b) / (2.0 * habs);
            const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
            const double c = 1.0 / std::sqrt(1.0 + t * t);
            const double s = t * c;
            const cplx sp = s * phase;             // s e^{ia}
            const cplx spc = s * std::conj(phase); // s e^{-ia}

            // Two-sided update restricted to rows/columns p and q.
            for (int i = 0; i < n; ++i) {
                if (i == p || i == q) continue;
                const cplx aip = A(i, p);
                const cplx aiq = A(i, q);
                A(i, p) = c * aip + spc * aiq;
                A(i, q) = -sp * aip + c * aiq;
                A(p, i) = std::conj(A(i, p));
                A(q, i) = std::conj(A(i, q));
            }
            A(p, p) = a + t * habs;
            A(q, q) = b - t * habs;
            A(p, q) = 0.0;
            A(q, p) = 0.0;

            for (int i = 0; i < n; ++i) {
                const cplx vip = V(i, p);
                const cplx viq = V(i, q);
                V(i, p) = c * vip + spc * viq;
                V(i, q) = -sp * vip + c * viq;
            }
        }
    }
}

double offdiag_frobenius(const ComplexMatrix& A) {
    double s = 0.0;
    for (int i = 0; i < A.rows(); ++i)
        for (int j = 0; j < A.cols(); ++j)
            if (i != j) s += std::norm(A(i, j));
    return std::sqrt(s);
}

} // namespace

EigenDecomposition hermitian_eig(const HermitianMatrix& H) {
    const int n = H.dim();
    ComplexMatrix A = H.matrix();
    ComplexMatrix V = ComplexMatrix::identity(n);

    const double scale = std::max(1.0, A.frobenius_norm());
    const double target = 1e-14 * scale;
    const int max_sweeps = 100;

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        const double off = offdiag_frobenius(A);
        if (off <= target) break;
        // Skipping rotations far below the current off-diagonal level saves
        // work early without affecting the final threshold.
        const double small = (sweep < 3) ? off / (5.0 * n * n) : 0.0;
        jacobi_sweep(A, V, std::max(small, 1e-300));
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return A(i, i).real() > A(j, j).real(); });

    EigenDecomposition out;
    out.eigenvalues.resize(n);
    out.eigenvectors = ComplexMatrix(n, n);
    for (int k = 0; k < n; ++k) {
        out.eigenvalues[k] = A(order[k], order[k]).real();
        for (int i = 0; i < n; ++i) out.eigenvectors(i, k) = V(i, order[k]);
    }
    return out;
}

double trace_norm(const HermitianMatrix& H) {
    const EigenDecomposition e = hermitian_eig(H);
    double s = 0.0;
    for (double lam : e.eigenvalues) s += std::abs(lam);
    return s;
}

double operator_norm(const HermitianMatrix& H) {
    const EigenDecomposition e = hermitian_eig(H);
    double m = 0.0;
    for (double lam : e.eigenvalues) m = std::max(m, std::abs(lam));
    return m;
}

HermitianMatrix block_2x2(const HermitianMatrix& X, const ComplexMatrix& Y,
                          const HermitianMatrix& Z) {
    const int n = X.dim();
    if (Z.dim() != n || Y.rows() != n || Y.cols() != n)
        throw validation_error("block_2x2: X, Y, Z must all be n x n");
    ComplexMatrix B(2 * n, 2 * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            B(i, j) = X(i, j);
            B(i, n + j) = Y(i, j);
            B(n + i, j) = std::conj(Y(j, i));
            B(n + i, n + j) = Z(i, j);
        }
    return HermitianMatrix(std::move(B));
}

bool psd_check(const HermitianMatrix& H, double tol) {
    if (tol < 0.0) throw validation_error("psd_check: tol must be nonnegative");
    const EigenDecomposition e = hermitian_eig(H);
    return e.eigenvalues.back() >= -tol;
}

} // namespace coherence
