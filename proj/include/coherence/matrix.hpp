#ifndef COHERENCE_MATRIX_HPP
#define COHERENCE_MATRIX_HPP

#include <complex>
#include <initializer_list>
#include <vector>

#include "coherence/errors.hpp"

namespace coherence {

using cplx = std::complex<double>;

// Dense complex matrix, row-major. Sized for the dimensions this project
// needs (n up to a few hundred); no attempt at sparsity or blocking.
class ComplexMatrix {
public:
    ComplexMatrix() : rows_(0), cols_(0) {}
    ComplexMatrix(int rows, int cols);
    ComplexMatrix(int rows, int cols, std::initializer_list<cplx> entries);

    static ComplexMatrix identity(int n);
    static ComplexMatrix zero(int rows, int cols);

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    cplx& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
    const cplx& operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

    ComplexMatrix adjoint() const;
    cplx trace() const;
    double frobenius_norm() const;
    double max_abs() const;

    ComplexMatrix operator+(const ComplexMatrix& o) const;
    ComplexMatrix operator-(const ComplexMatrix& o) const;
    ComplexMatrix operator*(const ComplexMatrix& o) const;
    ComplexMatrix& operator*=(cplx s);
    friend ComplexMatrix operator*(cplx s, ComplexMatrix m) { m *= s; return m; }

    std::vector<cplx> apply(const std::vector<cplx>& v) const;

    const std::vector<cplx>& data() const { return a_; }
    std::vector<cplx>& data() { return a_; }

private:
    int rows_, cols_;
    std::vector<cplx> a_;
};

// Outer product |u><v| as a matrix.
ComplexMatrix outer(const std::vector<cplx>& u, const std::vector<cplx>& v);

// Square matrix checked to equal its conjugate transpose entrywise within
// 1e-12 (scaled by the Frobenius norm when that norm exceeds 1).
class HermitianMatrix {
public:
    explicit HermitianMatrix(ComplexMatrix m);

    int dim() const { return m_.rows(); }
    const ComplexMatrix& matrix() const { return m_; }

    const cplx& operator()(int i, int j) const { return m_(i, j); }
    double trace_real() const { return m_.trace().real(); }

    static double hermiticity_residual(const ComplexMatrix& m);

private:
    ComplexMatrix m_;
};

struct EigenDecomposition {
    std::vector<double> eigenvalues; // sorted descending, ties by original index
    ComplexMatrix eigenvectors;      // unit-norm columns, same order
};

// Cyclic complex Jacobi diagonalization. Sweeps until the off-diagonal
// Frobenius mass drops below 1e-14 * max(1, ||H||_F).
EigenDecomposition hermitian_eig(const HermitianMatrix& H);

// Sum of |eigenvalues|.
double trace_norm(const HermitianMatrix& H);

// Largest |eigenvalue| (spectral norm for Hermitian input).
double operator_norm(const HermitianMatrix& H);

// Assembles [[X, Y], [Y^dag, Z]]; X and Z Hermitian of dim n, Y any n x n.
HermitianMatrix block_2x2(const HermitianMatrix& X, const ComplexMatrix& Y,
                          const HermitianMatrix& Z);

// True iff the least eigenvalue is >= -tol.
bool psd_check(const HermitianMatrix& H, double tol);

} // namespace coherence

#endif
