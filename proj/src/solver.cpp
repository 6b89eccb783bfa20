#include "coherence/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "coherence/closed_forms.hpp"

namespace coherence {

namespace {

constexpr double kZeroEig = 1e-12;     // sgn(0) cutoff for the reported subgradient
constexpr double kBoundSlack = 1e-12;  // safety margin subtracted from dual bounds

enum class Constraint { orthant, simplex };

// Spectral data of A = rho - diag(d) at one iterate.
struct Iterate {
    std::vector<double> lambda; // descending
    ComplexMatrix U;
    double value = 0.0; // sum |lambda|
};

// Sign split of the spectrum at threshold eps: eigenvalues within [-eps, eps]
// count as kernel, which is where dual completions have freedom. Larger eps
// trades a little certified mass for more freedom; every choice yields a
// valid bound because the resulting W is checked explicitly.
struct Partition {
    std::vector<int> sign;       // +1 / 0 / -1 per eigenvalue
    std::vector<double> w;       // diag(P_+ - P_-)
    std::vector<double> kappa;   // diag of the kernel projector
    std::vector<int> kernel_cols;
};

Iterate analyze(const DensityMatrix& rho, const std::vector<double>& d) {
    const int n = rho.dim();
    ComplexMatrix A = rho.matrix();
    for (int i = 0; i < n; ++i) A(i, i) -= d[i];
    EigenDecomposition e = hermitian_eig(HermitianMatrix(std::move(A)));

    Iterate it;
    it.lambda = std::move(e.eigenvalues);
    it.U = std::move(e.eigenvectors);
    for (double lam : it.lambda) it.value += std::abs(lam);
    return it;
}

Partition partition(const Iterate& it, double eps) {
    const int n = it.U.rows();
    Partition p;
    p.sign.resize(n);
    p.w.assign(n, 0.0);
    p.kappa.assign(n, 0.0);
    for (int j = 0; j < n; ++j) {
        const double lam = it.lambda[j];
        p.sign[j] = (lam > eps) ? 1 : (lam < -eps ? -1 : 0);
        if (p.sign[j] == 0) p.kernel_cols.push_back(j);
        for (int i = 0; i < n; ++i) {
            const double m = std::norm(it.U(i, j));
            if (p.sign[j] == 0)
                p.kappa[i] += m;
            else
                p.w[i] += p.sign[j] * m;
        }
    }
    return p;
}

double inner_real(const ComplexMatrix& rho, const ComplexMatrix& W) {
    const int n = rho.rows();
    cplx t = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) t += rho(i, j) * W(j, i);
    return t.real();
}

// W0 = U diag(sign) U^dag, optionally minus kernel_shift * (kernel projector).
ComplexMatrix sign_matrix(const Iterate& it, const Partition& p, double kernel_shift) {
    const int n = it.U.rows();
    ComplexMatrix W(n, n);
    for (int j = 0; j < n; ++j) {
        const double coeff = (p.sign[j] != 0) ? static_cast<double>(p.sign[j]) : -kernel_shift;
        if (coeff == 0.0) continue;
        for (int i = 0; i < n; ++i) {
            const cplx uij = it.U(i, j);
            for (int k = i; k < n; ++k) {
                const cplx v = coeff * uij * std::conj(it.U(k, j));
                W(i, k) += v;
                if (k != i) W(k, i) += std::conj(v);
            }
        }
    }
    return W;
}

// Clamp positive diagonal entries to zero (dual feasibility on the orthant),
// then divide by a conservative norm estimate so ||W|| <= 1 holds rigorously.
double finish_orthant_bound(ComplexMatrix W, const ComplexMatrix& rho, double norm_estimate) {
    const int n = W.rows();
    double clamp_total = 0.0;
    for (int i = 0; i < n; ++i) {
        const double di = W(i, i).real();
        if (di > 0.0) {
            clamp_total += di;
            W(i, i) = cplx(0.0, 0.0);
        }
    }
    const double scale = std::max(1.0, norm_estimate + clamp_total + 1e-13);
    return inner_real(rho, W) / scale - kBoundSlack;
}

// s*I kernel completion: W = P_+ - P_- - s*M keeps ||W|| <= 1 by
// construction; feasible when the kernel diagonal can cover every positive w.
double bound_orthant_cheap(const Iterate& it, const Partition& p, const ComplexMatrix& rho) {
    const int n = it.U.rows();
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        if (p.w[i] > 0.0) {
            if (p.kappa[i] < p.w[i]) return -std::numeric_limits<double>::infinity();
            s = std::max(s, p.w[i] / p.kappa[i]);
        }
    }
    if (s > 1.0) return -std::numeric_limits<double>::infinity();
    return finish_orthant_bound(sign_matrix(it, p, s), rho, 1.0);
}

// Small dense real solve with partial pivoting.
bool solve_linear(std::vector<std::vector<double>> a, std::vector<double> b,
                  std::vector<double>& x) {
    const int n = static_cast<int>(b.size());
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) < 1e-300) return false;
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (int r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            if (f == 0.0) continue;
            for (int c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    x.assign(n, 0.0);
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < n; ++c) s -= a[r][c] * x[c];
        x[r] = s / a[r][r];
    }
    return true;
}

// Kernel basis as v_i in C^m per coordinate i: v_i[a] = conj(U(i, kernel_a)).
std::vector<std::vector<cplx>> kernel_rows(const Iterate& it, const Partition& p) {
    const int n = it.U.rows();
    const int m = static_cast<int>(p.kernel_cols.size());
    std::vector<std::vector<cplx>> v(n, std::vector<cplx>(m));
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < m; ++a) v[i][a] = std::conj(it.U(i, p.kernel_cols[a]));
    return v;
}

// Diagonal targets for the kernel completion. Coordinates carrying positive
// weight in d want W_ii = 0 exactly (complementary slackness); the rest only
// need W_ii <= 0.
std::vector<double> completion_targets(const Partition& p, const std::vector<double>& d) {
    std::vector<double> target(p.w.size());
    for (size_t i = 0; i < target.size(); ++i)
        target[i] = (d[i] > 1e-12) ? p.w[i] : std::max(0.0, p.w[i]);
    return target;
}

// Hermitian clip of a small matrix onto the operator-norm unit ball.
void clip_operator_ball(std::vector<std::vector<cplx>>& T) {
    const int m = static_cast<int>(T.size());
    ComplexMatrix M(m, m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) M(a, b) = 0.5 * (T[a][b] + std::conj(T[b][a]));
    const EigenDecomposition e = hermitian_eig(HermitianMatrix(std::move(M)));
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            cplx acc = 0.0;
            for (int j = 0; j < m; ++j) {
                const double lam = std::clamp(e.eigenvalues[j], -1.0, 1.0);
                acc += lam * e.eigenvectors(a, j) * std::conj(e.eigenvectors(b, j));
            }
            T[a][b] = acc;
        }
}

// Diagonal of U_K T U_K^dag in the original coordinates.
std::vector<double> completion_diagonal(const std::vector<std::vector<cplx>>& v,
                                        const std::vector<std::vector<cplx>>& T) {
    const int n = static_cast<int>(v.size());
    const int m = static_cast<int>(T.size());
    std::vector<double> diag(n, 0.0);
    for (int i = 0; i < n; ++i) {
        cplx q = 0.0;
        for (int a = 0; a < m; ++a) {
            cplx row = 0.0;
            for (int b = 0; b < m; ++b) row += T[a][b] * v[i][b];
            q += std::conj(v[i][a]) * row;
        }
        diag[i] = q.real();
    }
    return diag;
}

// Builds W = P_+ - P_- - U_K T U_K^dag and finishes it into an honest bound.
double bound_from_completion(const Iterate& it, const Partition& p, const ComplexMatrix& rho,
                             const std::vector<std::vector<cplx>>& v,
                             const std::vector<std::vector<cplx>>& T) {
    const int n = it.U.rows();
    const int m = static_cast<int>(p.kernel_cols.size());
    ComplexMatrix W = sign_matrix(it, p, 0.0);
    for (int i = 0; i < n; ++i)
        for (int k = i; k < n; ++k) {
            // (U_K T U_K^dag)_{ik} with v_i[a] = conj(U(i, kernel_a))
            cplx acc = 0.0;
            for (int a = 0; a < m; ++a) {
                cplx row = 0.0;
                for (int b = 0; b < m; ++b) row += T[a][b] * v[k][b];
                acc += std::conj(v[i][a]) * row;
            }
            W(i, k) -= acc;
            if (k != i)
                W(k, i) -= std::conj(acc);
            else
                W(i, i) = cplx(W(i, i).real(), 0.0);
        }
    const ComplexMatrix sym = 0.5 * (W + W.adjoint());
    const double nrm = operator_norm(HermitianMatrix(sym));
    return finish_orthant_bound(sym, rho, nrm);
}

// Least-squares kernel completion: T = M diag(beta) M with diag(T) matching
// the target diagonal. The clipped T is both a certificate and (through its
// residual) an approximate minimum-norm subgradient.
struct LsqCompletion {
    bool ok = false;
    std::vector<std::vector<cplx>> T; // clipped to the unit ball
    std::vector<double> residual;     // target - diag(U_K T U_K^dag)
};

LsqCompletion lsq_completion(const Iterate& it, const Partition& p,
                             const std::vector<std::vector<cplx>>& v,
                             const std::vector<double>& target) {
    LsqCompletion out;
    const int n = it.U.rows();
    const int m = static_cast<int>(p.kernel_cols.size());
    if (m == 0) return out;

    // B_ik = |M_ik|^2 where M = kernel projector.
    std::vector<std::vector<double>> B(n, std::vector<double>(n));
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            cplx mik = 0.0;
            for (int a = 0; a < m; ++a) mik += std::conj(v[i][a]) * v[k][a];
            B[i][k] = std::norm(mik);
        }
        B[i][i] += 1e-12;
    }
    std::vector<double> beta;
    if (!solve_linear(B, target, beta)) return out;

    out.T.assign(m, std::vector<cplx>(m, cplx(0.0, 0.0)));
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            cplx acc = 0.0;
            for (int i = 0; i < n; ++i) acc += v[i][a] * beta[i] * std::conj(v[i][b]);
            out.T[a][b] = acc;
        }
    clip_operator_ball(out.T);
    const std::vector<double> diag = completion_diagonal(v, out.T);
    out.residual.resize(n);
    for (int i = 0; i < n; ++i) out.residual[i] = target[i] - diag[i];
    out.ok = true;
    return out;
}

// Cyclic projections for the kernel-completion feasibility problem:
// find T (Hermitian, ||T|| <= 1) with diag(U_K T U_K^dag) >= target, driven
// to equality where d_i > 0. Any feasible T at d = 0 certifies C' = 1.
double bound_orthant_pocs(const Iterate& it, const Partition& p, const ComplexMatrix& rho,
                          const std::vector<std::vector<cplx>>& v,
                          const std::vector<double>& target,
                          const std::vector<double>& d, int cycles) {
    const int n = it.U.rows();
    const int m = static_cast<int>(p.kernel_cols.size());
    if (m == 0) return -std::numeric_limits<double>::infinity();

    std::vector<std::vector<cplx>> T(m, std::vector<cplx>(m, cplx(0.0, 0.0)));
    for (int a = 0; a < m; ++a) T[a][a] = 1.0;

    std::vector<double> vnorm2(n);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int a = 0; a < m; ++a) s += std::norm(v[i][a]);
        vnorm2[i] = s;
    }

    for (int cycle = 0; cycle < cycles; ++cycle) {
        bool any_violation = false;
        for (int i = 0; i < n; ++i) {
            if (vnorm2[i] < 1e-14) continue;
            cplx q = 0.0;
            for (int a = 0; a < m; ++a) {
                cplx row = 0.0;
                for (int b = 0; b < m; ++b) row += T[a][b] * v[i][b];
                q += std::conj(v[i][a]) * row;
            }
            const double gap = target[i] - q.real();
            const bool equality = d[i] > 1e-12;
            if (!equality && gap <= 1e-13) continue;
            if (equality && std::abs(gap) <= 1e-13) continue;
            any_violation = true;
            const double coef = gap / (vnorm2[i] * vnorm2[i]);
            for (int a = 0; a < m; ++a)
                for (int b = 0; b < m; ++b)
                    T[a][b] += coef * v[i][a] * std::conj(v[i][b]);
        }
        clip_operator_ball(T);
        if (!any_violation && cycle > 0) break;
    }
    return bound_from_completion(it, p, rho, v, T);
}

// Generic repair: drop the offending diagonal, rescale by the true norm.
double bound_orthant_generic(const Iterate& it, const Partition& p, const ComplexMatrix& rho) {
    ComplexMatrix W = sign_matrix(it, p, p.kernel_cols.empty() ? 0.0 : 1.0);
    const int n = W.rows();
    for (int i = 0; i < n; ++i)
        if (W(i, i).real() > 0.0) W(i, i) = cplx(0.0, 0.0);
    const ComplexMatrix sym = 0.5 * (W + W.adjoint());
    const double nrm = operator_norm(HermitianMatrix(sym));
    return finish_orthant_bound(sym, rho, nrm);
}

// Relaxation ladder for the kernel threshold; wider thresholds sacrifice the
// dropped eigenvalue mass but often certify much more.
double bound_orthant_full(const Iterate& it, const ComplexMatrix& rho,
                          const std::vector<double>& d, bool with_pocs) {
    double best = -std::numeric_limits<double>::infinity();
    bool first = true;
    for (double eps : {kZeroEig, 1e-7, 1e-4}) {
        const Partition p = partition(it, eps);
        if (!first && p.kernel_cols.empty()) continue;
        best = std::max(best, bound_orthant_cheap(it, p, rho));
        if (!p.kernel_cols.empty()) {
            const auto v = kernel_rows(it, p);
            const auto target = completion_targets(p, d);
            const LsqCompletion lsq = lsq_completion(it, p, v, target);
            if (lsq.ok) best = std::max(best, bound_from_completion(it, p, rho, v, lsq.T));
            if (with_pocs)
                best = std::max(best, bound_orthant_pocs(it, p, rho, v, target, d, 40));
        }
        if (first) best = std::max(best, bound_orthant_generic(it, p, rho));
        first = false;
    }
    return best;
}

// Simplex dual bound: max over s in [0,1] of
// tr(rho (W0 - s M)) - max_i (w - s kappa)_i, concave in s.
double bound_simplex(const Iterate& it, const ComplexMatrix& rho) {
    const int n = it.U.rows();
    double best = -std::numeric_limits<double>::infinity();
    for (double eps : {kZeroEig, 1e-7, 1e-4}) {
        const Partition p = partition(it, eps);
        const ComplexMatrix W0 = sign_matrix(it, p, 0.0);
        const double tr0 = inner_real(rho, W0);
        double trM = 0.0;
        const bool has_kernel = !p.kernel_cols.empty();
        if (has_kernel) {
            const ComplexMatrix WM = sign_matrix(it, p, 1.0); // W0 - M
            trM = tr0 - inner_real(rho, WM);
        }
        auto objective = [&](double s) {
            double maxdiag = -std::numeric_limits<double>::infinity();
            for (int i = 0; i < n; ++i) maxdiag = std::max(maxdiag, p.w[i] - s * p.kappa[i]);
            return tr0 - s * trM - maxdiag;
        };
        double lo = 0.0, hi = has_kernel ? 1.0 : 0.0;
        for (int iter = 0; iter < 60 && hi - lo > 1e-12; ++iter) {
            const double m1 = lo + (hi - lo) / 3.0;
            const double m2 = hi - (hi - lo) / 3.0;
            if (objective(m1) < objective(m2))
                lo = m1;
            else
                hi = m2;
        }
        const double raw = std::max(objective(0.0), objective(0.5 * (lo + hi)));
        best = std::max(best, raw / (1.0 + 1e-12) - kBoundSlack);
    }
    return best;
}

void project_orthant(std::vector<double>& d) {
    for (double& v : d) v = std::max(0.0, v);
}

// Euclidean projection onto the probability simplex (sort-based).
void project_simplex(std::vector<double>& d) {
    const int n = static_cast<int>(d.size());
    std::vector<double> u(d);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double css = 0.0, tau = 0.0;
    for (int j = 0; j < n; ++j) {
        css += u[j];
        const double t = (css - 1.0) / (j + 1);
        if (u[j] - t > 0.0) tau = t;
    }
    for (double& v : d) v = std::max(0.0, v - tau);
}

double objective_value(const DensityMatrix& rho, const std::vector<double>& d) {
    const int n = rho.dim();
    ComplexMatrix A = rho.matrix();
    for (int i = 0; i < n; ++i) A(i, i) -= d[i];
    return trace_norm(HermitianMatrix(std::move(A)));
}

// Golden-section minimization of the convex section t -> f(P(d + t*dir))
// over [lo, hi], with P the orthant clamp; updates (d, value) on improvement
// and returns the gain.
double line_polish(const DensityMatrix& rho, std::vector<double>& d, double& value,
                   const std::vector<double>& dir, double lo, double hi, int& evals) {
    if (hi - lo < 1e-14) return 0.0;
    const int n = rho.dim();
    const double golden = 0.6180339887498949;
    auto f1 = [&](double t) {
        std::vector<double> dt = d;
        for (int i = 0; i < n; ++i) dt[i] = std::max(0.0, dt[i] + t * dir[i]);
        ++evals;
        return objective_value(rho, dt);
    };
    double x1 = hi - golden * (hi - lo), x2 = lo + golden * (hi - lo);
    double fx1 = f1(x1), fx2 = f1(x2);
    for (int k = 0; k < 70 && hi - lo > 1e-13; ++k) {
        if (fx1 <= fx2) {
            hi = x2;
            x2 = x1;
            fx2 = fx1;
            x1 = hi - golden * (hi - lo);
            fx1 = f1(x1);
        } else {
            lo = x1;
            x1 = x2;
            fx1 = fx2;
            x2 = lo + golden * (hi - lo);
            fx2 = f1(x2);
        }
    }
    const double best_t = (fx1 <= fx2) ? x1 : x2;
    const double best_f = std::min(fx1, fx2);
    if (best_f >= value) return 0.0;
    const double gain = value - best_f;
    value = best_f;
    for (int i = 0; i < n; ++i) d[i] = std::max(0.0, d[i] + best_t * dir[i]);
    return gain;
}

// Refinement along coordinate axes, falling back to pair directions
// e_i +- e_j when the axes stall at a nonsmooth kink.
void coordinate_polish(const DensityMatrix& rho, std::vector<double>& d, double& value,
                       int max_sweeps, int& evals) {
    const int n = rho.dim();
    std::vector<double> dir(n, 0.0);
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double sweep_gain = 0.0;
        for (int i = 0; i < n; ++i) {
            dir.assign(n, 0.0);
            dir[i] = 1.0;
            sweep_gain += line_polish(rho, d, value, dir, -std::min(d[i], 0.25), 0.25, evals);
        }
        if (sweep_gain >= 1e-13) continue;

        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                dir.assign(n, 0.0);
                dir[i] = 1.0;
                dir[j] = 1.0;
                sweep_gain += line_polish(rho, d, value, dir,
                                          -std::min({d[i], d[j], 0.25}), 0.25, evals);
                dir[j] = -1.0;
                sweep_gain += line_polish(rho, d, value, dir,
                                          -std::min(d[i], 0.25), std::min(d[j], 0.25), evals);
            }
        }
        if (sweep_gain < 1e-13) break;
    }
}

// Steepest-descent finisher: the least-squares completion residual is an
// approximate minimum-norm element of the eps-subdifferential, so its
// opposite is a good descent direction right at the kinks where plain
// subgradient steps chatter. Each round also tightens the dual bound.
void epsilon_descent(const DensityMatrix& rho, const ComplexMatrix& R, std::vector<double>& d,
                     double& value, double& L_best, int rounds, int& evals) {
    const int n = rho.dim();
    for (int round = 0; round < rounds; ++round) {
        const Iterate it = analyze(rho, d);
        ++evals;
        if (it.value < value) value = it.value;

        const double gap = std::max(value - L_best, 1e-9);
        const double eps = std::clamp(0.5 * gap, 1e-9, 1e-3);
        const Partition p = partition(it, eps);

        std::vector<double> dir;
        if (!p.kernel_cols.empty()) {
            const auto v = kernel_rows(it, p);
            const auto target = completion_targets(p, d);
            const LsqCompletion lsq = lsq_completion(it, p, v, target);
            if (lsq.ok) {
                L_best = std::max(L_best, bound_from_completion(it, p, R, v, lsq.T));
                dir = lsq.residual;
            }
        }
        if (dir.empty()) dir = p.w; // smooth region: plain gradient descent

        double norm2 = 0.0;
        for (int i = 0; i < n; ++i) {
            if (d[i] <= 1e-12 && dir[i] < 0.0) dir[i] = 0.0; // active bound
            norm2 += dir[i] * dir[i];
        }
        if (norm2 <= 1e-24) break;
        const double inv = 1.0 / std::sqrt(norm2);
        for (double& v : dir) v *= inv;
        if (line_polish(rho, d, value, dir, 0.0, 0.5, evals) < 1e-14) break;
    }
}

// Simplex counterpart of the coordinate polish: pair moves d_i += t,
// d_j -= t keep the iterate on the probability simplex.
void simplex_pair_polish(const DensityMatrix& rho, std::vector<double>& d, double& value,
                         int max_sweeps, int& evals) {
    const int n = rho.dim();
    std::vector<double> dir(n, 0.0);
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double sweep_gain = 0.0;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                dir.assign(n, 0.0);
                dir[i] = 1.0;
                dir[j] = -1.0;
                sweep_gain += line_polish(rho, d, value, dir, 0.0, std::min(d[j], 1.0), evals);
            }
        }
        if (sweep_gain < 1e-13) break;
    }
}

std::vector<std::vector<double>> starting_points(const DensityMatrix& rho, Constraint cons,
                                                 int max_starts) {
    const int n = rho.dim();
    std::vector<std::vector<double>> starts;

    if (cons == Constraint::orthant)
        starts.emplace_back(n, 0.0); // d = 0 carries the C' = 1 certificates
    else
        starts.push_back(rho.diagonal());

    // Closed-form witness start when the state is (near-)pure.
    const EigenDecomposition e = hermitian_eig(rho.hermitian());
    if (e.eigenvalues[0] >= 0.9) {
        std::vector<cplx> top(n);
        double nn = 0.0;
        for (int i = 0; i < n; ++i) {
            top[i] = e.eigenvectors(i, 0);
            nn += std::norm(top[i]);
        }
        double a = 0.0;
        int amax = 0;
        for (int i = 0; i < n; ++i) {
            const double m = std::abs(top[i]) / std::sqrt(nn);
            if (m > a) {
                a = m;
                amax = i;
            }
        }
        std::vector<double> dw(n, 0.0);
        if (cons == Constraint::orthant) {
            if (a > 0.70710678118654752440) dw[amax] = 2.0 * a * a - 1.0;
        } else {
            dw[amax] = 1.0;
        }
        starts.push_back(std::move(dw));
    }

    if (cons == Constraint::orthant)
        starts.push_back(rho.diagonal());
    else
        starts.emplace_back(n, 1.0 / n);

    if (static_cast<int>(starts.size()) > max_starts) starts.resize(max_starts);
    return starts;
}

struct SolveOutcome {
    SolverResult result;
    int decision = 0; // +1 value certified >= threshold, -1 certified below, 0 undecided
};

SolveOutcome solve_diag_fit(const DensityMatrix& rho, const SolverOptions& opts,
                            Constraint cons, std::optional<double> decide_threshold) {
    if (opts.max_iterations <= 0 || opts.target_accuracy <= 0.0)
        throw validation_error("solver options: max_iterations and target_accuracy must be positive");
    const int n = rho.dim();
    if (n > 64) throw validation_error("solver supports dimensions up to 64");

    const ComplexMatrix& R = rho.matrix();
    double F_best = std::numeric_limits<double>::infinity();
    std::vector<double> d_best(n, 0.0);
    double L_best = 0.0; // trace norms are nonnegative
    int iterations = 0;

    SolveOutcome out;
    auto decided = [&]() -> bool {
        if (!decide_threshold) return false;
        if (L_best >= *decide_threshold) {
            out.decision = +1;
            return true;
        }
        if (F_best < *decide_threshold) {
            out.decision = -1;
            return true;
        }
        return false;
    };
    auto certified = [&]() { return F_best - L_best <= opts.target_accuracy; };

    auto starts = starting_points(rho, cons, 1 + std::max(0, opts.restarts));
    for (auto& start : starts) {
        if (cons == Constraint::orthant)
            project_orthant(start);
        else
            project_simplex(start);
    }

    // Probe phase: evaluate every start with full dual extraction before any
    // iteration. Closed-form starts and the d = 0 certificates usually settle
    // the solve here.
    bool done = false;
    for (const auto& start : starts) {
        ++iterations;
        const Iterate it = analyze(rho, start);
        if (it.value < F_best) {
            F_best = it.value;
            d_best = start;
        }
        const double bound = (cons == Constraint::orthant)
                                 ? bound_orthant_full(it, R, start, /*with_pocs=*/true)
                                 : bound_simplex(it, R);
        L_best = std::max(L_best, bound);
        if (decided() || certified()) {
            done = true;
            break;
        }
    }

    const int per_start = std::max(1, (opts.max_iterations - iterations) /
                                          static_cast<int>(starts.size()));

    for (const auto& start : starts) {
        if (done) break;
        std::vector<double> d = start;

        double beta = 1.0; // Polyak relaxation, halved while progress stalls
        int since_improvement = 0;
        double stall_reference = std::numeric_limits<double>::infinity();
        int stall_counter = 0;

        for (int t = 1; t <= per_start; ++t) {
            ++iterations;
            const Iterate it = analyze(rho, d);
            const Partition p = partition(it, kZeroEig);

            const bool improved = it.value < F_best - 1e-15;
            if (it.value < F_best) {
                F_best = it.value;
                d_best = d;
            }

            double bound;
            if (cons == Constraint::orthant) {
                bound = bound_orthant_cheap(it, p, R);
                if (improved || t % 10 == 0)
                    bound = std::max(bound,
                                     bound_orthant_full(it, R, d, /*with_pocs=*/(t % 50 == 0)));
            } else {
                bound = bound_simplex(it, R);
            }
            L_best = std::max(L_best, bound);

            if (decided() || certified()) {
                done = true;
                break;
            }

            // Stall: negligible best-value progress over a 200-iteration
            // window ends this start; the polish phase below refines.
            if (F_best < stall_reference - 1e-12 * std::max(1.0, F_best)) {
                stall_reference = F_best;
                stall_counter = 0;
            } else if (++stall_counter >= 200) {
                break;
            }

            double gnorm2 = 0.0;
            for (int i = 0; i < n; ++i) gnorm2 += p.w[i] * p.w[i];
            if (gnorm2 <= 1e-28) {
                // Zero subgradient certifies optimality of this iterate.
                L_best = std::max(L_best, it.value - kBoundSlack);
                if (it.value < F_best) {
                    F_best = it.value;
                    d_best = d;
                }
                decided();
                done = true;
                break;
            }

            double step;
            if (opts.step_schedule == StepSchedule::polyak) {
                step = beta * (it.value - L_best) / gnorm2;
                if (improved) {
                    beta = 1.0;
                    since_improvement = 0;
                } else if (++since_improvement >= 50) {
                    beta = std::max(0.05, beta * 0.5);
                    since_improvement = 0;
                }
            } else {
                step = 0.3 / (std::sqrt(static_cast<double>(t)) * std::sqrt(gnorm2));
            }

            for (int i = 0; i < n; ++i) d[i] += step * p.w[i];
            if (cons == Constraint::orthant)
                project_orthant(d);
            else
                project_simplex(d);
        }
    }

    // Polish phase: exact line searches plus eps-subdifferential descent at
    // the incumbent, with deep certificate passes in between.
    if (!done) {
        for (int round = 0; round < 3 && !done; ++round) {
            if (cons == Constraint::orthant) {
                coordinate_polish(rho, d_best, F_best, 4, iterations);
                epsilon_descent(rho, R, d_best, F_best, L_best, 25, iterations);
            } else {
                simplex_pair_polish(rho, d_best, F_best, 4, iterations);
            }
            const Iterate it = analyze(rho, d_best);
            ++iterations;
            L_best = std::max(L_best,
                              cons == Constraint::orthant
                                  ? bound_orthant_full(it, R, d_best, /*with_pocs=*/true)
                                  : bound_simplex(it, R));
            if (decided() || certified()) done = true;
        }
    }

    out.result.value = F_best;
    out.result.diagonal = d_best;
    out.result.iterations = iterations;
    out.result.best_lower_bound = L_best;
    out.result.converged = certified();
    if (!out.decision && decide_threshold) {
        if (L_best >= *decide_threshold)
            out.decision = +1;
        else if (F_best < *decide_threshold)
            out.decision = -1;
    }
    return out;
}

} // namespace

SolverResult mod_trace_distance(const DensityMatrix& rho, const SolverOptions& opts) {
    return solve_diag_fit(rho, opts, Constraint::orthant, std::nullopt).result;
}

SolverResult trace_distance_coherence(const DensityMatrix& rho, const SolverOptions& opts) {
    return solve_diag_fit(rho, opts, Constraint::simplex, std::nullopt).result;
}

std::pair<double, std::vector<double>> subgradient_step(const DensityMatrix& rho,
                                                        const std::vector<double>& d) {
    if (static_cast<int>(d.size()) != rho.dim())
        throw validation_error("subgradient_step: dimension mismatch");
    for (double v : d)
        if (v < 0.0) throw validation_error("subgradient_step: d must be nonnegative");
    const Iterate it = analyze(rho, d);
    const Partition p = partition(it, kZeroEig);
    std::vector<double> g(p.w.size());
    for (size_t i = 0; i < g.size(); ++i) g[i] = -p.w[i];
    return {it.value, g};
}

UnitClass classify_unit(const DensityMatrix& rho, double classification_tol,
                        const SolverOptions& opts) {
    const double threshold = 1.0 - classification_tol;
    const SolveOutcome out = solve_diag_fit(rho, opts, Constraint::orthant, threshold);
    if (out.decision > 0) return UnitClass::hit;
    if (out.decision < 0) return UnitClass::miss;
    if (out.result.converged) return out.result.value >= threshold ? UnitClass::hit : UnitClass::miss;
    return UnitClass::undecided;
}

CrossValidationReport cross_validate(const std::vector<int>& dims, int samples_per_dim,
                                     std::uint64_t seed, const SolverOptions& opts) {
    CrossValidationReport rep;
    std::uint64_t stream_index = 0;
    for (int n : dims) {
        if (n < 2) throw validation_error("cross_validate: dims must be >= 2");
        for (int s = 0; s < samples_per_dim; ++s) {
            RandomStream rng = RandomStream::substream(seed, stream_index++);

            if (n == 2) {
                const DensityMatrix rho = random_density(2, 2, rng);
                const double exact = qubit_mod_trace(rho);
                const double got = mod_trace_distance(rho, opts).value;
                rep.max_qubit_discrepancy = std::max(rep.max_qubit_discrepancy,
                                                     std::abs(got - exact));
                ++rep.qubit_samples;
            }

            const PureState x = haar_pure(n, rng);
            const double exact = pure_mod_trace(x);
            const double got = mod_trace_distance(DensityMatrix::from_pure(x), opts).value;
            rep.max_pure_discrepancy = std::max(rep.max_pure_discrepancy, std::abs(got - exact));
            ++rep.pure_samples;

            // Random diagonal (incoherent) state: solver must report ~0.
            std::vector<double> w(n);
            double tot = 0.0;
            for (int i = 0; i < n; ++i) {
                w[i] = -std::log(rng.uniform01_open());
                tot += w[i];
            }
            for (double& v : w) v /= tot;
            const DensityMatrix diag_state = DiagonalState(w).to_density();
            rep.max_incoherent_value = std::max(rep.max_incoherent_value,
                                                mod_trace_distance(diag_state, opts).value);
            ++rep.incoherent_samples;
        }
    }
    return rep;
}

} // namespace coherence
