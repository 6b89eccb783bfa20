#include "coherence/closed_forms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace coherence {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kPi = 3.14159265358979323846;
} // namespace

std::vector<double> IncoherentWitness::scaled_diagonal() const {
    std::vector<double> d(delta.weights());
    for (double& v : d) v *= scale;
    return d;
}

double l1_coherence(const DensityMatrix& rho) {
    double s = 0.0;
    const int n = rho.dim();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) s += std::abs(rho(i, j));
    return s;
}

double qubit_mod_trace(const DensityMatrix& rho) {
    if (rho.dim() != 2) throw validation_error("qubit_mod_trace: state must have dim 2");
    return 2.0 * std::abs(rho(0, 1));
}

IncoherentWitness qubit_optimal_set(const DensityMatrix& rho, double mu) {
    if (rho.dim() != 2) throw validation_error("qubit_optimal_set: state must have dim 2");
    const double r12 = std::abs(rho(0, 1));
    const double r11 = rho(0, 0).real();
    const double r22 = rho(1, 1).real();
    // The residual [[mu, rho_12], [conj(rho_12), mu]] has trace norm
    // 2 max(|mu|, |rho_12|), so optimality needs |mu| <= |rho_12| on top of
    // the positivity cap mu <= min(rho_11, rho_22).
    const double hi = std::min({r12, r11, r22});
    if (mu < -r12 - 1e-12 || mu > hi + 1e-12)
        throw validation_error(
            "qubit_optimal_set: mu outside [-|rho_12|, min(|rho_12|, rho_11, rho_22)]");

    const double d1 = std::max(0.0, r11 - mu);
    const double d2 = std::max(0.0, r22 - mu);
    const double p = d1 + d2;
    if (p <= 0.0) // p = 0 encodes the zero matrix; delta is immaterial
        return IncoherentWitness{0.0, DiagonalState::uniform(2), mu};
    return IncoherentWitness{p, DiagonalState({d1 / p, d2 / p}), mu};
}

double pure_mod_trace(const PureState& x) {
    const double a = x.inf_norm();
    if (a <= kInvSqrt2) return 1.0;
    return 2.0 * a * std::sqrt(std::max(0.0, 1.0 - a * a));
}

IncoherentWitness pure_optimal_witness(const PureState& x) {
    const double a = x.inf_norm();
    if (a <= kInvSqrt2)
        return IncoherentWitness{0.0, DiagonalState::uniform(x.dim()), std::nullopt};
    const double p = 2.0 * a * a - 1.0;
    return IncoherentWitness{p, DiagonalState::point_mass(x.dim(), x.argmax_abs()), std::nullopt};
}

WitnessEigenpair witness_eigenpair(const PureState& x) {
    const int n = x.dim();
    for (int j = 0; j < n; ++j) {
        const cplx z = x[j];
        if (std::abs(z.imag()) > 1e-12 || z.real() < -1e-12)
            throw validation_error("witness_eigenpair: amplitudes must be real and nonnegative");
    }
    const double x1 = x[0].real();
    if (x1 <= kInvSqrt2)
        throw validation_error("witness_eigenpair: requires x_1 > 1/sqrt(2) (case b)");

    const double s = std::sqrt(std::max(0.0, 1.0 - x1 * x1));
    WitnessEigenpair out;
    out.lambda_plus = (1.0 - x1 * x1) + x1 * s;
    out.lambda_minus = (1.0 - x1 * x1) - x1 * s;
    out.v_plus.resize(n);
    out.v_minus.resize(n);
    out.v_plus[0] = s;
    out.v_minus[0] = -s;
    for (int j = 1; j < n; ++j) out.v_plus[j] = out.v_minus[j] = x[j].real();
    return out;
}

namespace {

// Greedy partition of the weights into three groups, largest weight first,
// each weight joining the currently lightest group. With max w_j <= 1/2 and
// total 1, no group sum can exceed 1/2.
void greedy_three_groups(const std::vector<double>& w, std::vector<int>& group,
                         double sums[3]) {
    const int n = static_cast<int>(w.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return w[i] > w[j]; });
    sums[0] = sums[1] = sums[2] = 0.0;
    group.assign(n, 0);
    for (int idx : order) {
        int g = 0;
        if (sums[1] < sums[g]) g = 1;
        if (sums[2] < sums[g]) g = 2;
        group[idx] = g;
        sums[g] += w[idx];
    }
}

// Phases of three vectors with lengths a, b, c that close into a triangle.
void triangle_phases(double a, double b, double c, double phase[3]) {
    phase[0] = 0.0;
    if (b <= 1e-15 && c <= 1e-15) { // a must be ~0 as well; nothing to close
        phase[1] = phase[2] = 0.0;
        return;
    }
    if (a <= 1e-15) { // two sides must be antipodal and equal
        phase[1] = 0.0;
        phase[2] = kPi;
        return;
    }
    if (b <= 1e-15) {
        phase[1] = 0.0;
        phase[2] = kPi; // c opposes a
        return;
    }
    double cb = (c * c - a * a - b * b) / (2.0 * a * b);
    cb = std::clamp(cb, -1.0, 1.0);
    phase[1] = std::acos(cb);
    const double re = a + b * cb;
    const double im = b * std::sin(phase[1]);
    if (std::hypot(re, im) <= 1e-15)
        phase[2] = 0.0;
    else
        phase[2] = std::atan2(-im, -re);
}

double closure_residual(const std::vector<double>& w, const std::vector<double>& theta) {
    double re = 0.0, im = 0.0;
    for (size_t j = 0; j < w.size(); ++j) {
        re += w[j] * std::cos(theta[j]);
        im += w[j] * std::sin(theta[j]);
    }
    return std::hypot(re, im);
}

void validate_polygon_weights(const std::vector<double>& w) {
    if (w.empty()) throw validation_error("close_phase_polygon: empty weight vector");
    double sum = 0.0, wmax = 0.0;
    for (double v : w) {
        if (v < 0.0) throw validation_error("close_phase_polygon: weights must be nonnegative");
        sum += v;
        wmax = std::max(wmax, v);
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw validation_error("close_phase_polygon: weights must sum to 1");
    if (wmax > 0.5 + 1e-12)
        throw validation_error("close_phase_polygon: max weight exceeds 1/2, closure impossible");
}

} // namespace

namespace detail {

std::vector<double> close_phase_fixed_point(const std::vector<double>& w, double tol,
                                            std::uint64_t seed) {
    validate_polygon_weights(w);
    const int n = static_cast<int>(w.size());
    RandomStream rng(seed);
    for (int attempt = 0; attempt < 64; ++attempt) {
        std::vector<double> theta(n);
        for (int j = 0; j < n; ++j) theta[j] = 2.0 * kPi * rng.uniform01();
        // Damped iteration: each vector turns toward the direction opposing
        // the resultant of the others.
        const double damp = 0.7;
        for (int it = 0; it < 4000; ++it) {
            double re = 0.0, im = 0.0;
            for (int j = 0; j < n; ++j) {
                re += w[j] * std::cos(theta[j]);
                im += w[j] * std::sin(theta[j]);
            }
            if (std::hypot(re, im) <= tol * 0.5) break;
            for (int j = 0; j < n; ++j) {
                if (w[j] <= 1e-15) continue;
                const double ore = re - w[j] * std::cos(theta[j]);
                const double oim = im - w[j] * std::sin(theta[j]);
                if (std::hypot(ore, oim) <= 1e-15) continue;
                const double target = std::atan2(-oim, -ore);
                double diff = target - theta[j];
                diff = std::remainder(diff, 2.0 * kPi);
                theta[j] += damp * diff;
                re = ore + w[j] * std::cos(theta[j]);
                im = oim + w[j] * std::sin(theta[j]);
            }
        }
        // Configurations drifting toward a line can often close exactly with
        // a two-phase assignment; snap and test before giving up on this
        // start.
        if (closure_residual(w, theta) > tol) {
            int ref = 0;
            for (int j = 1; j < n; ++j)
                if (w[j] > w[ref]) ref = j;
            std::vector<double> snapped(n);
            double axis_sum = 0.0;
            for (int j = 0; j < n; ++j) {
                const double s = std::cos(theta[j] - theta[ref]) >= 0.0 ? 1.0 : -1.0;
                snapped[j] = (s > 0.0) ? 0.0 : kPi;
                axis_sum += s * w[j];
            }
            if (std::abs(axis_sum) <= tol) theta = snapped;
        }
        if (closure_residual(w, theta) <= tol) {
            const double shift = theta[0];
            for (double& t : theta) t = std::remainder(t - shift, 2.0 * kPi);
            theta[0] = 0.0;
            return theta;
        }
    }
    throw validation_error("close_phase_fixed_point: failed to reach closure tolerance");
}

} // namespace detail

std::vector<double> close_phase_polygon(const std::vector<double>& w) {
    validate_polygon_weights(w);
    const int n = static_cast<int>(w.size());

    std::vector<int> group;
    double sums[3];
    greedy_three_groups(w, group, sums);

    if (std::max({sums[0], sums[1], sums[2]}) <= 0.5 + 1e-12) {
        double phase[3];
        triangle_phases(sums[0], sums[1], sums[2], phase);
        std::vector<double> theta(n);
        for (int j = 0; j < n; ++j) theta[j] = phase[group[j]];
        const double shift = theta[0];
        for (double& t : theta) t = std::remainder(t - shift, 2.0 * kPi);
        theta[0] = 0.0;
        if (closure_residual(w, theta) <= 1e-10) return theta;
    }
    // The greedy bound failed (not expected for valid inputs) or the triangle
    // construction lost too much precision.
    return detail::close_phase_fixed_point(w, 1e-10, 0x9E3779B9u);
}

namespace {

// Permutation + diagonal-phase transport of an n x n matrix:
// out[i][j] = d_i * in[s(i)][s(j)] * conj(d_j), where s maps original index
// to canonical index and d_i restores the original amplitude phase.
ComplexMatrix transport(const ComplexMatrix& in, const std::vector<int>& canon_of,
                        const std::vector<cplx>& d) {
    const int n = in.rows();
    ComplexMatrix out(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            out(i, j) = d[i] * in(canon_of[i], canon_of[j]) * std::conj(d[j]);
    return out;
}

std::vector<cplx> transport_vec(const std::vector<cplx>& in, const std::vector<int>& canon_of,
                                const std::vector<cplx>& d) {
    const int n = static_cast<int>(in.size());
    std::vector<cplx> out(n);
    for (int i = 0; i < n; ++i) out[i] = d[i] * in[canon_of[i]];
    return out;
}

} // namespace

DualCertificate dual_certificate_pure(const PureState& x) {
    const int n = x.dim();

    // Canonical order: indices sorted by decreasing |x_j| (stable), and the
    // unit phase of each original amplitude.
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
        return std::abs(x[i]) > std::abs(x[j]);
    });
    std::vector<int> canon_of(n); // canonical position of original index i
    for (int k = 0; k < n; ++k) canon_of[order[k]] = k;
    std::vector<cplx> d(n);
    for (int i = 0; i < n; ++i) {
        const double m = std::abs(x[i]);
        d[i] = (m > 1e-300) ? x[i] / m : cplx(1.0, 0.0);
    }

    std::vector<double> xc(n); // canonical amplitudes, real nonnegative descending
    for (int k = 0; k < n; ++k) xc[k] = std::abs(x[order[k]]);

    const HermitianMatrix half_id(0.5 * ComplexMatrix::identity(n));
    const double a = xc[0];

    if (a <= kInvSqrt2) {
        // Case (a): |y_j| = |x_j| with <x|y> = 0 via phase closure, then
        // Y = (|y><y| - |x><x|)/2.
        std::vector<double> w(n);
        for (int j = 0; j < n; ++j) w[j] = xc[j] * xc[j];
        const std::vector<double> theta = close_phase_polygon(w);

        std::vector<cplx> yc(n), xcv(n);
        for (int j = 0; j < n; ++j) {
            yc[j] = std::polar(xc[j], theta[j]);
            xcv[j] = xc[j];
        }
        ComplexMatrix Yc = outer(yc, yc) - outer(xcv, xcv);
        Yc *= cplx(0.5, 0.0);
        for (int j = 0; j < n; ++j) Yc(j, j) = 0.0; // exact zero diagonal

        DualCertificate cert{half_id, transport(Yc, canon_of, d), half_id,
                             CertCase::case_a, theta,
                             PureState(transport_vec(yc, canon_of, d))};
        return cert;
    }

    // Case (b): Y = (|v_-><v_-| - |v_+><v_+|)/2 from the witness eigenvectors.
    if (1.0 - a * a < 1e-17) {
        // Incoherent limit x -> e_1: value 0, certified by the trivial point.
        return DualCertificate{half_id, ComplexMatrix::zero(n, n), half_id,
                               CertCase::case_b, std::nullopt, std::nullopt};
    }
    const double s = std::sqrt(1.0 - a * a);
    const double norm = 1.0 / (std::sqrt(2.0) * s);
    std::vector<cplx> vp(n), vm(n);
    vp[0] = s * norm;
    vm[0] = -s * norm;
    for (int j = 1; j < n; ++j) vp[j] = vm[j] = xc[j] * norm;

    ComplexMatrix Yc = outer(vm, vm) - outer(vp, vp);
    Yc *= cplx(0.5, 0.0);
    for (int j = 0; j < n; ++j) Yc(j, j) = 0.0;

    return DualCertificate{half_id, transport(Yc, canon_of, d), half_id,
                           CertCase::case_b, std::nullopt,
                           PureState(transport_vec(vp, canon_of, d))};
}

double verify_dual(const DualCertificate& cert, const DensityMatrix& rho, double tol) {
    const int n = rho.dim();
    if (cert.X.dim() != n || cert.Z.dim() != n || cert.Y.rows() != n || cert.Y.cols() != n)
        throw validation_error("verify_dual: certificate blocks do not match the state dimension");

    for (int j = 0; j < n; ++j)
        if (std::abs(cert.Y(j, j)) > tol)
            throw validation_error("verify_dual: infeasible, diag(Y) = 0 violated");
    if (operator_norm(cert.X) > 0.5 + tol)
        throw validation_error("verify_dual: infeasible, ||X|| <= 1/2 violated");
    if (operator_norm(cert.Z) > 0.5 + tol)
        throw validation_error("verify_dual: infeasible, ||Z|| <= 1/2 violated");
    if (!psd_check(block_2x2(cert.X, cert.Y, cert.Z), tol))
        throw validation_error("verify_dual: infeasible, block [[X, Y], [Y*, Z]] >= 0 violated");

    // -tr(rho (Y + Y^dag)); real for Hermitian rho.
    cplx t = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            t += rho(i, j) * (cert.Y(j, i) + std::conj(cert.Y(i, j)));
    return -t.real();
}

} // namespace coherence
