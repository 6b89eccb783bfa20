// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failed criteria. Heavier Monte Carlo settings than the unit tests; respects
// COHERENCE_THREADS.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "coherence/closed_forms.hpp"
#include "coherence/experiments.hpp"
#include "coherence/solver.hpp"
#include "coherence/state_io.hpp"

using namespace coherence;
using clock_type = std::chrono::steady_clock;

namespace {

int g_failures = 0;

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

void report(int criterion, bool pass, const std::string& detail, double secs) {
    std::printf("[%s] criterion %2d: %s  (%.1f s)\n", pass ? "PASS" : "FAIL", criterion,
                detail.c_str(), secs);
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

// --- criterion 1: qubit formula ------------------------------------------

void criterion_qubit() {
    const auto t0 = clock_type::now();
    double worst = 0.0;
    for (int s = 0; s < 500; ++s) {
        RandomStream rng = RandomStream::substream(1001, s);
        const DensityMatrix rho = random_density(2, 2, rng);
        worst = std::max(worst, std::abs(mod_trace_distance(rho).value - qubit_mod_trace(rho)));
    }
    const double secs = seconds_since(t0);
    report(1, worst <= 1e-6 && secs < 30.0,
           "qubit formula 2|rho_12|, 500 states, worst " + fmt(worst), secs);
}

// --- criterion 2: pure-state formula --------------------------------------

void criterion_pure() {
    const auto t0 = clock_type::now();
    double worst_solver = 0.0, worst_witness = 0.0;
    for (int n = 2; n <= 12; ++n) {
        for (int s = 0; s < 100; ++s) {
            RandomStream rng = RandomStream::substream(2000 + n, s);
            const PureState x = haar_pure(n, rng);
            const DensityMatrix rho = DensityMatrix::from_pure(x);
            const double exact = pure_mod_trace(x);

            worst_solver = std::max(worst_solver,
                                    std::abs(mod_trace_distance(rho).value - exact));

            const IncoherentWitness wit = pure_optimal_witness(x);
            ComplexMatrix resid = rho.matrix();
            const std::vector<double> pd = wit.scaled_diagonal();
            for (int i = 0; i < n; ++i) resid(i, i) -= pd[i];
            worst_witness = std::max(worst_witness,
                                     std::abs(trace_norm(HermitianMatrix(std::move(resid))) - exact));
        }
    }
    const double secs = seconds_since(t0);
    report(2, worst_solver <= 1e-5 && worst_witness <= 1e-10 && secs < 300.0,
           "pure formula, 100 states x n=2..12, solver worst " + fmt(worst_solver) +
               ", witness worst " + fmt(worst_witness),
           secs);
}

// --- criterion 3: duality --------------------------------------------------

void criterion_duality() {
    const auto t0 = clock_type::now();
    double worst_feas = 0.0, worst_phase = 0.0, worst_gap = 0.0;
    bool ok = true;
    for (int n = 2; n <= 12; ++n) {
        for (int s = 0; s < 100; ++s) {
            RandomStream rng = RandomStream::substream(2000 + n, s);
            const PureState x = haar_pure(n, rng);
            const DensityMatrix rho = DensityMatrix::from_pure(x);

            const DualCertificate cert = dual_certificate_pure(x);
            double feas = 0.0;
            for (int j = 0; j < n; ++j) feas = std::max(feas, std::abs(cert.Y(j, j)));
            feas = std::max(feas, std::max(0.0, operator_norm(cert.X) - 0.5));
            feas = std::max(feas, std::max(0.0, operator_norm(cert.Z) - 0.5));
            const EigenDecomposition be = hermitian_eig(block_2x2(cert.X, cert.Y, cert.Z));
            feas = std::max(feas, std::max(0.0, -be.eigenvalues.back()));
            worst_feas = std::max(worst_feas, feas);

            if (cert.phases) {
                const PureState cx = canonicalize(x);
                double re = 0.0, im = 0.0;
                for (int j = 0; j < n; ++j) {
                    re += std::norm(cx[j]) * std::cos((*cert.phases)[j]);
                    im += std::norm(cx[j]) * std::sin((*cert.phases)[j]);
                }
                worst_phase = std::max(worst_phase, std::hypot(re, im));
            }

            double obj = 0.0;
            try {
                obj = verify_dual(cert, rho, 1e-10);
            } catch (const validation_error&) {
                ok = false;
                continue;
            }
            worst_gap = std::max(worst_gap, std::abs(mod_trace_distance(rho).value - obj));
        }
    }
    const double secs = seconds_since(t0);
    report(3,
           ok && worst_feas <= 1e-10 && worst_phase <= 1e-10 && worst_gap <= 1e-6,
           "duality: feasibility worst " + fmt(worst_feas) + ", phase closure worst " +
               fmt(worst_phase) + ", primal-dual gap worst " + fmt(worst_gap),
           secs);
}

// --- criterion 4: exact proportion vs F-density tail -----------------------

void criterion_exact_formula() {
    const auto t0 = clock_type::now();
    double worst = 0.0;
    for (int n = 2; n <= 10; ++n) {
        // Simpson quadrature of the tail integral under u = (n-1)/(x+n-1).
        const double m = static_cast<double>(n - 1);
        auto g = [&](double u) {
            if (u <= 0.0) return (n == 2) ? m : 0.0; // limit of m * u^(n-2)
            const double x = m / u - m;
            return f_density(n, x) * m / (u * u);
        };
        const int segments = 8192;
        const double h = 0.5 / segments;
        double acc = g(0.0) + g(0.5);
        for (int i = 1; i < segments; ++i) acc += (i % 2 ? 4.0 : 2.0) * g(i * h);
        const double integral = acc * h / 3.0;
        // The tail integral is the per-coordinate probability; n mutually
        // exclusive events make up 1 - exact_proportion.
        worst = std::max(worst, std::abs(integral - std::ldexp(1.0, 1 - n)));
        worst = std::max(worst, std::abs(n * integral - (1.0 - exact_proportion(n))) / n);
    }
    const bool n19 = exact_proportion(19) > 0.9999;
    const double secs = seconds_since(t0);
    char p19[64];
    std::snprintf(p19, sizeof p19, "%.7f", exact_proportion(19));
    report(4, worst <= 1e-10 && n19,
           "tail integral vs 1 - exact_proportion, n=2..10, worst " + fmt(worst) +
               "; exact_proportion(19) = " + p19,
           secs);
}

// --- criterion 5: pure-state Monte Carlo -----------------------------------

void criterion_pure_mc() {
    const auto t0 = clock_type::now();
    const ProportionReport r2 = mc_pure_proportion(2, 100000, 42);
    const ProportionReport r4 = mc_pure_proportion(4, 100000, 42);
    const ProportionReport r10 = mc_pure_proportion(10, 100000, 42);
    const double d4 = std::abs(r4.estimate - 0.5);
    const double d10 = std::abs(r10.estimate - (1.0 - 10.0 / 512.0));
    const double secs = seconds_since(t0);
    report(5, r2.estimate == 0.0 && d4 <= 0.006 && d10 <= 0.002 && secs < 60.0,
           "pure MC: n=2 estimate " + fmt(r2.estimate) + ", n=4 off by " + fmt(d4) +
               ", n=10 off by " + fmt(d10),
           secs);
}

// --- criterion 6: Fig. 3 spot checks ---------------------------------------

void criterion_rank_spots() {
    const auto t0 = clock_type::now();
    struct Spot {
        int n, k;
        double expect, tol;
    };
    const Spot spots[] = {{5, 1, 0.6875, 0.02}, {10, 2, 0.816, 0.05}, {12, 3, 0.652, 0.05}};
    bool pass = true;
    std::string detail = "Fig.3 spots:";
    for (const Spot& sp : spots) {
        const ProportionReport rep = mc_rank_proportion(sp.n, sp.k, 5000, 42);
        const double diff = std::abs(rep.estimate - sp.expect);
        detail += " (n=" + std::to_string(sp.n) + ",k=" + std::to_string(sp.k) + ") off by " +
                  fmt(diff);
        if (rep.excluded > 0) detail += " [" + std::to_string(rep.excluded) + " excluded]";
        if (diff > sp.tol) {
            pass = false;
            detail += " EXCEEDS " + fmt(sp.tol) +
                      " -- first suspect is the random-mixed-state measure choice "
                      "(Ginibre-induced), which the paper leaves unspecified";
        }
    }
    const double secs = seconds_since(t0);
    report(6, pass && secs < 1800.0, detail, secs);
}

// --- criterion 7: fifty percent crossing -----------------------------------

void criterion_crossing() {
    const auto t0 = clock_type::now();
    const int n1 = fifty_percent_crossing(1, 2000, 42);
    const int n2 = fifty_percent_crossing(2, 2000, 42);
    const int n3 = fifty_percent_crossing(3, 2000, 42);
    const double r2 = static_cast<double>(n2) / 2.0;
    const double r3 = static_cast<double>(n3) / 3.0;
    const double secs = seconds_since(t0);
    report(7, n1 == 4 && r2 >= 3.0 && r2 <= 5.0 && r3 >= 3.0 && r3 <= 5.0,
           "crossings: k=1 -> " + std::to_string(n1) + ", k=2 -> " + std::to_string(n2) +
               " (ratio " + fmt(r2) + "), k=3 -> " + std::to_string(n3) + " (ratio " + fmt(r3) +
               ")",
           secs);
}

// --- criterion 8: proper-measure properties --------------------------------

void criterion_proper() {
    const auto t0 = clock_type::now();
    const SuiteReport blocks = block_additivity_suite(50, 42);
    const SuiteReport proper = proper_measure_suite(50, 42);
    double block_worst = blocks.checks[0].worst;
    double zero_worst = 0.0, convex_worst = 0.0;
    bool positive_ok = true;
    for (const auto& c : proper.checks) {
        if (c.name == "zero_on_incoherent") zero_worst = c.worst;
        if (c.name == "convexity") convex_worst = c.worst;
        if (c.name == "positive_on_coherent") positive_ok = c.pass;
    }
    const double secs = seconds_since(t0);
    report(8,
           block_worst <= 1e-5 && convex_worst <= 1e-5 && zero_worst <= 1e-8 && positive_ok,
           "block additivity worst " + fmt(block_worst) + ", convexity worst " +
               fmt(convex_worst) + ", incoherent-zero worst " + fmt(zero_worst),
           secs);
}

// --- criterion 9: gradient oracle ------------------------------------------

void criterion_gradient() {
    const auto t0 = clock_type::now();
    const SuiteReport rep = gradient_check_suite(100, 42);
    const double secs = seconds_since(t0);
    report(9, rep.pass, "subgradient vs central differences, 100 points, worst " +
                            fmt(rep.checks[0].worst),
           secs);
}

// --- criterion 10: byte-identical sweeps -----------------------------------

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_reproducible() {
    const auto t0 = clock_type::now();
#ifdef COHERENCE_CLI_PATH
    const std::string cli = COHERENCE_CLI_PATH;
    const std::string args = " sweep --dims 2..6 --ranks 1..2 --samples 500 --seed 42 --out ";
    bool pass = true;
    pass &= std::system(("COHERENCE_THREADS=1 " + cli + args + "/tmp/acc_sweep_a.csv 2>/dev/null")
                            .c_str()) == 0;
    pass &= std::system(("COHERENCE_THREADS=2 " + cli + args + "/tmp/acc_sweep_b.csv 2>/dev/null")
                            .c_str()) == 0;
    pass &= std::system(("COHERENCE_THREADS=7 " + cli + args + "/tmp/acc_sweep_c.csv 2>/dev/null")
                            .c_str()) == 0;
    const std::string a = slurp("/tmp/acc_sweep_a.csv");
    pass = pass && !a.empty() && a == slurp("/tmp/acc_sweep_b.csv") &&
           a == slurp("/tmp/acc_sweep_c.csv");
    report(10, pass, "sweep CSV byte-identical across COHERENCE_THREADS in {1, 2, 7}",
           seconds_since(t0));
#else
    report(10, false, "CLI path not wired into the build", seconds_since(t0));
#endif
}

} // namespace

int main() {
    std::printf("acceptance suite (threads: %d)\n", worker_count());
    criterion_qubit();
    criterion_pure();
    criterion_duality();
    criterion_exact_formula();
    criterion_pure_mc();
    criterion_rank_spots();
    criterion_crossing();
    criterion_proper();
    criterion_gradient();
    criterion_reproducible();
    if (g_failures == 0)
        std::printf("all criteria passed\n");
    else
        std::printf("%d criteria FAILED\n", g_failures);
    return g_failures;
}
