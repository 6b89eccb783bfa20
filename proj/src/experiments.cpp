#include "coherence/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "coherence/closed_forms.hpp"
#include "coherence/state_io.hpp"

namespace coherence {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kZ99 = 2.5758293035489004; // two-sided 99% normal quantile

double log_binom_pmf(long long k, long long n, double p) {
    return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
           std::lgamma(static_cast<double>(n - k) + 1.0) + k * std::log(p) +
           (n - k) * std::log1p(-p);
}

// P(X <= m) for X ~ Bin(n, p); only called with a short tail on one side.
double binom_cdf(long long m, long long n, double p) {
    if (m < 0) return 0.0;
    if (m >= n) return 1.0;
    if (p <= 0.0) return 1.0;
    if (p >= 1.0) return 0.0;
    if (m <= n - m) {
        double s = 0.0;
        for (long long k = 0; k <= m; ++k) s += std::exp(log_binom_pmf(k, n, p));
        return std::min(1.0, s);
    }
    double s = 0.0;
    for (long long k = m + 1; k <= n; ++k) s += std::exp(log_binom_pmf(k, n, p));
    return std::max(0.0, 1.0 - s);
}

// Clopper-Pearson bounds at confidence 1 - alpha.
double cp_lower(long long hits, long long n, double alpha) {
    if (hits <= 0) return 0.0;
    double lo = 0.0, hi = static_cast<double>(hits) / n;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        // P(X >= hits | mid) vs alpha/2; increasing in mid
        if (1.0 - binom_cdf(hits - 1, n, mid) < alpha / 2.0)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

double cp_upper(long long hits, long long n, double alpha) {
    if (hits >= n) return 1.0;
    double lo = static_cast<double>(hits) / n, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        // P(X <= hits | mid) vs alpha/2; decreasing in mid
        if (binom_cdf(hits, n, mid) > alpha / 2.0)
            lo = mid;
        else
            hi = mid;
    }
    return hi;
}

void fill_interval(ProportionReport& rep) {
    if (rep.samples <= 0) return;
    rep.estimate = static_cast<double>(rep.hits) / static_cast<double>(rep.samples);
    if (rep.hits < 10 || rep.samples - rep.hits < 10) {
        const double lo = cp_lower(rep.hits, rep.samples, 0.01);
        const double hi = cp_upper(rep.hits, rep.samples, 0.01);
        rep.ci_halfwidth = 0.5 * (hi - lo);
    } else {
        rep.ci_halfwidth =
            kZ99 * std::sqrt(rep.estimate * (1.0 - rep.estimate) / static_cast<double>(rep.samples));
    }
    if (rep.exact) rep.flagged = std::abs(rep.estimate - *rep.exact) > 5.0 * rep.ci_halfwidth;
}

// Splits [0, samples) over worker_count() threads; classify returns
// +1 (hit), 0 (miss) or -1 (excluded). Counts are order-independent, so the
// result does not depend on the thread count.
template <typename Fn>
void parallel_tally(long long samples, long long& hits, long long& excluded, Fn&& classify) {
    const int workers =
        static_cast<int>(std::max<long long>(1, std::min<long long>(worker_count(), samples)));
    std::vector<long long> local_hits(workers, 0), local_excl(workers, 0);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&, t]() {
            const long long lo = samples * t / workers;
            const long long hi = samples * (t + 1) / workers;
            for (long long i = lo; i < hi; ++i) {
                const int r = classify(i);
                if (r > 0)
                    ++local_hits[t];
                else if (r < 0)
                    ++local_excl[t];
            }
        });
    }
    for (auto& th : pool) th.join();
    hits = 0;
    excluded = 0;
    for (int t = 0; t < workers; ++t) {
        hits += local_hits[t];
        excluded += local_excl[t];
    }
}

} // namespace

int worker_count() {
    if (const char* env = std::getenv("COHERENCE_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<int>(std::min(v, 256L));
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

double exact_proportion(int n) {
    if (n < 1) throw validation_error("exact_proportion: n must be >= 1");
    return 1.0 - std::ldexp(static_cast<double>(n), 1 - n);
}

double f_density(int n, double x) {
    if (n < 2) throw validation_error("f_density: n must be >= 2");
    if (x < 0.0) throw validation_error("f_density: x must be nonnegative");
    const double m = static_cast<double>(n - 1);
    return std::pow(m / (x + m), n);
}

ProportionReport mc_pure_proportion(int n, long long samples, std::uint64_t seed) {
    if (n < 2) throw validation_error("mc_pure_proportion: n must be >= 2");
    if (samples < 1) throw validation_error("mc_pure_proportion: samples must be >= 1");
    ProportionReport rep;
    rep.dim = n;
    rep.rank = 1;
    rep.samples = samples;
    rep.exact = exact_proportion(n);
    parallel_tally(samples, rep.hits, rep.excluded, [&](long long i) {
        RandomStream rng = RandomStream::substream(seed, static_cast<std::uint64_t>(i));
        return haar_pure(n, rng).inf_norm() <= kInvSqrt2 ? 1 : 0;
    });
    fill_interval(rep);
    return rep;
}

ProportionReport mc_rank_proportion(int n, int k, long long samples, std::uint64_t seed,
                                    double classification_tol, const SolverOptions& opts) {
    if (k < 1 || k > n) throw validation_error("mc_rank_proportion: need 1 <= k <= n");
    if (samples < 1) throw validation_error("mc_rank_proportion: samples must be >= 1");
    ProportionReport rep;
    rep.dim = n;
    rep.rank = k;
    if (k == 1) rep.exact = exact_proportion(n);
    long long hits = 0, excluded = 0;
    parallel_tally(samples, hits, excluded, [&](long long i) {
        RandomStream rng = RandomStream::substream(seed, static_cast<std::uint64_t>(i));
        const DensityMatrix rho = random_density(n, k, rng);
        switch (classify_unit(rho, classification_tol, opts)) {
            case UnitClass::hit: return 1;
            case UnitClass::miss: return 0;
            default: return -1;
        }
    });
    rep.hits = hits;
    rep.excluded = excluded;
    rep.samples = samples - excluded;
    fill_interval(rep);
    return rep;
}

std::uint64_t sweep_cell_seed(std::uint64_t master_seed, int n, int k) {
    return mix64(mix64(master_seed) +
                 mix64((static_cast<std::uint64_t>(n) << 32) | static_cast<std::uint64_t>(k)));
}

int fifty_percent_crossing(int k, long long samples, std::uint64_t seed,
                           double classification_tol) {
    if (k < 1) throw validation_error("fifty_percent_crossing: k must be >= 1");
    if (k == 1) {
        for (int n = 2; n <= 64; ++n)
            if (exact_proportion(n) >= 0.5) return n;
        return -1; // unreachable: the formula crosses at n = 4
    }
    for (int n = std::max(2, k); n <= 48; ++n) {
        const ProportionReport rep =
            mc_rank_proportion(n, k, samples, sweep_cell_seed(seed, n, k), classification_tol);
        if (rep.estimate >= 0.5) return n;
    }
    throw validation_error("fifty_percent_crossing: no crossing found up to n = 48");
}

namespace {

void update_check(PropertyCheck& chk, double violation, const std::string& serialized) {
    if (violation > chk.worst) {
        chk.worst = violation;
        chk.worst_input = serialized;
    }
}

void finish_suite(SuiteReport& rep) {
    for (auto& c : rep.checks) {
        c.pass = c.worst <= c.tolerance;
        rep.pass = rep.pass && c.pass;
    }
}

DensityMatrix random_mixed(int n, int k, RandomStream& rng) { return random_density(n, k, rng); }

} // namespace

SuiteReport block_additivity_suite(int trials, std::uint64_t seed) {
    if (trials < 1) throw validation_error("block_additivity_suite: trials must be >= 1");
    SuiteReport rep;
    PropertyCheck chk{"block_additivity", 0.0, 1e-5, true, ""};

    for (int t = 0; t < trials; ++t) {
        RandomStream rng = RandomStream::substream(seed, static_cast<std::uint64_t>(t));
        const double p1 = (t == 0) ? 1.0 : rng.uniform01();
        const double p2 = 1.0 - p1;

        double c1, c2;
        DensityMatrix rho1 = [&]() {
            if (t % 3 == 1) return DensityMatrix::from_pure(haar_pure(2, rng));
            return random_mixed(2, 2, rng);
        }();
        c1 = qubit_mod_trace(rho1);
        DensityMatrix rho2 = [&]() {
            if (t % 3 == 0) return random_mixed(2, 2, rng);
            return DensityMatrix::from_pure(haar_pure(3, rng));
        }();
        if (rho2.dim() == 2) {
            c2 = qubit_mod_trace(rho2);
        } else {
            // Rank-1 block: Thm 2 closed form on its eigenvector.
            const EigenDecomposition e = hermitian_eig(rho2.hermitian());
            std::vector<cplx> top(rho2.dim());
            for (int i = 0; i < rho2.dim(); ++i) top[i] = e.eigenvectors(i, 0);
            c2 = pure_mod_trace(PureState(std::move(top)));
        }

        const DensityMatrix whole = block_direct_sum(p1, rho1, p2, rho2);
        const double solved = mod_trace_distance(whole).value;
        const double violation = std::abs(solved - (p1 * c1 + p2 * c2));
        update_check(chk, violation, format_state(whole));
    }
    rep.checks.push_back(std::move(chk));
    finish_suite(rep);
    return rep;
}

SuiteReport proper_measure_suite(int trials, std::uint64_t seed) {
    if (trials < 1) throw validation_error("proper_measure_suite: trials must be >= 1");
    SuiteReport rep;
    PropertyCheck zero{"zero_on_incoherent", 0.0, 1e-8, true, ""};
    PropertyCheck positive{"positive_on_coherent", 0.0, 0.0, true, ""};
    PropertyCheck convex{"convexity", 0.0, 1e-5, true, ""};

    for (int t = 0; t < trials; ++t) {
        RandomStream rng = RandomStream::substream(seed, static_cast<std::uint64_t>(t));

        // Condition (1), incoherent side: diagonal states measure zero.
        const int nd = 2 + static_cast<int>(rng.next_u64() % 4);
        std::vector<double> w(nd);
        double tot = 0.0;
        for (double& v : w) {
            v = -std::log(rng.uniform01_open());
            tot += v;
        }
        for (double& v : w) v /= tot;
        const DensityMatrix diag_state = DiagonalState(w).to_density();
        update_check(zero, mod_trace_distance(diag_state).value, format_state(diag_state));

        // Condition (1), coherent side: strictly positive value.
        const DensityMatrix coh = DensityMatrix::from_pure(haar_pure(nd, rng));
        if (l1_coherence(coh) >= 1e-3) {
            const double v = mod_trace_distance(coh).value;
            update_check(positive, std::max(0.0, 1e-8 - v), format_state(coh));
        }

        // Condition (4): three-fold mixtures in dimension 4.
        const int n = 4;
        DensityMatrix parts[3] = {random_mixed(n, 2, rng), random_mixed(n, 4, rng),
                                  DensityMatrix::from_pure(haar_pure(n, rng))};
        double p[3];
        double ps = 0.0;
        for (double& v : p) {
            v = -std::log(rng.uniform01_open());
            ps += v;
        }
        for (double& v : p) v /= ps;

        ComplexMatrix mix(n, n);
        double rhs = 0.0;
        for (int j = 0; j < 3; ++j) {
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < n; ++c) mix(r, c) += p[j] * parts[j](r, c);
            rhs += p[j] * mod_trace_distance(parts[j]).value;
        }
        const DensityMatrix mixture(HermitianMatrix(std::move(mix)));
        const double lhs = mod_trace_distance(mixture).value;
        update_check(convex, std::max(0.0, lhs - rhs), format_state(mixture));
    }
    rep.checks.push_back(std::move(zero));
    rep.checks.push_back(std::move(positive));
    rep.checks.push_back(std::move(convex));
    finish_suite(rep);
    return rep;
}

SuiteReport gradient_check_suite(int trials, std::uint64_t seed) {
    if (trials < 1) throw validation_error("gradient_check_suite: trials must be >= 1");
    SuiteReport rep;
    PropertyCheck chk{"subgradient_vs_central_differences", 0.0, 1e-5, true, ""};
    const double eps = 1e-6;

    int done = 0;
    std::uint64_t attempt = 0;
    while (done < trials && attempt < static_cast<std::uint64_t>(trials) * 50) {
        RandomStream rng = RandomStream::substream(seed, attempt++);
        const int n = 2 + static_cast<int>(rng.next_u64() % 5);
        const DensityMatrix rho = random_mixed(n, n, rng);
        std::vector<double> d(n);
        for (double& v : d) v = rng.uniform01() / n;

        // Only differentiable points make a valid finite-difference oracle:
        // require the spectrum of rho - diag(d) to stay away from zero and
        // from collisions.
        const auto [value, grad] = subgradient_step(rho, d);
        ComplexMatrix A = rho.matrix();
        for (int i = 0; i < n; ++i) A(i, i) -= d[i];
        const EigenDecomposition e = hermitian_eig(HermitianMatrix(std::move(A)));
        bool degenerate = false;
        for (int i = 0; i < n; ++i) {
            if (std::abs(e.eigenvalues[i]) < 1e-4) degenerate = true;
            if (i + 1 < n && e.eigenvalues[i] - e.eigenvalues[i + 1] < 1e-4) degenerate = true;
        }
        if (degenerate) continue;
        ++done;

        for (int i = 0; i < n; ++i) {
            std::vector<double> dp = d, dm = d;
            dp[i] += eps;
            dm[i] = std::max(0.0, dm[i] - eps);
            const double fp = subgradient_step(rho, dp).first;
            const double fm = subgradient_step(rho, dm).first;
            const double fd = (fp - fm) / (dp[i] - dm[i]);
            update_check(chk, std::abs(fd - grad[i]), format_state(rho));
        }
    }
    rep.checks.push_back(std::move(chk));
    finish_suite(rep);
    return rep;
}

} // namespace coherence
