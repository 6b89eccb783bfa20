// Command-line front end: compute coherence measures on state files, sample
// random states, run proportion sweeps, emit figure data, run verification
// suites. Exit codes: 0 ok, 1 verification failure, 2 parse error,
// 3 invariant violation.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "coherence/closed_forms.hpp"
#include "coherence/experiments.hpp"
#include "coherence/solver.hpp"
#include "coherence/state_io.hpp"

namespace {

using namespace coherence;

struct Range {
    int lo = 0, hi = 0;
};

Range parse_range(const std::string& text) {
    Range r;
    const size_t dots = text.find("..");
    try {
        if (dots == std::string::npos) {
            r.lo = r.hi = std::stoi(text);
        } else {
            r.lo = std::stoi(text.substr(0, dots));
            r.hi = std::stoi(text.substr(dots + 2));
        }
    } catch (const std::exception&) {
        throw CLI::ValidationError("expected 'A' or 'A..B', got '" + text + "'");
    }
    if (r.lo > r.hi) throw CLI::ValidationError("empty range '" + text + "'");
    return r;
}

std::ostream& open_output(std::ofstream& file, const std::string& path) {
    if (path.empty()) return std::cout;
    file.open(path);
    if (!file) throw validation_error("cannot open output file '" + path + "'");
    return file;
}

std::string fmt(double v) { return csv_double(v); }

void print_witness(const IncoherentWitness& wit) {
    std::cout << "witness_p: " << fmt(wit.scale) << "\n";
    std::cout << "witness_delta:";
    for (double w : wit.delta.weights()) std::cout << ' ' << fmt(w);
    std::cout << "\n";
    if (wit.mu) std::cout << "witness_mu: " << fmt(*wit.mu) << "\n";
}

void print_solver(const SolverResult& res, const char* prefix) {
    std::cout << prefix << "value: " << fmt(res.value) << "\n";
    std::cout << prefix << "diagonal:";
    for (double v : res.diagonal) std::cout << ' ' << fmt(v);
    std::cout << "\n";
    if (res.best_lower_bound)
        std::cout << prefix << "lower_bound: " << fmt(*res.best_lower_bound) << "\n";
    std::cout << prefix << "converged: " << (res.converged ? "yes" : "no") << "\n";
    std::cout << prefix << "iterations: " << res.iterations << "\n";
}

int cmd_compute(const std::string& state_path, const std::string& measure,
                const std::string& method, double tol) {
    const StateFile state = read_state_file(state_path);
    const bool is_pure = std::holds_alternative<PureState>(state);
    const DensityMatrix rho = is_pure
        ? DensityMatrix::from_pure(std::get<PureState>(state))
        : std::get<DensityMatrix>(state);

    std::cout << "kind: " << (is_pure ? "pure" : "density") << "\n";
    std::cout << "dim: " << rho.dim() << "\n";
    std::cout << "measure: " << measure << "\n";

    if (measure == "l1") {
        std::cout << "method: closed-form\n";
        std::cout << "value: " << fmt(l1_coherence(rho)) << "\n";
        return 0;
    }

    if (measure == "tr") {
        std::cout << "method: solver\n";
        const SolverResult res = trace_distance_coherence(rho);
        std::cout << "value: " << fmt(res.value) << "\n";
        print_solver(res, "solver_");
        return 0;
    }

    // mod-tr
    const bool qubit = !is_pure && rho.dim() == 2;
    const bool closed_available = is_pure || qubit;
    if (method == "closed-form" && !closed_available)
        throw validation_error("closed-form method requires a pure state or a qubit density");

    if (closed_available && method != "solver") {
        std::cout << "method: closed-form\n";
        if (is_pure) {
            const PureState& x = std::get<PureState>(state);
            const double value = pure_mod_trace(x);
            std::cout << "value: " << fmt(value) << "\n";
            print_witness(pure_optimal_witness(x));
            const DualCertificate cert = dual_certificate_pure(x);
            std::cout << "dual_lower_bound: " << fmt(verify_dual(cert, rho, 1e-10)) << "\n";
        } else {
            std::cout << "value: " << fmt(qubit_mod_trace(rho)) << "\n";
            print_witness(qubit_optimal_set(rho, 0.0));
        }
        if (method == "auto") {
            const SolverResult res = mod_trace_distance(rho);
            print_solver(res, "solver_");
        }
        return 0;
    }

    std::cout << "method: solver\n";
    SolverOptions opts;
    if (tol > 0.0) opts.target_accuracy = tol;
    const SolverResult res = mod_trace_distance(rho, opts);
    std::cout << "value: " << fmt(res.value) << "\n";
    double p = 0.0;
    for (double v : res.diagonal) p += v;
    std::cout << "witness_p: " << fmt(p) << "\n";
    std::cout << "witness_delta:";
    for (double v : res.diagonal) std::cout << ' ' << fmt(p > 0.0 ? v / p : 1.0 / res.diagonal.size());
    std::cout << "\n";
    print_solver(res, "solver_");
    return 0;
}

int cmd_sample(int dim, std::optional<int> rank, int samples, std::uint64_t seed,
               const std::string& out_prefix) {
    std::cout << "seed: " << seed << "\n";
    for (int i = 0; i < samples; ++i) {
        RandomStream rng = RandomStream::substream(seed, static_cast<std::uint64_t>(i));
        char name[512];
        std::snprintf(name, sizeof name, "%s_%03d.txt", out_prefix.c_str(), i);
        if (rank) {
            write_state_file(name, random_density(dim, *rank, rng));
        } else {
            write_state_file(name, haar_pure(dim, rng));
        }
        std::cout << name << "\n";
    }
    return 0;
}

void write_sweep_csv(std::ostream& out, const SweepConfig& cfg) {
    out << "n,k,samples,hits,estimate,ci_halfwidth,exact,seed\n";
    for (int k = cfg.rank_lo; k <= cfg.rank_hi; ++k) {
        for (int n = cfg.dim_lo; n <= cfg.dim_hi; ++n) {
            if (k > n) {
                std::cerr << "warning: skipping infeasible pair n=" << n << " k=" << k << "\n";
                out << n << ',' << k << ",0,0,,,," << cfg.seed << "\n";
                continue;
            }
            const std::uint64_t cell_seed = sweep_cell_seed(cfg.seed, n, k);
            const ProportionReport rep =
                (k == 1) ? mc_pure_proportion(n, cfg.samples, cell_seed)
                         : mc_rank_proportion(n, k, cfg.samples, cell_seed, cfg.classification_tol);
            if (rep.excluded > 0)
                std::cerr << "warning: n=" << n << " k=" << k << ": " << rep.excluded
                          << " samples excluded (solver undecided)\n";
            out << n << ',' << k << ',' << rep.samples << ',' << rep.hits << ','
                << csv_double(rep.estimate) << ',' << csv_double(rep.ci_halfwidth) << ',';
            if (rep.exact) out << csv_double(*rep.exact);
            out << ',' << cfg.seed << "\n";
        }
    }
}

int cmd_sweep(const SweepConfig& cfg, const std::string& out_path) {
    std::ofstream file;
    write_sweep_csv(open_output(file, out_path), cfg);
    return 0;
}

int cmd_figure(const std::string& which, const SweepConfig& cfg, const std::string& out_path) {
    std::ofstream file;
    std::ostream& out = open_output(file, out_path);
    if (which == "fig1") {
        out << "a,value\n";
        for (int i = 0; i <= 200; ++i) {
            const double a = static_cast<double>(i) / 200.0;
            const double v = (a <= 0.70710678118654752440)
                                 ? 1.0
                                 : 2.0 * a * std::sqrt(std::max(0.0, 1.0 - a * a));
            out << csv_double(a) << ',' << csv_double(v) << "\n";
        }
        return 0;
    }
    if (which == "fig2") {
        out << "n,proportion\n";
        for (int n = 2; n <= 20; ++n) out << n << ',' << csv_double(exact_proportion(n)) << "\n";
        return 0;
    }
    write_sweep_csv(out, cfg); // fig3
    return 0;
}

void report_suite(const SuiteReport& rep, bool& all_pass) {
    for (const auto& c : rep.checks) {
        std::cout << (c.pass ? "[pass] " : "[FAIL] ") << c.name << ": max residual "
                  << fmt(c.worst) << " (tolerance " << fmt(c.tolerance) << ")\n";
        if (!c.pass && !c.worst_input.empty()) {
            std::cout << "worst offender (replayable state file):\n" << c.worst_input;
        }
    }
    all_pass = all_pass && rep.pass;
}

int cmd_verify(const std::string& suite, int samples, std::uint64_t seed, Range dims) {
    bool all_pass = true;

    if (suite == "qubit") {
        SuiteReport rep;
        PropertyCheck chk{"solver_vs_qubit_formula", 0.0, 1e-6, true, ""};
        for (int t = 0; t < samples; ++t) {
            RandomStream rng = RandomStream::substream(seed, static_cast<std::uint64_t>(t));
            const DensityMatrix rho = random_density(2, 2, rng);
            const double diff = std::abs(mod_trace_distance(rho).value - qubit_mod_trace(rho));
            if (diff > chk.worst) {
                chk.worst = diff;
                chk.worst_input = format_state(rho);
            }
        }
        chk.pass = chk.worst <= chk.tolerance;
        rep.checks.push_back(chk);
        rep.pass = chk.pass;
        report_suite(rep, all_pass);
    } else if (suite == "pure-formula") {
        SuiteReport rep;
        PropertyCheck solver_chk{"solver_vs_pure_formula", 0.0, 1e-5, true, ""};
        PropertyCheck witness_chk{"witness_residual_vs_formula", 0.0, 1e-10, true, ""};
        std::uint64_t idx = 0;
        for (int n = dims.lo; n <= dims.hi; ++n) {
            for (int t = 0; t < samples; ++t) {
                RandomStream rng = RandomStream::substream(seed, idx++);
                const PureState x = haar_pure(n, rng);
                const DensityMatrix rho = DensityMatrix::from_pure(x);
                const double exact = pure_mod_trace(x);
                const double got = mod_trace_distance(rho).value;
                if (std::abs(got - exact) > solver_chk.worst) {
                    solver_chk.worst = std::abs(got - exact);
                    solver_chk.worst_input = format_state(x);
                }
                const IncoherentWitness wit = pure_optimal_witness(x);
                ComplexMatrix resid = rho.matrix();
                const std::vector<double> pd = wit.scaled_diagonal();
                for (int i = 0; i < n; ++i) resid(i, i) -= pd[i];
                const double tn = trace_norm(HermitianMatrix(std::move(resid)));
                if (std::abs(tn - exact) > witness_chk.worst) {
                    witness_chk.worst = std::abs(tn - exact);
                    witness_chk.worst_input = format_state(x);
                }
            }
        }
        solver_chk.pass = solver_chk.worst <= solver_chk.tolerance;
        witness_chk.pass = witness_chk.worst <= witness_chk.tolerance;
        rep.checks = {solver_chk, witness_chk};
        rep.pass = solver_chk.pass && witness_chk.pass;
        report_suite(rep, all_pass);
    } else if (suite == "duality") {
        SuiteReport rep;
        PropertyCheck feas{"certificate_feasibility", 0.0, 1e-10, true, ""};
        PropertyCheck phase{"phase_closure_residual", 0.0, 1e-10, true, ""};
        PropertyCheck gap{"primal_dual_gap", 0.0, 1e-6, true, ""};
        std::uint64_t idx = 0;
        for (int n = dims.lo; n <= dims.hi; ++n) {
            for (int t = 0; t < samples; ++t) {
                RandomStream rng = RandomStream::substream(seed, idx++);
                const PureState x = haar_pure(n, rng);
                const DensityMatrix rho = DensityMatrix::from_pure(x);
                double obj = 0.0;
                try {
                    const DualCertificate cert = dual_certificate_pure(x);
                    obj = verify_dual(cert, rho, 1e-10);
                    if (cert.phases) {
                        const PureState cx = canonicalize(x);
                        double re = 0.0, im = 0.0;
                        for (int j = 0; j < n; ++j) {
                            const double w = std::norm(cx[j]);
                            re += w * std::cos((*cert.phases)[j]);
                            im += w * std::sin((*cert.phases)[j]);
                        }
                        const double r = std::hypot(re, im);
                        if (r > phase.worst) {
                            phase.worst = r;
                            phase.worst_input = format_state(x);
                        }
                    }
                } catch (const validation_error&) {
                    feas.worst = 1.0;
                    feas.worst_input = format_state(x);
                    continue;
                }
                const double solved = mod_trace_distance(rho).value;
                const double g = std::max(std::abs(solved - obj),
                                          std::abs(pure_mod_trace(x) - obj));
                if (g > gap.worst) {
                    gap.worst = g;
                    gap.worst_input = format_state(x);
                }
            }
        }
        feas.pass = feas.worst <= feas.tolerance;
        phase.pass = phase.worst <= phase.tolerance;
        gap.pass = gap.worst <= gap.tolerance;
        rep.checks = {feas, phase, gap};
        rep.pass = feas.pass && phase.pass && gap.pass;
        report_suite(rep, all_pass);
    } else if (suite == "block-additivity") {
        report_suite(block_additivity_suite(samples, seed), all_pass);
    } else if (suite == "proper-measure") {
        report_suite(proper_measure_suite(samples, seed), all_pass);
    } else if (suite == "gradient") {
        report_suite(gradient_check_suite(samples, seed), all_pass);
    } else {
        throw CLI::ValidationError("unknown suite '" + suite + "'");
    }

    return all_pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"modified trace distance of coherence toolkit"};
    app.require_subcommand(1);

    std::string state_path, measure = "mod-tr", method = "auto", out_path;
    std::string dims_text = "2..12", ranks_text;
    long long samples = 0;
    std::uint64_t seed = 42;
    double tol = 0.0;

    auto* compute = app.add_subcommand("compute", "compute a coherence measure on a state file");
    compute->add_option("--state", state_path, "input state file")->required();
    compute->add_option("--measure", measure, "l1 | tr | mod-tr")
        ->check(CLI::IsMember({"l1", "tr", "mod-tr"}));
    compute->add_option("--method", method, "closed-form | solver | auto")
        ->check(CLI::IsMember({"closed-form", "solver", "auto"}));
    compute->add_option("--tol", tol, "solver target accuracy");

    auto* sample = app.add_subcommand("sample", "write random state files");
    std::string sample_dims = "2";
    std::string sample_ranks;
    sample->add_option("--dims", sample_dims, "dimension (single value)");
    sample->add_option("--ranks", sample_ranks, "rank (single value); omit for pure states");
    sample->add_option("--samples", samples, "number of states")->required();
    sample->add_option("--seed", seed, "master seed");
    sample->add_option("--out", out_path, "output file prefix")->required();

    auto* sweep = app.add_subcommand("sweep", "proportion of states with C' = 1 over (n, k)");
    sweep->add_option("--dims", dims_text, "dimension range A..B");
    sweep->add_option("--ranks", ranks_text, "rank range A..B");
    sweep->add_option("--samples", samples, "samples per (n, k) cell");
    sweep->add_option("--seed", seed, "master seed");
    sweep->add_option("--tol", tol, "classification tolerance");
    sweep->add_option("--out", out_path, "output CSV path (stdout if omitted)");

    auto* figure = app.add_subcommand("figure", "emit plot-ready CSV data");
    std::string which;
    figure->add_option("which", which, "fig1 | fig2 | fig3")
        ->required()
        ->check(CLI::IsMember({"fig1", "fig2", "fig3"}));
    figure->add_option("--dims", dims_text, "dimension range (fig3)");
    figure->add_option("--ranks", ranks_text, "rank range (fig3)");
    figure->add_option("--samples", samples, "samples per cell (fig3)");
    figure->add_option("--seed", seed, "master seed (fig3)");
    figure->add_option("--tol", tol, "classification tolerance (fig3)");
    figure->add_option("--out", out_path, "output CSV path (stdout if omitted)");

    auto* verify = app.add_subcommand("verify", "run a verification suite");
    std::string suite;
    verify->add_option("suite", suite,
                       "pure-formula | qubit | duality | block-additivity | proper-measure | gradient")
        ->required();
    verify->add_option("--samples", samples, "sample count");
    verify->add_option("--seed", seed, "master seed");
    verify->add_option("--dims", dims_text, "dimension range");

    CLI11_PARSE(app, argc, argv);

    try {
        if (compute->parsed()) return cmd_compute(state_path, measure, method, tol);
        if (sample->parsed()) {
            const Range d = parse_range(sample_dims);
            std::optional<int> rank;
            if (!sample_ranks.empty()) rank = parse_range(sample_ranks).lo;
            return cmd_sample(d.lo, rank, static_cast<int>(samples), seed, out_path);
        }
        if (sweep->parsed() || figure->parsed()) {
            SweepConfig cfg;
            const Range d = parse_range(dims_text);
            cfg.dim_lo = d.lo;
            cfg.dim_hi = d.hi;
            if (!ranks_text.empty()) {
                const Range r = parse_range(ranks_text);
                cfg.rank_lo = r.lo;
                cfg.rank_hi = r.hi;
            } else if (figure->parsed()) {
                cfg.rank_lo = 1;
                cfg.rank_hi = 3;
            }
            cfg.samples = samples > 0 ? samples : 1000;
            cfg.seed = seed;
            if (tol > 0.0) cfg.classification_tol = tol;
            if (sweep->parsed()) return cmd_sweep(cfg, out_path);
            return cmd_figure(which, cfg, out_path);
        }
        if (verify->parsed()) {
            int ns = static_cast<int>(samples);
            if (ns <= 0) ns = (suite == "qubit" || suite == "pure-formula" || suite == "duality")
                               ? 100 : 50;
            return cmd_verify(suite, ns, seed, parse_range(dims_text));
        }
    } catch (const parse_error& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const validation_error& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
