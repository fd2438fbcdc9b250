// Acceptance suite: one pass/fail line per criterion, exit code = failures.
// Numeric gates are pinned here; nothing is calibrated at run time.
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rdspde/diagnostics.hpp"
#include "rdspde/haar.hpp"
#include "rdspde/io.hpp"
#include "rdspde/solver.hpp"
#include "rdspde/stats.hpp"

using namespace rdspde;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
    std::printf("%s criterion %2d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof(buf), f, args);
    va_end(args);
    return buf;
}

const std::vector<double> kScalarLambda{0.0};

// ---------------------------------------------------------------- criterion 1
void criterion_projection_suite() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto corpus = make_projection_corpus(1000, 20240817, 1.0, 8, 5);
    SuiteParams params;  // kappas 1..8, m {2,3}, alpha {0.1,0.25}, rtol 1e-9
    const auto rep = projection_inequality_suite(corpus, params, kScalarLambda);
    const double secs = seconds_since(t0);
    const bool pass = rep.violations == 0 && secs <= 60.0;
    report(1, pass,
           fmt("projection inequalities: %ld rows, %ld violations at rtol 1e-9, worst slack %.3g, "
               "W-stability constant %.3f, %.1f s (budget 60 s)",
               rep.rows, rep.violations, rep.worst_rel, rep.c_wstab, secs));
}

// ---------------------------------------------------------------- criterion 2
void criterion_projection_rate() {
    // f(t) = t, node-indexed on a fine grid
    PathSample ramp;
    ramp.grid = TimeGrid{1.0, 10};
    ramp.node_indexed = true;
    for (int k = 0; k <= ramp.grid.cells(); ++k) {
        Field f(1, 1);
        f.c[0] = ramp.grid.node(k);
        ramp.v.push_back(f);
    }
    bool pass = true;
    std::string detail = "P_k error rate on f(t)=t:";
    for (double alpha : {0.1, 0.25}) {
        const double w = frac_sobolev_norm(ramp, alpha, 2.0, 0.0, kScalarLambda, 2);
        std::vector<double> kappas, logerr;
        for (int kappa = 2; kappa <= 8; ++kappa) {
            const auto p = haar_project(ramp, kappa);
            const auto q = path_quadrature(ramp, 10, 2);
            const std::size_t per = q.f.size() / p.v.size();
            double acc = 0.0;
            for (std::size_t i = 0; i < q.f.size(); ++i) {
                const double d = q.f[i].c[0] - p.v[i / per].c[0];
                acc += q.w[i] * d * d;
            }
            const double err = std::sqrt(acc);
            if (err > std::pow(2.0, -alpha * kappa) * w) pass = false;  // the bound itself
            kappas.push_back(kappa);
            logerr.push_back(std::log2(err));
        }
        // least-squares slope of log2 err against kappa
        const std::size_t n = kappas.size();
        double mk = 0.0, me = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            mk += kappas[i] / n;
            me += logerr[i] / n;
        }
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            num += (kappas[i] - mk) * (logerr[i] - me);
            den += (kappas[i] - mk) * (kappas[i] - mk);
        }
        const double slope = num / den;
        if (!(slope <= -alpha + 0.02)) pass = false;
        detail += fmt(" [alpha=%.2f slope=%.3f]", alpha, slope);
    }
    report(2, pass, detail);
}

// ---------------------------------------------------------------- criterion 3
void criterion_noise_laws() {
    const auto t0 = std::chrono::steady_clock::now();
    bool pass = true;
    std::string detail;

    {  // (a) PRM count distribution vs Poisson(2)
        IntensitySpec spec;
        spec.kind = IntensitySpec::Kind::two_point;
        spec.rate = 2.0;
        const int n = 100000;
        std::vector<long> counts(12, 0);
        for (int i = 0; i < n; ++i) {
            const auto jumps = sample_prm(spec, 1.0, 424242, static_cast<std::uint64_t>(i));
            counts[std::min<std::size_t>(jumps.size(), 11)]++;
        }
        std::vector<double> expected(12, 0.0);
        double logp = -2.0, cum = 0.0;
        for (int k = 0; k <= 10; ++k) {
            expected[k] = n * std::exp(logp);
            cum += std::exp(logp);
            logp += std::log(2.0) - std::log1p(k);
        }
        expected[11] = n * (1.0 - cum);
        const auto gof = chi_square_gof(counts, expected);
        if (gof.p_value < 1e-3) pass = false;
        detail += fmt("poisson(2) gof p=%.4f; ", gof.p_value);
    }
    {  // (b) Wiener increment variance, tau = 0.25
        const TimeGrid grid{1.0, 2};
        const WienerSpec spec{1, {}};
        const int n = 100000;
        std::vector<double> sq(n);
        for (int i = 0; i < n; ++i) {
            const auto dw = sample_wiener(grid, spec, 99, static_cast<std::uint64_t>(i));
            sq[i] = dw[0] * dw[0];
        }
        const double var = tree_mean(sq);
        const double se = 0.25 * std::sqrt(2.0 / n);
        if (std::abs(var - 0.25) > 3.0 * se) pass = false;
        detail += fmt("wiener var dev %.2f se; ", std::abs(var - 0.25) / se);
    }
    {  // (c) compensated-integral means for three distinct step integrands
        const TimeGrid grid{1.0, 3};
        IntensitySpec spec;
        spec.kind = IntensitySpec::Kind::two_point;
        spec.rate = 4.0;
        spec.two_point_p = 0.65;
        const WienerSpec wiener{1, {}};
        std::vector<StepIntegrand> integrands;
        integrands.push_back([](int, double) {
            Field f(1, 1);
            f.c[0] = 1.0;
            return f;
        });
        integrands.push_back([](int, double z) {
            Field f(1, 1);
            f.c[0] = z;
            return f;
        });
        integrands.push_back([](int cell, double z) {
            Field f(1, 1);
            f.c[0] = (cell + 1) * z * std::abs(z);
            return f;
        });
        const int n = 30000;
        for (std::size_t fi = 0; fi < integrands.size(); ++fi) {
            std::vector<double> vals(n);
            for (int i = 0; i < n; ++i) {
                const auto noise = sample_noise(grid, 1, wiener, spec, 5150 + fi,
                                                static_cast<std::uint64_t>(i));
                vals[i] =
                    compensated_integral(integrands[fi], noise, spec, grid, 0.0, 1.0).c[0];
            }
            const double mean = tree_mean(vals);
            double var = 0.0;
            for (double v : vals) var += (v - mean) * (v - mean);
            var /= n - 1;
            const double se = std::sqrt(var / n);
            if (std::abs(mean) > 3.0 * se) pass = false;
            detail += fmt("comp%d dev %.2f se; ", static_cast<int>(fi), std::abs(mean) / se);
        }
    }
    const double secs = seconds_since(t0);
    if (secs > 120.0) pass = false;
    report(3, pass, "noise laws: " + detail + fmt("%.1f s (budget 120 s)", secs));
}

// ---------------------------------------------------------------- criterion 4
void criterion_zero_noise_reduction() {
    const DomainSpec dom{1, 1.0, 16};
    const SpectralWorkspace ws(dom);
    ModelSpec model;
    model.reaction = Reaction::kpp;
    model.rc = {1.0};
    model.diffusion = {0.02};
    Field w0(1, 16);
    w0.at(0, 0) = 0.3;
    w0.at(0, 1) = 0.1;
    w0.at(0, 2) = -0.05;

    auto run = [&](int kappa) {
        SolveConfig cfg;
        cfg.kappa = kappa;
        cfg.substeps = 1;
        NoiseRealization silent;
        silent.cells = cfg.grid().cells();
        silent.components = 1;
        silent.wiener_modes = 1;
        silent.dw.assign(static_cast<std::size_t>(silent.cells), 0.0);
        return forward_induction(model, silent, cfg, ws, w0, w0).wstar;
    };

    bool pass = true;
    std::vector<double> errs, ratios;
    for (int kappa = 4; kappa <= 7; ++kappa) {
        const auto coarse = run(kappa);
        const auto fine = run(kappa + 4);  // 16x finer reference
        const double rel = path_difference_norm(coarse, fine, 2.0, 0.0, ws.lambda()) /
                           bochner_norm(fine, 2.0, 0.0, ws.lambda());
        errs.push_back(rel);
        ratios.push_back(rel * (1 << kappa));  // err / tau, tau-consistency constant
    }
    double slope_sum = 0.0;
    for (std::size_t i = 1; i < errs.size(); ++i) slope_sum += std::log2(errs[i - 1] / errs[i]);
    const double slope = slope_sum / (errs.size() - 1);
    if (!(slope >= 0.8 && slope <= 1.2)) pass = false;
    double rmin = 1e300, rmax = 0.0;
    for (double r : ratios) {
        rmin = std::min(rmin, r);
        rmax = std::max(rmax, r);
    }
    if (!(rmax <= 2.0 * rmin)) pass = false;  // within 2x of a first-order bound
    report(4, pass,
           fmt("zero-noise kpp vs 16x reference: slope %.3f (want 1.0 +- 0.2), "
               "err/tau spread %.2fx (want <= 2x)",
               slope, rmax / rmin));
}

// ---------------------------------------------------------------- criterion 5
void criterion_self_consistency() {
    const auto t0 = std::chrono::steady_clock::now();
    const DomainSpec dom{1, 1.0, 8};
    const SpectralWorkspace ws(dom);
    SolveConfig cfg;
    cfg.kappa = 5;
    cfg.substeps = 4;
    ModelSpec model;
    model.reaction = Reaction::gierer_meinhardt;
    model.rc = {1.0, 1.0, 1.0, 1.0};
    model.diffusion = {0.01, 0.1};
    model.sigma = {NoiseCoeff::Kind::multiplicative, {0.2, 0.2}};
    model.jump = {NoiseCoeff::Kind::multiplicative, {0.08, 0.08}};
    IntensitySpec intensity;
    intensity.kind = IntensitySpec::Kind::two_point;
    intensity.rate = 4.0;
    const WienerSpec wiener{8, {}};
    Field w0(2, 8);
    w0.at(0, 0) = 0.8;
    w0.at(1, 0) = 0.9;

    double worst = 0.0;
    int failed = 0;
    for (int path = 0; path < 64; ++path) {
        const auto noise =
            sample_noise(cfg.grid(), 2, wiener, intensity, 31337, static_cast<std::uint64_t>(path));
        const auto fwd = forward_induction(model, noise, cfg, ws, w0, w0);
        if (fwd.failed) {
            ++failed;
            continue;
        }
        worst = std::max(worst,
                         self_consistency_residual(model, fwd.wstar, noise, cfg, ws, w0, w0));
    }
    const double secs = seconds_since(t0);
    const bool pass = failed == 0 && worst <= 1e-10 && secs <= 300.0;
    report(5, pass,
           fmt("forward-induction fixed point on 64 jump-driven paths: max residual %.3g "
               "(gate 1e-10), %d failed, %.1f s (budget 300 s)",
               worst, failed, secs));
}

// ---------------------------------------------------------------- criterion 6
void criterion_closed_form_recursion() {
    const DomainSpec dom{1, 1.0, 4};
    const SpectralWorkspace ws(dom);
    SolveConfig cfg;
    cfg.kappa = 3;
    cfg.substeps = 4;
    ModelSpec model;
    model.reaction = Reaction::gierer_meinhardt;  // state-affine linearization
    model.rc = {1.0, 1.0, 1.0, 1.0};
    model.diffusion = {0.0, 0.0};  // A = 0 keeps the displayed A-term exact
    model.sigma = {NoiseCoeff::Kind::additive, {0.3, 0.7}};
    model.jump = {NoiseCoeff::Kind::additive, {0.2, 0.1}};
    IntensitySpec intensity;
    intensity.kind = IntensitySpec::Kind::two_point;
    intensity.rate = 3.0;
    intensity.two_point_p = 0.7;
    const WienerSpec wiener{4, {}};
    const double tau = cfg.grid().dt();

    RngStream rng(616, 0, Substream::misc);
    double worst = 0.0;
    int states = 0;
    for (int trial = 0; states < 100; ++trial) {
        PathSample control;
        control.grid = cfg.grid();
        for (int k = 0; k < cfg.grid().cells(); ++k) {
            Field xi(2, 4);
            xi.at(0, 0) = rng.uniform(0.5, 2.0);
            xi.at(1, 0) = rng.uniform(0.5, 2.0);
            xi.at(0, 1) = 0.2 * rng.uniform(-1.0, 1.0);
            control.v.push_back(xi);
        }
        Field w0(2, 4);
        w0.at(0, 0) = rng.uniform(0.5, 2.0);
        w0.at(1, 0) = rng.uniform(0.5, 2.0);
        const auto noise = sample_noise(cfg.grid(), 2, wiener, intensity, 8800 + trial, 0);
        const auto r = solve_controlled(model, control, noise, cfg, ws, w0);
        if (r.failed) continue;
        for (int k = 0; k < cfg.grid().cells(); ++k, ++states) {
            Field rhs = r.nodes.v[k];
            const Field fb = linearized_reaction_field(model, control.v[k], r.cell_avg[k], ws);
            axpy(rhs, tau, fb);
            const auto mult = sigma_multipliers(model, r.nodes.v[k]);
            for (int i = 0; i < 2; ++i)
                for (int q = 0; q < 4; ++q)
                    rhs.at(i, q) += mult[static_cast<std::size_t>(i) * 4 + q] * noise.dW(k, i, q);
            const Field zeta = compensated_integral(
                [&](int, double z) { return jump_coeff_eval(model, r.nodes.v[k], z, dom); }, noise,
                intensity, cfg.grid(), cfg.grid().node(k), cfg.grid().node(k + 1));
            axpy(rhs, 1.0, zeta);
            for (std::size_t i = 0; i < rhs.c.size(); ++i)
                worst = std::max(worst, std::abs(rhs.c[i] - r.nodes.v[k + 1].c[i]));
        }
    }
    report(6, worst <= 1e-9,
           fmt("closed-form recursion on %d random states: max deviation %.3g (gate 1e-9)",
               states, worst));
}

// ---------------------------------------------------------------- criterion 7
void criterion_adaptedness() {
    const DomainSpec dom{1, 1.0, 4};
    const SpectralWorkspace ws(dom);
    SolveConfig cfg;
    cfg.kappa = 4;
    ModelSpec model;
    model.reaction = Reaction::gierer_meinhardt;
    model.rc = {1.0, 1.0, 1.0, 1.0};
    model.diffusion = {0.01, 0.05};
    model.sigma = {NoiseCoeff::Kind::multiplicative, {0.2, 0.2}};
    model.jump = {NoiseCoeff::Kind::multiplicative, {0.1, 0.1}};
    IntensitySpec intensity;
    intensity.rate = 6.0;
    const WienerSpec wiener{4, {}};
    Field w0(2, 4);
    w0.at(0, 0) = 0.8;
    w0.at(1, 0) = 0.9;
    const auto control = PathSample::constant(cfg.grid(), w0);

    const auto a = sample_noise(cfg.grid(), 2, wiener, intensity, 2718, 0);
    const auto ra = solve_controlled(model, control, a, cfg, ws, w0);
    bool pass = true;
    for (int k = 0; k < cfg.grid().cells() && pass; ++k) {
        NoiseRealization b = a;
        for (int c = k; c < b.cells; ++c)
            for (int i = 0; i < 2; ++i)
                for (int q = 0; q < 4; ++q)
                    b.dw[(static_cast<std::size_t>(c) * 2 + i) * 4 + q] = -7.0 + c - i + q;
        const double tk = cfg.grid().node(k);
        std::erase_if(b.jumps, [&](const JumpEvent& j) { return j.time > tk; });
        const auto rb = solve_controlled(model, control, b, cfg, ws, w0);
        for (int node = 0; node <= k; ++node)
            if (ra.nodes.v[node].c != rb.nodes.v[node].c) pass = false;
    }
    report(7, pass, "adaptedness: prefix-agreeing noise gives bit-identical prefix output, "
                    "exhaustive over k at kappa=4");
}

// ---------------------------------------------------------------- criterion 8
void criterion_moment_uniformity() {
    bool pass = true;
    std::string detail;
    {  // deterministic KPP across kappa
        const DomainSpec dom{1, 1.0, 8};
        ModelSpec model;
        model.reaction = Reaction::kpp;
        model.rc = {1.0};
        model.diffusion = {0.01};
        const WienerSpec wiener{1, {}};
        IntensitySpec off;
        off.rate = 0.0;
        SolveConfig base;
        base.substeps = 8;
        base.ensemble = 2;
        Field w0(1, 8);
        w0.at(0, 0) = 0.95;
        const std::vector<int> kappas{4, 5, 6, 7};
        const auto rows = kappa_refinement_study(model, dom, wiener, off, base, kappas, w0, 3, 0);
        double lo = 1e300, hi = 0.0;
        for (const auto& r : rows) {
            lo = std::min(lo, r.m1_x);
            hi = std::max(hi, r.m1_x);
        }
        const double spread = (hi - lo) / lo;
        if (!(spread <= 0.02)) pass = false;
        detail += fmt("deterministic kpp m1 spread %.4f (gate 0.02); ", spread);
    }
    {  // stochastic Gierer-Meinhardt against the frozen regression baseline
        const DomainSpec dom{1, 1.0, 8};
        ModelSpec model;
        model.reaction = Reaction::gierer_meinhardt;
        model.rc = {1.0, 1.0, 1.0, 1.0};
        model.diffusion = {0.01, 0.1};
        model.sigma = {NoiseCoeff::Kind::multiplicative, {0.1, 0.1}};
        model.jump = {NoiseCoeff::Kind::multiplicative, {0.05, 0.05}};
        const WienerSpec wiener{8, {}};
        IntensitySpec intensity;
        intensity.rate = 2.0;
        SolveConfig base;
        base.substeps = 4;
        base.ensemble = 64;
        Field w0(2, 8);
        w0.at(0, 0) = 0.8;
        w0.at(1, 0) = 0.9;
        const std::vector<int> kappas{4, 5, 6};
        const auto rows =
            kappa_refinement_study(model, dom, wiener, intensity, base, kappas, w0, 1123, 0);
        detail += "gm m1:";
        // regression baseline measured at seed 1123 and frozen
        const double frozen[] = {1.385529, 1.373787, 1.376395};
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (!(rows[i].m1_x <= frozen[i] * 1.10)) pass = false;
            detail += fmt(" k=%d %.6f<=%.6f", rows[i].kappa, rows[i].m1_x, frozen[i] * 1.10);
        }
    }
    report(8, pass, "moment uniformity: " + detail);
}

// ---------------------------------------------------------------- criterion 9
void criterion_law_machinery() {
    const DomainSpec dom{1, 1.0, 4};
    const SpectralWorkspace ws(dom);
    SolveConfig cfg;
    cfg.kappa = 4;
    cfg.substeps = 1;
    cfg.ensemble = 256;
    const WienerSpec wiener{4, {}};
    IntensitySpec off;
    off.rate = 0.0;
    Field w0(1, 4);

    auto pure_noise = [&](double sigma, std::uint64_t seed) {
        ModelSpec model;
        model.reaction = Reaction::kpp;
        model.rc = {0.0};
        model.diffusion = {0.0};
        model.sigma = {NoiseCoeff::Kind::additive, {sigma}};
        PathEnsemble e;
        e.grid = cfg.grid();
        for (int i = 0; i < cfg.ensemble; ++i) {
            const auto noise =
                sample_noise(cfg.grid(), 1, wiener, off, seed, static_cast<std::uint64_t>(i));
            e.paths.push_back(
                discretized_operator(model, PathSample::constant(cfg.grid(), w0), noise, cfg, ws,
                                     w0, w0));
            e.seeds.push_back(i);
        }
        return e;
    };

    const BatterySpec battery;
    bool pass = true;
    std::string detail;

    const auto s1a = pure_noise(1.0, 1001);
    const auto s1b = pure_noise(1.0, 1001);  // identical seed
    const double zero = empirical_law_distance(s1a, s1b, battery, ws.lambda());
    if (zero != 0.0) pass = false;
    detail += fmt("identical-seed distance %.3g; ", zero);

    const auto s1c = pure_noise(1.0, 2002);  // independent, same law
    const auto same = law_permutation_test(s1a, s1c, battery, ws.lambda(), 1e-3, 1000, 7);
    if (same.significant) pass = false;
    detail += fmt("same-law perm p=%.4f; ", same.p_value);

    const auto s2 = pure_noise(2.0, 3003);
    const auto diff = law_permutation_test(s1a, s2, battery, ws.lambda(), 1e-3, 1000, 7);
    if (!diff.significant) pass = false;
    detail += fmt("sigma 1 vs 2 separated (obs %.4f > q %.4f)", diff.observed, diff.quantile);

    report(9, pass, "law machinery: " + detail);
}

// --------------------------------------------------------------- criterion 10
void criterion_determinism() {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "rdspde_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const auto config = dir / "config.ini";
    {
        std::ofstream out(config);
        out << "[model]\nreaction = gierer_meinhardt\ncoeffs = 1,1,1,1\ndiffusion = 0.01,0.1\n"
            << "sigma = multiplicative\nsigma_coeffs = 0.1,0.1\n"
            << "jump = multiplicative\njump_coeffs = 0.05,0.05\n"
            << "[domain]\nmodes = 8\n[initial]\nvalues = 0.8,0.9\n"
            << "[noise]\nwiener_modes = 8\nrate = 2.0\n"
            << "[solver]\nkappa = 4\nsubsteps = 2\nensemble = 32\nmode = picard\nmax_sweeps = 3\n"
            << "[run]\nseed = 99\n";
    }
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };

    bool pass = true;
    std::string detail = "library runs";
    const char* cli = std::getenv("RDSPDE_CLI");
    auto run_once = [&](const std::string& out_dir, int threads) {
        if (cli && *cli) {
            const std::string cmd = std::string(cli) + " run " + config.string() + " --out-dir " +
                                    out_dir + " --threads " + std::to_string(threads) +
                                    " > /dev/null 2>&1";
            const int status = std::system(cmd.c_str());
            return status != -1 && WEXITSTATUS(status) == 0;
        }
        CliOverrides ov;
        ov.out_dir = out_dir;
        ov.threads = threads;
        return run_experiment(config.string(), ov) == 0;
    };
    if (cli && *cli) detail = "cli runs";

    pass = run_once((dir / "r1").string(), 1) && pass;
    pass = run_once((dir / "r2").string(), 1) && pass;
    pass = run_once((dir / "r8").string(), 8) && pass;
    for (const char* f : {"moments.csv", "law_distance.csv", "tightness.csv", "manifest.txt"}) {
        const auto a = slurp(dir / "r1" / f);
        if (a.empty()) pass = false;
        if (a != slurp(dir / "r2" / f)) pass = false;
        if (a != slurp(dir / "r8" / f)) pass = false;
    }
    report(10, pass,
           detail + ": byte-identical columnar outputs across reruns and threads 1 vs 8");
}

}  // namespace

int main() {
    criterion_projection_suite();
    criterion_projection_rate();
    criterion_noise_laws();
    criterion_zero_noise_reduction();
    criterion_self_consistency();
    criterion_closed_form_recursion();
    criterion_adaptedness();
    criterion_moment_uniformity();
    criterion_law_machinery();
    criterion_determinism();
    std::printf("%d of 10 criteria failed\n", failures);
    return failures;
}
