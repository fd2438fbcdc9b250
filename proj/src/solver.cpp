#include "rdspde/solver.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "rdspde/diagnostics.hpp"
#include "rdspde/stats.hpp"

namespace rdspde {

namespace {

// drives one path cell by cell; shared by the controlled solve and the
// forward induction so that both produce bit-identical arithmetic
class CellStepper {
  public:
    CellStepper(const ModelSpec& model, const NoiseRealization& noise, const SolveConfig& config,
                const SpectralWorkspace& ws, const Field& w0)
        : model_(model), noise_(noise), config_(config), ws_(ws), w_(w0) {
        const TimeGrid grid = config.grid();
        tau_ = grid.dt();
        h_ = tau_ / config.substeps;
        const auto lambda = ws.lambda();
        exp_.resize(w0.c.size());
        for (int i = 0; i < w0.components; ++i)
            for (int k = 0; k < w0.modes; ++k)
                exp_[static_cast<std::size_t>(i) * w0.modes + k] =
                    std::exp(-model.diffusion[i] * lambda[k] * h_);
        fine_.reserve(static_cast<std::size_t>(grid.cells()) * config.substeps + 1);
        fine_.push_back(w_);
        nodes_.reserve(grid.cells() + 1);
        nodes_.push_back(w_);
    }

    // advance across cell `cell_` using the given frozen control value;
    // returns the cadlag step-path average over the cell
    Field step(const Field& control_value) {
        if (failed_) {  // path already lost; hold zero fields to the horizon
            const Field zero(w_.components, w_.modes);
            for (int j = 0; j < config_.substeps; ++j) fine_.push_back(zero);
            nodes_.push_back(zero);
            ++cell_;
            return zero;
        }
        const Field w_start = w_;
        Field avg(w_.components, w_.modes);
        const double inv = 1.0 / config_.substeps;
        for (int j = 0; j < config_.substeps; ++j) {
            axpy(avg, inv, w_);
            const Field fb = linearized_reaction_field(model_, control_value, w_, ws_);
            for (std::size_t i = 0; i < w_.c.size(); ++i)
                w_.c[i] = (w_.c[i] + h_ * fb.c[i]) * exp_[i];
            if (j + 1 < config_.substeps) fine_.push_back(w_);
        }
        // Wiener and compensated jump increments, coefficients frozen at the
        // cell-start state (left-point rule)
        const auto mult = sigma_multipliers(model_, w_start);
        const int kmax = std::min(noise_.wiener_modes, w_.modes);
        for (int i = 0; i < w_.components; ++i)
            for (int k = 0; k < kmax; ++k)
                w_.at(i, k) += mult[static_cast<std::size_t>(i) * w_.modes + k] * noise_.dW(cell_, i, k);
        const double t_hi = (cell_ + 1) * tau_;
        while (jump_ < noise_.jumps.size() && noise_.jumps[jump_].time <= t_hi) {
            const Field g = jump_coeff_eval(model_, w_start, noise_.jumps[jump_].mark, ws_.domain());
            axpy(w_, 1.0, g);
            ++jump_;
        }
        if (model_.jump.kind != NoiseCoeff::Kind::off && noise_.mark_mean != 0.0) {
            const Field comp = jump_coeff_eval(model_, w_start, noise_.mark_mean, ws_.domain());
            axpy(w_, -tau_, comp);
        }
        if (!failed_ && (!w_.finite() || !avg.finite())) {
            failed_ = true;
            failed_cell_ = cell_;
            for (double& x : w_.c) x = 0.0;
            for (double& x : avg.c) x = 0.0;
        }
        fine_.push_back(w_);
        nodes_.push_back(w_);
        ++cell_;
        return avg;
    }

    bool failed() const { return failed_; }
    int failed_cell() const { return failed_cell_; }
    std::vector<Field>& fine() { return fine_; }
    std::vector<Field>& nodes() { return nodes_; }

  private:
    const ModelSpec& model_;
    const NoiseRealization& noise_;
    const SolveConfig& config_;
    const SpectralWorkspace& ws_;
    Field w_;
    std::vector<double> exp_;
    std::vector<Field> fine_;
    std::vector<Field> nodes_;
    double tau_ = 0.0;
    double h_ = 0.0;
    int cell_ = 0;
    std::size_t jump_ = 0;
    bool failed_ = false;
    int failed_cell_ = -1;
};

void check_inputs(const ModelSpec& model, const NoiseRealization& noise, const SolveConfig& config,
                  const SpectralWorkspace& ws, const Field& w0) {
    model.validate();
    config.validate();
    if (w0.components != model.components())
        throw std::invalid_argument("solve: initial datum component count mismatch");
    if (w0.modes != ws.domain().total_modes())
        throw std::invalid_argument("solve: initial datum mode count mismatch");
    if (noise.cells != config.grid().cells())
        throw std::invalid_argument("solve: noise grid does not match kappa");
    if (noise.components != model.components())
        throw std::invalid_argument("solve: noise component count mismatch");
}

}  // namespace

SolveResult solve_controlled(const ModelSpec& model, const PathSample& control,
                             const NoiseRealization& noise, const SolveConfig& config,
                             const SpectralWorkspace& ws, const Field& w0) {
    check_inputs(model, noise, config, ws, w0);
    control.validate();
    if (control.node_indexed || control.grid.level != config.kappa ||
        control.grid.horizon != config.horizon)
        throw std::invalid_argument(
            "solve_controlled: control must be piecewise constant on the solver grid");
    const int cells = config.grid().cells();
    SolveResult r;
    r.cell_avg.reserve(cells);
    CellStepper stepper(model, noise, config, ws, w0);
    for (int k = 0; k < cells; ++k) r.cell_avg.push_back(stepper.step(control.v[k]));
    r.failed = stepper.failed();
    r.failed_cell = stepper.failed_cell();
    r.nodes.grid = config.grid();
    r.nodes.node_indexed = true;
    r.nodes.v = std::move(stepper.nodes());
    r.fine = std::move(stepper.fine());
    return r;
}

PathSample discretized_operator(const ModelSpec& model, const PathSample& control,
                                const NoiseRealization& noise, const SolveConfig& config,
                                const SpectralWorkspace& ws, const Field& w0, const Field& xi0,
                                SolveResult* detail) {
    SolveResult r = solve_controlled(model, control, noise, config, ws, w0);
    PathSample out;
    out.grid = config.grid();
    out.node_indexed = false;
    out.v.reserve(out.grid.cells());
    out.v.push_back(xi0);
    for (int k = 0; k + 1 < out.grid.cells(); ++k) out.v.push_back(r.cell_avg[k]);
    if (detail) *detail = std::move(r);
    return out;
}

ForwardResult forward_induction(const ModelSpec& model, const NoiseRealization& noise,
                                const SolveConfig& config, const SpectralWorkspace& ws,
                                const Field& w0, const Field& xi0) {
    check_inputs(model, noise, config, ws, w0);
    const int cells = config.grid().cells();
    ForwardResult r;
    r.wstar.grid = config.grid();
    r.wstar.node_indexed = false;
    r.wstar.v.reserve(cells);
    r.wstar.v.push_back(xi0);
    CellStepper stepper(model, noise, config, ws, w0);
    for (int k = 0; k < cells; ++k) {
        Field avg = stepper.step(r.wstar.v[k]);
        if (k + 1 < cells) r.wstar.v.push_back(std::move(avg));
    }
    r.failed = stepper.failed();
    return r;
}

double self_consistency_residual(const ModelSpec& model, const PathSample& wstar,
                                 const NoiseRealization& noise, const SolveConfig& config,
                                 const SpectralWorkspace& ws, const Field& w0, const Field& xi0) {
    const PathSample back = discretized_operator(model, wstar, noise, config, ws, w0, xi0);
    double worst = 0.0;
    for (std::size_t k = 0; k < wstar.v.size(); ++k)
        for (std::size_t i = 0; i < wstar.v[k].c.size(); ++i)
            worst = std::max(worst, std::abs(back.v[k].c[i] - wstar.v[k].c[i]));
    return worst;
}

void for_each_path(int n, int threads, const std::function<void(int)>& fn) {
#ifdef _OPENMP
    if (threads != 1) {
        const int use = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(use)
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
#endif
    for (int i = 0; i < n; ++i) fn(i);
}

void for_each_path_serial(int n, const std::function<void(int)>& fn) {
    for (int i = 0; i < n; ++i) fn(i);
}

namespace {

PathEnsemble collect(const TimeGrid& grid, std::vector<PathSample>&& paths,
                     std::vector<std::uint64_t>&& seeds, std::vector<char>&& ok, int prior_excluded) {
    PathEnsemble e;
    e.grid = grid;
    e.excluded = prior_excluded;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        if (ok[i]) {
            e.paths.push_back(std::move(paths[i]));
            e.seeds.push_back(seeds[i]);
        } else {
            ++e.excluded;
        }
    }
    return e;
}

}  // namespace

FixedPointReport fixed_point_iterate(const ModelSpec& model, const PathEnsemble& init,
                                     const SolveConfig& config, const SpectralWorkspace& ws,
                                     const WienerSpec& wiener, const IntensitySpec& intensity,
                                     const Field& w0, const Field& xi0, FixedPointMode mode,
                                     std::uint64_t seed, int threads) {
    config.validate();
    const auto lambda = ws.lambda();
    const auto adm = config.admissibility();
    FixedPointReport rep;

    const KRReport init_kr = kr_membership(init, adm, lambda);
    if (!init_kr.in_set) {
        rep.left_admissible = true;
        rep.phi_mean.push_back(init_kr.phi_mean);
        rep.in_set.push_back(0);
        rep.ensemble = init;
        return rep;
    }

    const TimeGrid grid = config.grid();

    if (mode == FixedPointMode::forward) {
        const int n = static_cast<int>(init.paths.size());
        std::vector<PathSample> paths(n);
        std::vector<std::uint64_t> seeds(n);
        std::vector<char> ok(n, 0);
        std::vector<double> residuals(n, 0.0);
        for_each_path(n, threads, [&](int i) {
            const auto noise = sample_noise(grid, model.components(), wiener, intensity, seed,
                                            static_cast<std::uint64_t>(i));
            auto fwd = forward_induction(model, noise, config, ws, w0, xi0);
            if (!fwd.failed) {
                residuals[i] =
                    self_consistency_residual(model, fwd.wstar, noise, config, ws, w0, xi0);
                paths[i] = std::move(fwd.wstar);
                ok[i] = 1;
            }
            seeds[i] = static_cast<std::uint64_t>(i);
        });
        rep.ensemble = collect(grid, std::move(paths), std::move(seeds), std::move(ok), 0);
        for (int i = 0; i < n; ++i) rep.self_residual = std::max(rep.self_residual, residuals[i]);
        rep.excluded = rep.ensemble.excluded;
        if (!rep.ensemble.paths.empty()) {
            const KRReport kr = kr_membership(rep.ensemble, adm, lambda);
            rep.phi_mean.push_back(kr.phi_mean);
            rep.in_set.push_back(kr.in_set ? 1 : 0);
        }
        rep.sweeps = 1;
        rep.converged = true;
        return rep;
    }

    // Picard on laws: resolve every path against fresh noise each sweep and
    // track the law distance between successive ensembles.
    PathEnsemble current = init;
    BatterySpec battery;
    battery.m = config.m;
    battery.rho = config.rho;
    for (int sweep = 1; sweep <= config.max_sweeps; ++sweep) {
        const int n = static_cast<int>(current.paths.size());
        if (n == 0) {
            rep.left_admissible = true;
            break;
        }
        std::vector<PathSample> paths(n);
        std::vector<std::uint64_t> seeds(n);
        std::vector<char> ok(n, 0);
        for_each_path(n, threads, [&](int i) {
            const std::uint64_t pid =
                (static_cast<std::uint64_t>(sweep) << 32) | static_cast<std::uint64_t>(i);
            const auto noise = sample_noise(grid, model.components(), wiener, intensity, seed, pid);
            SolveResult detail;
            PathSample vhat =
                discretized_operator(model, current.paths[i], noise, config, ws, w0, xi0, &detail);
            if (!detail.failed) {
                paths[i] = std::move(vhat);
                ok[i] = 1;
            }
            seeds[i] = pid;
        });
        PathEnsemble next = collect(grid, std::move(paths), std::move(seeds), std::move(ok),
                                    current.excluded);
        rep.excluded = next.excluded;
        if (next.paths.empty()) {
            rep.left_admissible = true;
            break;
        }
        const double dist = empirical_law_distance(current, next, battery, lambda);
        rep.law_distance.push_back(dist);
        const KRReport kr = kr_membership(next, adm, lambda);
        rep.phi_mean.push_back(kr.phi_mean);
        rep.in_set.push_back(kr.in_set ? 1 : 0);
        current = std::move(next);
        rep.sweeps = sweep;
        if (!kr.in_set) {
            rep.left_admissible = true;
            break;
        }
        if (dist < config.tolerance) {
            rep.converged = true;
            break;
        }
    }
    rep.ensemble = std::move(current);
    return rep;
}

std::vector<KappaRow> kappa_refinement_study(const ModelSpec& model, const DomainSpec& domain,
                                             const WienerSpec& wiener, const IntensitySpec& intensity,
                                             const SolveConfig& base, std::span<const int> kappas,
                                             const Field& w0, std::uint64_t seed, int threads) {
    for (std::size_t i = 1; i < kappas.size(); ++i)
        if (kappas[i] < kappas[i - 1])
            throw std::invalid_argument("kappa_refinement_study: kappa list must be nondecreasing");
    const SpectralWorkspace ws(domain);
    std::vector<KappaRow> rows;
    for (int kappa : kappas) {
        SolveConfig cfg = base;
        cfg.kappa = kappa;
        PathEnsemble init;
        init.grid = cfg.grid();
        init.paths.assign(cfg.ensemble, PathSample::constant(cfg.grid(), w0));
        init.seeds.assign(cfg.ensemble, 0);
        const auto rep = fixed_point_iterate(model, init, cfg, ws, wiener, intensity, w0, w0,
                                             FixedPointMode::forward, seed, threads);
        const auto table = moment_table(rep.ensemble, cfg.admissibility(), cfg.m0, cfg.m1,
                                        ws.lambda());
        KappaRow row;
        row.kappa = kappa;
        row.phi_mean = table.phi_mean;
        row.m0_xprime = table.m0_xprime;
        row.m0_se = table.m0_se;
        row.m1_x = table.m1_x;
        row.m1_se = table.m1_se;
        row.excluded = rep.excluded;
        rows.push_back(row);
    }
    return rows;
}

double path_difference_norm(const PathSample& a, const PathSample& b, double m, double rho,
                            std::span<const double> lambda) {
    if (a.node_indexed || b.node_indexed)
        throw std::invalid_argument("path_difference_norm: piecewise-constant paths only");
    const int level = std::max(a.grid.level, b.grid.level);
    PathSample diff;
    diff.grid = TimeGrid{a.grid.horizon, level};
    diff.node_indexed = false;
    const int pa = 1 << (level - a.grid.level);
    const int pb = 1 << (level - b.grid.level);
    diff.v.reserve(diff.grid.cells());
    for (int c = 0; c < diff.grid.cells(); ++c) diff.v.push_back(a.v[c / pa] - b.v[c / pb]);
    return bochner_norm(diff, m, rho, lambda);
}

}  // namespace rdspde
