#include "rdspde/path.hpp"

#include <algorithm>
#include <cmath>

#include "rdspde/stats.hpp"

namespace rdspde {

void PathSample::validate() const {
    grid.validate();
    if (static_cast<int>(v.size()) != value_count())
        throw std::invalid_argument("PathSample: value count does not match grid");
    for (const auto& f : v)
        if (!f.same_shape(v.front())) throw std::invalid_argument("PathSample: ragged field shapes");
}

bool PathSample::finite() const {
    for (const auto& f : v)
        if (!f.finite()) return false;
    return true;
}

PathSample PathSample::constant(const TimeGrid& g, const Field& f, bool nodes) {
    PathSample p;
    p.grid = g;
    p.node_indexed = nodes;
    p.v.assign(nodes ? g.cells() + 1 : g.cells(), f);
    return p;
}

namespace {

int next_pow2_log(int subdiv) {
    int l = 0;
    while ((1 << l) < subdiv) ++l;
    return l;
}

// per-mode weights (1+lambda)^rho
std::vector<double> mode_weights(double rho, std::span<const double> lambda) {
    std::vector<double> w(lambda.size());
    for (std::size_t k = 0; k < lambda.size(); ++k)
        w[k] = rho == 0.0 ? 1.0 : std::pow(1.0 + lambda[k], rho);
    return w;
}

double field_norm_w(const Field& f, std::span<const double> w) {
    double s = 0.0;
    for (int i = 0; i < f.components; ++i) {
        const auto ci = f.comp(i);
        for (std::size_t k = 0; k < w.size(); ++k) s += w[k] * ci[k] * ci[k];
    }
    return std::sqrt(s);
}

double field_diff_norm_w(const Field& a, const Field& b, std::span<const double> w) {
    double s = 0.0;
    for (int i = 0; i < a.components; ++i) {
        const auto ca = a.comp(i);
        const auto cb = b.comp(i);
        for (std::size_t k = 0; k < w.size(); ++k) {
            const double d = ca[k] - cb[k];
            s += w[k] * d * d;
        }
    }
    return std::sqrt(s);
}

}  // namespace

PathQuadrature path_quadrature(const PathSample& path, int target_level, int subdiv) {
    path.validate();
    if (subdiv < 1) throw std::invalid_argument("path_quadrature: subdiv must be >= 1");
    const int L = path.grid.level;
    PathQuadrature q;
    q.horizon = path.grid.horizon;

    if (!path.node_indexed) {
        const int lr = std::min(20, std::max(L, target_level));
        const int cells = 1 << lr;
        const int per = 1 << (lr - L);
        const double dt = path.grid.horizon / cells;
        q.cells = cells;
        q.nodes_per_cell = 1;
        q.t.resize(cells);
        q.w.assign(cells, dt);
        q.f.reserve(cells);
        for (int c = 0; c < cells; ++c) {
            q.t[c] = dt * (c + 0.5);
            q.f.push_back(path.v[c / per]);
        }
        return q;
    }

    const int lr = std::min(20, std::max({L, target_level, L + next_pow2_log(subdiv)}));
    const int cells = 1 << lr;
    const double dt = path.grid.horizon / cells;
    const double coarse_dt = path.grid.dt();
    q.cells = cells;
    q.nodes_per_cell = 2;
    q.t.resize(2 * static_cast<std::size_t>(cells));
    q.w.assign(2 * static_cast<std::size_t>(cells), dt / 2.0);
    q.f.reserve(2 * static_cast<std::size_t>(cells));
    for (int c = 0; c < cells; ++c) {
        for (int e = 0; e < 2; ++e) {
            const double t = dt * (c + e);
            q.t[2 * static_cast<std::size_t>(c) + e] = t;
            // linear interpolation on the path's own grid
            double pos = t / coarse_dt;
            int k = std::min(path.grid.cells() - 1, static_cast<int>(pos));
            double frac = pos - k;
            Field f = path.v[k];
            const Field& f1 = path.v[k + 1];
            for (std::size_t i = 0; i < f.c.size(); ++i) f.c[i] += frac * (f1.c[i] - f.c[i]);
            q.f.push_back(std::move(f));
        }
    }
    return q;
}

double bochner_norm(const PathSample& path, double m, double rho, std::span<const double> lambda,
                    int subdiv) {
    if (!(m >= 1.0)) throw std::invalid_argument("bochner_norm: m must be >= 1");
    path.validate();
    const auto w = mode_weights(rho, lambda);
    std::vector<double> terms;
    if (!path.node_indexed) {
        const double dt = path.grid.dt();
        terms.reserve(path.v.size());
        for (const auto& f : path.v) terms.push_back(dt * std::pow(field_norm_w(f, w), m));
    } else {
        const auto q = path_quadrature(path, path.grid.level, subdiv);
        terms.reserve(q.f.size());
        for (std::size_t i = 0; i < q.f.size(); ++i)
            terms.push_back(q.w[i] * std::pow(field_norm_w(q.f[i], w), m));
    }
    return std::pow(tree_sum(terms), 1.0 / m);
}

double frac_kernel_cell_pair(int d, double dt, double beta) {
    if (d < 1) throw std::invalid_argument("frac_kernel_cell_pair: d must be >= 1");
    const double e = 1.0 - beta;
    const double bracket = 2.0 * std::pow(static_cast<double>(d), e) -
                           std::pow(static_cast<double>(d - 1), e) -
                           std::pow(static_cast<double>(d + 1), e);
    return std::pow(dt, e) / (beta * e) * bracket;
}

double frac_sobolev_norm(const PathSample& path, double alpha, double m, double rho0,
                         std::span<const double> lambda, int subdiv) {
    NormSpec ns{m, alpha, rho0};
    ns.validate_frac();
    path.validate();
    const double beta = alpha * m;
    const auto w = mode_weights(rho0, lambda);

    if (!path.node_indexed) {
        const int n = path.grid.cells();
        const double dt = path.grid.dt();
        std::vector<double> kernel(n, 0.0);
        for (int d = 1; d < n; ++d) kernel[d] = frac_kernel_cell_pair(d, dt, beta);
        double sum = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                sum += 2.0 * kernel[j - i] *
                       std::pow(field_diff_norm_w(path.v[i], path.v[j], w), m);
        return std::pow(sum, 1.0 / m);
    }

    const auto q = path_quadrature(path, path.grid.level, subdiv);
    const std::size_t n = q.f.size();
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double gap = q.t[j] - q.t[i];
            if (gap <= 0.0) continue;
            const double diff = field_diff_norm_w(q.f[i], q.f[j], w);
            sum += 2.0 * q.w[i] * q.w[j] * std::pow(diff, m) / std::pow(gap, 1.0 + beta);
        }
    return std::pow(sum, 1.0 / m);
}

double path_functional(PathFunctional fn, const PathSample& path, const AdmissibilitySpec& spec,
                       std::span<const double> lambda) {
    switch (fn) {
        case PathFunctional::x_norm_power:
            return std::pow(bochner_norm(path, spec.m, spec.rho, lambda), spec.m);
        case PathFunctional::xprime_norm_power: {
            const double b = bochner_norm(path, spec.m, spec.rho_prime, lambda);
            const double f = frac_sobolev_norm(path, spec.alpha, spec.m, spec.rho0, lambda);
            return std::pow(b + f, spec.m);
        }
        case PathFunctional::sup_node_norm: {
            const auto w = mode_weights(spec.rho, lambda);
            double best = 0.0;
            for (const auto& f : path.v) best = std::max(best, field_norm_w(f, w));
            return std::pow(best, spec.m);
        }
    }
    throw std::logic_error("path_functional: unknown functional");
}

KRReport kr_membership(const PathEnsemble& ensemble, const AdmissibilitySpec& spec,
                       std::span<const double> lambda) {
    if (ensemble.paths.empty()) throw std::invalid_argument("kr_membership: empty ensemble");
    if (!(spec.R > 0.0)) throw std::invalid_argument("kr_membership: R must be positive");
    std::vector<double> phis(ensemble.paths.size());
    int finite = 0;
    for (std::size_t i = 0; i < ensemble.paths.size(); ++i) {
        phis[i] = path_functional(spec.phi, ensemble.paths[i], spec, lambda);
        const double psi = path_functional(spec.psi, ensemble.paths[i], spec, lambda);
        if (std::isfinite(psi)) ++finite;
    }
    KRReport r;
    r.phi_mean = tree_mean(phis);
    r.psi_finite_fraction = static_cast<double>(finite) / ensemble.paths.size();
    r.in_set = std::isfinite(r.phi_mean) && r.phi_mean <= std::pow(spec.R, spec.m) &&
               r.psi_finite_fraction == 1.0;
    return r;
}

}  // namespace rdspde
