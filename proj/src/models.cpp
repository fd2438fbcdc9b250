#include "rdspde/models.hpp"

#include <cmath>
#include <stdexcept>

#include "rdspde/rng.hpp"

namespace rdspde {

Reaction reaction_by_name(const std::string& name) {
    if (name == "kpp") return Reaction::kpp;
    if (name == "newell_whitehead") return Reaction::newell_whitehead;
    if (name == "zeldovich") return Reaction::zeldovich;
    if (name == "fitzhugh_nagumo") return Reaction::fitzhugh_nagumo;
    if (name == "gierer_meinhardt") return Reaction::gierer_meinhardt;
    throw std::invalid_argument("unknown reaction: " + name);
}

const char* reaction_name(Reaction r) {
    switch (r) {
        case Reaction::kpp: return "kpp";
        case Reaction::newell_whitehead: return "newell_whitehead";
        case Reaction::zeldovich: return "zeldovich";
        case Reaction::fitzhugh_nagumo: return "fitzhugh_nagumo";
        case Reaction::gierer_meinhardt: return "gierer_meinhardt";
    }
    return "?";
}

int reaction_components(Reaction r) {
    switch (r) {
        case Reaction::kpp:
        case Reaction::newell_whitehead:
        case Reaction::zeldovich: return 1;
        case Reaction::fitzhugh_nagumo:
        case Reaction::gierer_meinhardt: return 2;
    }
    return 0;
}

int reaction_arity(Reaction r) {
    switch (r) {
        case Reaction::kpp: return 1;           // c: f = c u (1-u)
        case Reaction::newell_whitehead: return 1;  // c: f = c u (1-u^2)
        case Reaction::zeldovich: return 2;     // c, beta: f = c u (1-u) exp(-beta (1-u))
        case Reaction::fitzhugh_nagumo: return 3;   // a, b, eps
        case Reaction::gierer_meinhardt: return 4;  // c12, c13, c22, c23
    }
    return 0;
}

void ModelSpec::validate() const {
    if (static_cast<int>(rc.size()) != reaction_arity(reaction))
        throw std::invalid_argument("ModelSpec: coefficient count does not match reaction arity");
    if (static_cast<int>(diffusion.size()) != components())
        throw std::invalid_argument("ModelSpec: diffusion count does not match components");
    for (double d : diffusion)
        if (!(d >= 0.0) || !std::isfinite(d))
            throw std::invalid_argument("ModelSpec: diffusion must be finite and >= 0");
    for (double x : rc)
        if (!std::isfinite(x)) throw std::invalid_argument("ModelSpec: non-finite coefficient");
    for (const auto* nc : {&sigma, &jump})
        for (double x : nc->c)
            if (!std::isfinite(x))
                throw std::invalid_argument("ModelSpec: non-finite noise coefficient");
    if (reaction == Reaction::gierer_meinhardt && !(positivity_floor > 0.0))
        throw std::invalid_argument("ModelSpec: gierer_meinhardt requires positivity_floor > 0");
}

void reaction_eval(const ModelSpec& model, std::span<const std::vector<double>> u,
                   std::span<std::vector<double>> out) {
    const std::size_t n = u[0].size();
    switch (model.reaction) {
        case Reaction::kpp: {
            const double c = model.rc[0];
            for (std::size_t j = 0; j < n; ++j) out[0][j] = c * u[0][j] * (1.0 - u[0][j]);
            return;
        }
        case Reaction::newell_whitehead: {
            const double c = model.rc[0];
            for (std::size_t j = 0; j < n; ++j)
                out[0][j] = c * u[0][j] * (1.0 - u[0][j] * u[0][j]);
            return;
        }
        case Reaction::zeldovich: {
            const double c = model.rc[0];
            const double beta = model.rc[1];
            for (std::size_t j = 0; j < n; ++j)
                out[0][j] = c * u[0][j] * (1.0 - u[0][j]) * std::exp(-beta * (1.0 - u[0][j]));
            return;
        }
        case Reaction::fitzhugh_nagumo: {
            const double a = model.rc[0], b = model.rc[1], eps = model.rc[2];
            for (std::size_t j = 0; j < n; ++j) {
                const double v = u[0][j], w = u[1][j];
                out[0][j] = v * (v - a) * (1.0 - v) - w;
                out[1][j] = eps * (v - b * w);
            }
            return;
        }
        case Reaction::gierer_meinhardt: {
            const double c12 = model.rc[0], c13 = model.rc[1], c22 = model.rc[2], c23 = model.rc[3];
            const double floor = model.positivity_floor;
            for (std::size_t j = 0; j < n; ++j) {
                const double a = u[0][j];
                const double h = std::max(u[1][j], floor);
                out[0][j] = c12 * a * a / h - c13 * a;
                out[1][j] = c22 * a * a - c23 * u[1][j];
            }
            return;
        }
    }
    throw std::logic_error("reaction_eval: unknown reaction");
}

void linearized_reaction_eval(const ModelSpec& model, std::span<const std::vector<double>> xi,
                              std::span<const std::vector<double>> w,
                              std::span<std::vector<double>> out) {
    const std::size_t n = xi[0].size();
    switch (model.reaction) {
        case Reaction::kpp:
        case Reaction::newell_whitehead:
        case Reaction::zeldovich:
            // single-component models: everything frozen at the control
            reaction_eval(model, xi, out);
            return;
        case Reaction::fitzhugh_nagumo: {
            const double a = model.rc[0], b = model.rc[1], eps = model.rc[2];
            for (std::size_t j = 0; j < n; ++j) {
                const double x = xi[0][j];
                out[0][j] = -x * x * x + (1.0 + a) * x * x - a * w[0][j] - w[1][j];
                out[1][j] = eps * (xi[0][j] - b * w[1][j]);
            }
            return;
        }
        case Reaction::gierer_meinhardt: {
            const double c12 = model.rc[0], c13 = model.rc[1], c22 = model.rc[2], c23 = model.rc[3];
            const double floor = model.positivity_floor;
            for (std::size_t j = 0; j < n; ++j) {
                const double x = xi[0][j];
                const double h = std::max(xi[1][j], floor);
                out[0][j] = c12 * x * x / h - c13 * w[0][j];
                out[1][j] = c22 * x * x - c23 * w[1][j];
            }
            return;
        }
    }
    throw std::logic_error("linearized_reaction_eval: unknown reaction");
}

namespace {

std::vector<std::vector<double>> to_physical_all(const Field& u, const SpectralWorkspace& ws) {
    std::vector<std::vector<double>> vals(u.components);
    for (int i = 0; i < u.components; ++i) vals[i] = ws.to_physical(u, i);
    return vals;
}

}  // namespace

Field reaction_field(const ModelSpec& model, const Field& u, const SpectralWorkspace& ws) {
    const auto vals = to_physical_all(u, ws);
    std::vector<std::vector<double>> out(u.components,
                                         std::vector<double>(ws.total_points(), 0.0));
    reaction_eval(model, vals, out);
    return ws.from_physical(out);
}

Field linearized_reaction_field(const ModelSpec& model, const Field& xi, const Field& w,
                                const SpectralWorkspace& ws) {
    const auto xv = to_physical_all(xi, ws);
    const auto wv = to_physical_all(w, ws);
    std::vector<std::vector<double>> out(xi.components,
                                         std::vector<double>(ws.total_points(), 0.0));
    linearized_reaction_eval(model, xv, wv, out);
    return ws.from_physical(out);
}

std::vector<double> sigma_multipliers(const ModelSpec& model, const Field& u) {
    std::vector<double> mult(u.c.size(), 0.0);
    switch (model.sigma.kind) {
        case NoiseCoeff::Kind::off:
            return mult;
        case NoiseCoeff::Kind::additive:
            for (int i = 0; i < u.components; ++i)
                for (int k = 0; k < u.modes; ++k)
                    mult[static_cast<std::size_t>(i) * u.modes + k] = model.sigma.coeff(i);
            return mult;
        case NoiseCoeff::Kind::multiplicative:
            for (int i = 0; i < u.components; ++i)
                for (int k = 0; k < u.modes; ++k)
                    mult[static_cast<std::size_t>(i) * u.modes + k] =
                        model.sigma.coeff(i) * u.at(i, k);
            return mult;
    }
    return mult;
}

Field jump_coeff_eval(const ModelSpec& model, const Field& u, double z, const DomainSpec& domain) {
    Field g(u.components, u.modes);
    switch (model.jump.kind) {
        case NoiseCoeff::Kind::off:
            return g;
        case NoiseCoeff::Kind::additive:
            // spatially constant shock: only the constant mode responds
            for (int i = 0; i < u.components; ++i)
                g.at(i, 0) = model.jump.coeff(i) * z * std::sqrt(domain.measure());
            return g;
        case NoiseCoeff::Kind::multiplicative:
            for (int i = 0; i < u.components; ++i)
                for (int k = 0; k < u.modes; ++k)
                    g.at(i, k) = model.jump.coeff(i) * u.at(i, k) * z;
            return g;
    }
    return g;
}

double noise_growth_constant(const ModelSpec& model, const DomainSpec& domain, double bound,
                             double mark_m2, int samples, std::uint64_t seed) {
    const auto eigs = neumann_eigenpairs(domain);
    std::vector<double> lambda;
    for (const auto& e : eigs) lambda.push_back(e.lambda);
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
        RngStream rng(seed, static_cast<std::uint64_t>(s), Substream::misc);
        Field u(model.components(), domain.total_modes());
        for (double& x : u.c) x = bound * rng.uniform(-1.0, 1.0);
        const auto mult = sigma_multipliers(model, u);
        double sig2 = 0.0;
        for (double m : mult) sig2 += m * m;
        const Field g1 = jump_coeff_eval(model, u, 1.0, domain);
        double g2 = 0.0;
        for (double x : g1.c) g2 += x * x;
        const double ux = sobolev_norm(u, 0.0, lambda);
        worst = std::max(worst, (sig2 + mark_m2 * g2) / (1.0 + ux * ux));
    }
    return worst;
}

}  // namespace rdspde
