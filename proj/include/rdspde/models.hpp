#pragma once

#include <span>
#include <string>
#include <vector>

#include "rdspde/spectral.hpp"

namespace rdspde {

enum class Reaction { kpp, newell_whitehead, zeldovich, fitzhugh_nagumo, gierer_meinhardt };

Reaction reaction_by_name(const std::string& name);
const char* reaction_name(Reaction r);
int reaction_components(Reaction r);
int reaction_arity(Reaction r);

// Noise coefficient map: either off, a constant (additive) coefficient, or
// the diagonal multiplicative form c_i * u_i.
struct NoiseCoeff {
    enum class Kind { off, additive, multiplicative };
    Kind kind = Kind::off;
    std::vector<double> c;  // per component

    double coeff(int i) const { return i < static_cast<int>(c.size()) ? c[i] : 0.0; }
};

struct ModelSpec {
    Reaction reaction = Reaction::kpp;
    std::vector<double> rc;         // reaction coefficients, length = reaction_arity
    std::vector<double> diffusion;  // per component, >= 0
    NoiseCoeff sigma;
    NoiseCoeff jump;
    double positivity_floor = 1e-6;

    int components() const { return reaction_components(reaction); }
    void validate() const;
};

// pointwise reaction f(u) at quadrature samples; u and out hold one span per component
void reaction_eval(const ModelSpec& model, std::span<const std::vector<double>> u,
                   std::span<std::vector<double>> out);

// pointwise linearization: nonlinear monomials frozen at the control xi,
// linear damping terms at the running state w; Fbar(xi,xi) = f(xi) exactly
void linearized_reaction_eval(const ModelSpec& model, std::span<const std::vector<double>> xi,
                              std::span<const std::vector<double>> w,
                              std::span<std::vector<double>> out);

// spectral wrappers: synthesize, evaluate pointwise, project back (dealiased)
Field reaction_field(const ModelSpec& model, const Field& u, const SpectralWorkspace& ws);
Field linearized_reaction_field(const ModelSpec& model, const Field& xi, const Field& w,
                                const SpectralWorkspace& ws);

// per-(component, mode) Wiener multiplier; the increment added to
// coefficient (i,k) is multiplier(i,k) * dW_(i,k)
std::vector<double> sigma_multipliers(const ModelSpec& model, const Field& u);

// jump coefficient g(u,z); linear in the mark z
Field jump_coeff_eval(const ModelSpec& model, const Field& u, double z, const DomainSpec& domain);

// affine growth estimate: max over sampled fields of
// (|Sigma(u)|_HS^2 + M2 * |g-scale(u)|^2) / (1 + |u|_X^2); reported, not asserted
double noise_growth_constant(const ModelSpec& model, const DomainSpec& domain, double bound,
                             double mark_m2, int samples, std::uint64_t seed);

}  // namespace rdspde
