#include "rdspde/spectral.hpp"

#include <algorithm>
#include <cmath>

namespace rdspde {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
}

bool Field::finite() const {
    for (double x : c)
        if (!std::isfinite(x)) return false;
    return true;
}

Field operator+(const Field& a, const Field& b) {
    Field r = a;
    for (std::size_t i = 0; i < r.c.size(); ++i) r.c[i] += b.c[i];
    return r;
}

Field operator-(const Field& a, const Field& b) {
    Field r = a;
    for (std::size_t i = 0; i < r.c.size(); ++i) r.c[i] -= b.c[i];
    return r;
}

Field operator*(double s, const Field& a) {
    Field r = a;
    for (double& x : r.c) x *= s;
    return r;
}

Field& axpy(Field& y, double a, const Field& x) {
    for (std::size_t i = 0; i < y.c.size(); ++i) y.c[i] += a * x.c[i];
    return y;
}

std::vector<Eigenpair> neumann_eigenpairs(const DomainSpec& domain) {
    domain.validate();
    const double base = kPi / domain.length;
    std::vector<Eigenpair> eigs;
    eigs.reserve(domain.total_modes());
    if (domain.dim == 1) {
        for (int k = 0; k < domain.modes; ++k)
            eigs.push_back({base * base * k * k, {k, 0}});
    } else {
        for (int k1 = 0; k1 < domain.modes; ++k1)
            for (int k2 = 0; k2 < domain.modes; ++k2)
                eigs.push_back({base * base * (k1 * k1 + k2 * k2), {k1, k2}});
    }
    std::stable_sort(eigs.begin(), eigs.end(), [](const Eigenpair& a, const Eigenpair& b) {
        if (a.lambda != b.lambda) return a.lambda < b.lambda;
        if (a.index[0] != b.index[0]) return a.index[0] < b.index[0];
        return a.index[1] < b.index[1];
    });
    return eigs;
}

Field apply_diffusion(const Field& field, std::span<const double> diffusion, const DomainSpec& domain) {
    if (static_cast<int>(diffusion.size()) != field.components)
        throw std::invalid_argument("apply_diffusion: diffusion size != component count");
    const auto eigs = neumann_eigenpairs(domain);
    if (static_cast<int>(eigs.size()) != field.modes)
        throw std::invalid_argument("apply_diffusion: field/domain mode mismatch");
    Field out(field.components, field.modes);
    for (int i = 0; i < field.components; ++i)
        for (int k = 0; k < field.modes; ++k)
            out.at(i, k) = -diffusion[i] * eigs[k].lambda * field.at(i, k);
    return out;
}

double sobolev_norm(const Field& field, double rho, int component, std::span<const double> lambda) {
    if (component < 0 || component >= field.components)
        throw std::invalid_argument("sobolev_norm: component out of range");
    if (static_cast<int>(lambda.size()) != field.modes)
        throw std::invalid_argument("sobolev_norm: eigenvalue count != mode count");
    double s = 0.0;
    for (int k = 0; k < field.modes; ++k) {
        const double w = rho == 0.0 ? 1.0 : std::pow(1.0 + lambda[k], rho);
        const double x = field.at(component, k);
        s += w * x * x;
    }
    return std::sqrt(s);
}

double sobolev_norm(const Field& field, double rho, std::span<const double> lambda) {
    double s = 0.0;
    for (int i = 0; i < field.components; ++i) {
        const double n = sobolev_norm(field, rho, i, lambda);
        s += n * n;
    }
    return std::sqrt(s);
}

SpectralWorkspace::SpectralWorkspace(const DomainSpec& domain, int quad_points_per_axis)
    : dom_(domain), quad_(quad_points_per_axis) {
    dom_.validate();
    if (quad_ <= 0) quad_ = 4 * dom_.modes;  // dealiasing default
    if (quad_ < 2 * dom_.modes)
        throw std::invalid_argument("SpectralWorkspace: quad points must be >= 2*modes (aliasing)");
    eigs_ = neumann_eigenpairs(dom_);
    lambda_.reserve(eigs_.size());
    for (const auto& e : eigs_) lambda_.push_back(e.lambda);

    // L2-normalized cosines sampled at midpoints x_j = L(j+1/2)/P.
    const double L = dom_.length;
    const double c0 = 1.0 / std::sqrt(L);
    const double ck = std::sqrt(2.0 / L);
    table_.resize(static_cast<std::size_t>(dom_.modes) * quad_);
    for (int k = 0; k < dom_.modes; ++k)
        for (int j = 0; j < quad_; ++j) {
            const double x = L * (j + 0.5) / quad_;
            table_[static_cast<std::size_t>(k) * quad_ + j] =
                k == 0 ? c0 : ck * std::cos(k * kPi * x / L);
        }
}

void SpectralWorkspace::to_physical(const Field& f, int component, std::span<double> out) const {
    if (f.modes != static_cast<int>(eigs_.size()))
        throw std::invalid_argument("to_physical: field/workspace mode mismatch");
    if (static_cast<int>(out.size()) != total_points())
        throw std::invalid_argument("to_physical: output size mismatch");
    std::fill(out.begin(), out.end(), 0.0);
    if (dom_.dim == 1) {
        for (int k = 0; k < f.modes; ++k) {
            const double coef = f.at(component, k);
            if (coef == 0.0) continue;
            const int ka = eigs_[k].index[0];
            for (int j = 0; j < quad_; ++j) out[j] += coef * basis1(ka, j);
        }
    } else {
        for (int k = 0; k < f.modes; ++k) {
            const double coef = f.at(component, k);
            if (coef == 0.0) continue;
            const int k1 = eigs_[k].index[0];
            const int k2 = eigs_[k].index[1];
            for (int j1 = 0; j1 < quad_; ++j1) {
                const double b1 = coef * basis1(k1, j1);
                for (int j2 = 0; j2 < quad_; ++j2)
                    out[static_cast<std::size_t>(j1) * quad_ + j2] += b1 * basis1(k2, j2);
            }
        }
    }
}

void SpectralWorkspace::from_physical(std::span<const double> values, Field& f, int component) const {
    if (static_cast<int>(values.size()) != total_points())
        throw std::invalid_argument("from_physical: input size mismatch");
    const double w = dom_.dim == 1 ? dom_.length / quad_
                                   : (dom_.length / quad_) * (dom_.length / quad_);
    if (dom_.dim == 1) {
        for (int k = 0; k < f.modes; ++k) {
            const int ka = eigs_[k].index[0];
            double s = 0.0;
            for (int j = 0; j < quad_; ++j) s += values[j] * basis1(ka, j);
            f.at(component, k) = w * s;
        }
    } else {
        for (int k = 0; k < f.modes; ++k) {
            const int k1 = eigs_[k].index[0];
            const int k2 = eigs_[k].index[1];
            double s = 0.0;
            for (int j1 = 0; j1 < quad_; ++j1) {
                double row = 0.0;
                for (int j2 = 0; j2 < quad_; ++j2)
                    row += values[static_cast<std::size_t>(j1) * quad_ + j2] * basis1(k2, j2);
                s += row * basis1(k1, j1);
            }
            f.at(component, k) = w * s;
        }
    }
}

std::vector<double> SpectralWorkspace::to_physical(const Field& f, int component) const {
    std::vector<double> out(total_points());
    to_physical(f, component, out);
    return out;
}

Field SpectralWorkspace::from_physical(const std::vector<std::vector<double>>& per_component_values) const {
    Field f(static_cast<int>(per_component_values.size()), static_cast<int>(eigs_.size()));
    for (int i = 0; i < f.components; ++i) from_physical(per_component_values[i], f, i);
    return f;
}

}  // namespace rdspde
