#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace rdspde {

// Rectangular domain with homogeneous Neumann boundary; 1-D interval or
// square 2-D box, discretized by a truncated cosine eigenbasis of the
// Laplacian.  `modes` is the per-axis truncation level.
struct DomainSpec {
    int dim = 1;
    double length = 1.0;
    int modes = 8;

    void validate() const {
        if (dim != 1 && dim != 2) throw std::invalid_argument("DomainSpec: dim must be 1 or 2");
        if (length <= 0.0) throw std::invalid_argument("DomainSpec: length must be positive");
        if (modes < 1) throw std::invalid_argument("DomainSpec: modes must be >= 1");
    }
    int total_modes() const { return dim == 1 ? modes : modes * modes; }
    double measure() const { return dim == 1 ? length : length * length; }
};

// One spatial snapshot of an n-component field, stored as coefficients in
// the L2-normalized Neumann cosine basis.  Row-major: component i, mode k.
struct Field {
    int components = 0;
    int modes = 0;
    std::vector<double> c;

    Field() = default;
    Field(int n, int total_modes)
        : components(n), modes(total_modes), c(static_cast<std::size_t>(n) * total_modes, 0.0) {}

    double& at(int comp, int k) { return c[static_cast<std::size_t>(comp) * modes + k]; }
    double at(int comp, int k) const { return c[static_cast<std::size_t>(comp) * modes + k]; }
    std::span<double> comp(int i) { return {c.data() + static_cast<std::size_t>(i) * modes, static_cast<std::size_t>(modes)}; }
    std::span<const double> comp(int i) const {
        return {c.data() + static_cast<std::size_t>(i) * modes, static_cast<std::size_t>(modes)};
    }
    bool finite() const;
    bool same_shape(const Field& o) const { return components == o.components && modes == o.modes; }
};

Field operator+(const Field& a, const Field& b);
Field operator-(const Field& a, const Field& b);
Field operator*(double s, const Field& a);
Field& axpy(Field& y, double a, const Field& x);  // y += a*x

struct Eigenpair {
    double lambda;
    std::array<int, 2> index;  // per-axis cosine order; index[1] = 0 in 1-D
};

// Eigenvalues of -Laplacian with Neumann conditions, sorted nondecreasing
// (ties broken by axis index).  lambda_0 = 0 exactly.
std::vector<Eigenpair> neumann_eigenpairs(const DomainSpec& domain);

// coeff(i,k) -> -diffusion[i] * lambda_k * coeff(i,k)
Field apply_diffusion(const Field& field, std::span<const double> diffusion, const DomainSpec& domain);

// (sum_k (1+lambda_k)^rho coeff(i,k)^2)^(1/2) for one component
double sobolev_norm(const Field& field, double rho, int component, std::span<const double> lambda);
// l2 aggregation over all components
double sobolev_norm(const Field& field, double rho, std::span<const double> lambda);

// Physical-space synthesis/analysis on a midpoint grid of quad_points
// samples per axis.  Analysis is exact for fields with < quad_points modes
// per axis, which is what keeps pointwise nonlinearities dealiased.
class SpectralWorkspace {
  public:
    SpectralWorkspace(const DomainSpec& domain, int quad_points_per_axis = 0);

    const DomainSpec& domain() const { return dom_; }
    int quad_points_per_axis() const { return quad_; }
    int total_points() const { return dom_.dim == 1 ? quad_ : quad_ * quad_; }
    std::span<const double> lambda() const { return lambda_; }
    const std::vector<Eigenpair>& eigenpairs() const { return eigs_; }

    // one component -> values at the quadrature points
    void to_physical(const Field& f, int component, std::span<double> out) const;
    void from_physical(std::span<const double> values, Field& f, int component) const;

    std::vector<double> to_physical(const Field& f, int component) const;
    Field from_physical(const std::vector<std::vector<double>>& per_component_values) const;

  private:
    DomainSpec dom_;
    int quad_;
    std::vector<Eigenpair> eigs_;
    std::vector<double> lambda_;
    std::vector<double> table_;  // 1-D basis values, [axis order k][point j]
    double basis1(int k, int j) const { return table_[static_cast<std::size_t>(k) * quad_ + j]; }
};

}  // namespace rdspde
