#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "rdspde/spectral.hpp"

namespace rdspde {

// Dyadic grid t_k = T*k/2^level, k = 0..2^level.
struct TimeGrid {
    double horizon = 1.0;
    int level = 0;

    void validate() const {
        if (horizon <= 0.0) throw std::invalid_argument("TimeGrid: horizon must be positive");
        if (level < 0 || level > 20) throw std::invalid_argument("TimeGrid: level out of [0,20]");
    }
    int cells() const { return 1 << level; }
    double dt() const { return horizon / cells(); }
    double node(int k) const { return horizon * k / cells(); }
};

// Time-indexed sequence of Fields.  Cell-indexed paths are left-continuous
// piecewise constants (value count = cells); node-indexed paths carry one
// value per node (cells + 1) and are read as piecewise linear where an
// integral of the values themselves is needed.
struct PathSample {
    TimeGrid grid;
    bool node_indexed = false;
    std::vector<Field> v;

    void validate() const;
    int value_count() const { return grid.cells() + (node_indexed ? 1 : 0); }
    const Field& value_in_cell(int k) const { return v[k]; }  // cell-indexed only
    bool finite() const;

    static PathSample constant(const TimeGrid& g, const Field& f, bool nodes = false);
};

// Quadrature sampling of a path: times, weights and field samples, refined
// so that every level-`target_level` cell carries its own nodes.  Exact for
// the integrals of piecewise-constant paths; trapezoid (subdiv per cell) on
// the linear interpolant for node-indexed paths.
struct PathQuadrature {
    std::vector<double> t;
    std::vector<double> w;
    std::vector<Field> f;
    double horizon = 1.0;
    int cells = 1;           // refinement cells
    int nodes_per_cell = 1;  // quadrature nodes per refinement cell
};
PathQuadrature path_quadrature(const PathSample& path, int target_level, int subdiv = 8);

struct NormSpec {
    double m = 2.0;
    double alpha = 0.25;
    double rho = 0.0;
    void validate_frac() const {
        if (!(m >= 1.0)) throw std::invalid_argument("NormSpec: m must be >= 1");
        if (!(alpha > 0.0 && alpha < 1.0 / m))
            throw std::invalid_argument("NormSpec: alpha must lie in (0, 1/m)");
    }
};

// ( sum_cells dt * |u(t)|_{H^rho}^m )^{1/m}; trapezoid on node-indexed paths.
double bochner_norm(const PathSample& path, double m, double rho, std::span<const double> lambda,
                    int subdiv = 8);

// Fractional path seminorm: symmetric double integral of
// |u(t)-u(s)|^m / |t-s|^{1+alpha m}.  Exact per-cell-pair kernel integrals
// for piecewise-constant paths; quadrature-pair sum for node-indexed ones.
double frac_sobolev_norm(const PathSample& path, double alpha, double m, double rho0,
                         std::span<const double> lambda, int subdiv = 8);

// Exact kernel integral of |t-s|^{-(1+beta)} over two cells at index
// distance d >= 1 on a uniform grid with spacing dt.
double frac_kernel_cell_pair(int d, double dt, double beta);

struct PathEnsemble {
    TimeGrid grid;
    std::vector<PathSample> paths;
    std::vector<std::uint64_t> seeds;
    int excluded = 0;  // paths dropped by the solver (overflow etc.)
};

enum class PathFunctional {
    x_norm_power,       // |xi|_{L^m(0,T;H^rho)}^m
    xprime_norm_power,  // (|xi|_{L^m(H^rho')} + |xi|_{W^alpha_m(H^rho0)})^m
    sup_node_norm,      // max_k |xi(t_k)|_{H^rho}^m
};

struct AdmissibilitySpec {
    double R = 1.0;
    double m = 2.0;
    PathFunctional phi = PathFunctional::x_norm_power;
    PathFunctional psi = PathFunctional::xprime_norm_power;
    double alpha = 0.25;
    double rho = 0.0;
    double rho_prime = 0.5;
    double rho0 = -1.0;
};

double path_functional(PathFunctional fn, const PathSample& path, const AdmissibilitySpec& spec,
                       std::span<const double> lambda);

struct KRReport {
    double phi_mean = 0.0;
    bool in_set = false;
    double psi_finite_fraction = 0.0;
};

KRReport kr_membership(const PathEnsemble& ensemble, const AdmissibilitySpec& spec,
                       std::span<const double> lambda);

}  // namespace rdspde
