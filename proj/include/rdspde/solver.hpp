#pragma once

#include <cstdint>
#include <functional>

#include "rdspde/models.hpp"
#include "rdspde/noise.hpp"
#include "rdspde/path.hpp"

namespace rdspde {

struct SolveConfig {
    int kappa = 5;
    int substeps = 4;
    double horizon = 1.0;
    double m = 2.0;
    double m0 = 2.0;   // moment exponent on the X' norm
    double m1 = 3.0;   // moment exponent on the X norm, > m
    double alpha = 0.25;
    double rho = 0.0;
    double rho_prime = 0.5;
    double rho0 = -1.0;
    double R = 10.0;
    int ensemble = 64;
    int max_sweeps = 8;
    double tolerance = 0.05;

    void validate() const {
        if (kappa < 1 || kappa > 20) throw std::invalid_argument("SolveConfig: kappa out of [1,20]");
        if (substeps < 1) throw std::invalid_argument("SolveConfig: substeps must be >= 1");
        if (!(m1 > m && m >= 2.0)) throw std::invalid_argument("SolveConfig: need m1 > m >= 2");
        if (!(m0 >= 1.0)) throw std::invalid_argument("SolveConfig: need m0 >= 1");
        if (!(alpha > 0.0 && alpha < 1.0 / m))
            throw std::invalid_argument("SolveConfig: alpha must lie in (0, 1/m)");
        if (!(R > 0.0)) throw std::invalid_argument("SolveConfig: R must be positive");
        if (ensemble < 1) throw std::invalid_argument("SolveConfig: ensemble must be >= 1");
        if (!(horizon > 0.0)) throw std::invalid_argument("SolveConfig: horizon must be positive");
    }
    TimeGrid grid() const { return {horizon, kappa}; }
    AdmissibilitySpec admissibility() const {
        AdmissibilitySpec a;
        a.R = R;
        a.m = m;
        a.alpha = alpha;
        a.rho = rho;
        a.rho_prime = rho_prime;
        a.rho0 = rho0;
        return a;
    }
};

struct SolveResult {
    PathSample nodes;             // node-indexed on the level-kappa grid
    std::vector<Field> cell_avg;  // per cell: average of the cadlag step path over the cell
    std::vector<Field> fine;      // substep states, cells*substeps + 1 entries
    bool failed = false;
    int failed_cell = -1;
};

// One controlled solve: exact exponential propagation of the diagonal
// diffusion, explicit substeps for the linearized reaction frozen at the
// control's cell value, Wiener and compensated jump increments applied at
// the cell end with coefficients evaluated at the cell-start state.
SolveResult solve_controlled(const ModelSpec& model, const PathSample& control,
                             const NoiseRealization& noise, const SolveConfig& config,
                             const SpectralWorkspace& ws, const Field& w0);

// hatProj composed with the solve: cell 0 = xi0, cell k+1 = average of the
// solve over cell k; cell k+1 depends only on data up to t_{k+1}.
PathSample discretized_operator(const ModelSpec& model, const PathSample& control,
                                const NoiseRealization& noise, const SolveConfig& config,
                                const SpectralWorkspace& ws, const Field& w0, const Field& xi0,
                                SolveResult* detail = nullptr);

struct ForwardResult {
    PathSample wstar;
    bool failed = false;
};

// Cell-by-cell forward construction: block k+1 is the discretized operator
// applied to the path frozen so far.  Terminates in 2^kappa blocks and is a
// fixed point of the discretized operator by construction.
ForwardResult forward_induction(const ModelSpec& model, const NoiseRealization& noise,
                                const SolveConfig& config, const SpectralWorkspace& ws,
                                const Field& w0, const Field& xi0);

// max over cells and coefficients of |V^(wstar) - wstar|
double self_consistency_residual(const ModelSpec& model, const PathSample& wstar,
                                 const NoiseRealization& noise, const SolveConfig& config,
                                 const SpectralWorkspace& ws, const Field& w0, const Field& xi0);

enum class FixedPointMode { picard, forward };

struct FixedPointReport {
    std::vector<double> law_distance;  // per Picard sweep
    std::vector<double> phi_mean;      // per sweep (forward mode: single entry)
    std::vector<char> in_set;
    double self_residual = 0.0;        // forward mode
    PathEnsemble ensemble;
    int excluded = 0;
    int sweeps = 0;
    bool converged = false;
    bool left_admissible = false;
};

FixedPointReport fixed_point_iterate(const ModelSpec& model, const PathEnsemble& init,
                                     const SolveConfig& config, const SpectralWorkspace& ws,
                                     const WienerSpec& wiener, const IntensitySpec& intensity,
                                     const Field& w0, const Field& xi0, FixedPointMode mode,
                                     std::uint64_t seed, int threads);

struct KappaRow {
    int kappa = 0;
    double phi_mean = 0.0;
    double m0_xprime = 0.0;
    double m0_se = 0.0;
    double m1_x = 0.0;
    double m1_se = 0.0;
    int excluded = 0;
};

std::vector<KappaRow> kappa_refinement_study(const ModelSpec& model, const DomainSpec& domain,
                                             const WienerSpec& wiener, const IntensitySpec& intensity,
                                             const SolveConfig& base, std::span<const int> kappas,
                                             const Field& w0, std::uint64_t seed, int threads);

// Parallel map over independent paths (OpenMP); the serial variant is the
// reference used to check bit-identical results.
void for_each_path(int n, int threads, const std::function<void(int)>& fn);
void for_each_path_serial(int n, const std::function<void(int)>& fn);

// exact L^m(0,T;H^rho) norm of the difference of two piecewise-constant paths
double path_difference_norm(const PathSample& a, const PathSample& b, double m, double rho,
                            std::span<const double> lambda);

}  // namespace rdspde
