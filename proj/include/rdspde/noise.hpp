#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "rdspde/path.hpp"
#include "rdspde/rng.hpp"

namespace rdspde {

struct WienerSpec {
    int mode_count = 8;
    std::vector<double> weights;  // covariance spectrum q_k; empty = cylindrical (all 1)

    void validate() const;
    double weight(int k) const {
        return weights.empty() ? 1.0 : (k < static_cast<int>(weights.size()) ? weights[k] : 0.0);
    }
};

// Scalar-mark intensity measures with the sigma-finite part handled by the
// truncation S_n = {|z| >= 1/n}.  The registry covers a finite two-point
// law, Gaussian marks, and a tempered stable radial density.
struct IntensitySpec {
    enum class Kind { two_point, gaussian_marks, tempered_stable };

    Kind kind = Kind::two_point;
    double rate = 1.0;          // mass multiplier for two_point / gaussian_marks
    double two_point_p = 0.5;   // P(mark = +1); 1-p for mark = -1
    double mark_sigma = 1.0;    // gaussian_marks std
    double stable_c = 1.0;      // tempered_stable: c |z|^(-1-a) e^(-theta |z|)
    double stable_a = 0.5;
    double stable_theta = 1.0;
    double p_exponent = 2.0;    // p-moment exponent in (0,2]
    int truncation_n = 1;

    void validate() const;
    double cutoff() const { return 1.0 / truncation_n; }
    double mass() const;                       // nu(S_n)
    double mean_mark() const;                  // int_{S_n} z nu(dz)
    double abs_moment(double p) const;         // int_{S_n} |z|^p nu(dz)
    double dropped_p_mass() const;             // int_{|z|<1/n} |z|^p nu(dz)
    double nu_integral(const std::function<double(double)>& f) const;  // int_{S_n} f dnu
    double sample_mark(RngStream& rng) const;
};

struct JumpEvent {
    double time;
    double mark;
};

// Discrete (W, eta) pair: per-cell Gaussian mode increments plus the jump
// events of the truncated Poisson random measure, reproducible from the
// seed record.
struct NoiseRealization {
    int cells = 0;
    int components = 1;
    int wiener_modes = 0;
    std::vector<double> dw;  // [cell][component][mode]
    std::vector<JumpEvent> jumps;
    int truncation_n = 1;
    double mark_mean = 0.0;  // int_{S_n} z nu(dz), carried so replay needs no spec
    std::uint64_t seed = 0;
    std::uint64_t path_id = 0;

    double dW(int cell, int comp, int mode) const {
        return dw[(static_cast<std::size_t>(cell) * components + comp) * wiener_modes + mode];
    }
};

std::vector<double> sample_wiener(const TimeGrid& grid, const WienerSpec& spec, std::uint64_t seed,
                                  std::uint64_t path_id = 0, int components = 1);

// total count Poisson(T*nu(S_n)), times uniform order statistics, marks iid
std::vector<JumpEvent> sample_prm(const IntensitySpec& spec, double horizon, std::uint64_t seed,
                                  std::uint64_t path_id = 0);

NoiseRealization sample_noise(const TimeGrid& grid, int components, const WienerSpec& wiener,
                              const IntensitySpec& intensity, std::uint64_t seed,
                              std::uint64_t path_id = 0);

// cell index of the step convention: integrands are constant on (t_k, t_{k+1}]
int cell_of(const TimeGrid& grid, double t);

using StepIntegrand = std::function<Field(int cell, double mark)>;

// sum of f over jumps in (a,b] minus the compensator integral, the latter by
// deterministic quadrature over the truncated mark density
Field compensated_integral(const StepIntegrand& integrand, const NoiseRealization& noise,
                           const IntensitySpec& spec, const TimeGrid& grid, double a, double b);

// L(t_k) = sum of marks up to t_k minus t_k * int_{S_n} z nu(dz)
std::vector<double> levy_path(const NoiseRealization& noise, const IntensitySpec& spec,
                              const TimeGrid& grid);

// binary record, little-endian 64-bit floats, length-prefixed jump list
void write_noise(std::ostream& os, const NoiseRealization& noise);
NoiseRealization read_noise(std::istream& is);

}  // namespace rdspde
