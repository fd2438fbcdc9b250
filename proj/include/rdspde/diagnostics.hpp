#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rdspde/path.hpp"
#include "rdspde/stats.hpp"

namespace rdspde {

// Fixed functional battery for comparing path laws: spectral coefficients of
// the first few modes at five time points plus the Bochner norm.
struct BatterySpec {
    int max_modes = 4;
    int time_points = 5;
    double m = 2.0;
    double rho = 0.0;
};

std::vector<double> battery_features(const PathSample& path, const BatterySpec& battery,
                                     std::span<const double> lambda);
int battery_dim(const PathSample& path, const BatterySpec& battery);

std::vector<double> ensemble_features(const PathEnsemble& ensemble, const BatterySpec& battery,
                                      std::span<const double> lambda);

// energy distance between battery-evaluated feature samples
double empirical_law_distance(const PathEnsemble& a, const PathEnsemble& b,
                              const BatterySpec& battery, std::span<const double> lambda);

PermutationTest law_permutation_test(const PathEnsemble& a, const PathEnsemble& b,
                                     const BatterySpec& battery, std::span<const double> lambda,
                                     double significance, int permutations, std::uint64_t seed);

struct TightnessPoint {
    double radius = 0.0;
    double empirical_tail = 0.0;
    double chebyshev_bound = 0.0;
};

// empirical tail of the X'-norm against the Chebyshev bound C/R^m0 with
// C the empirical m0-moment; the bound holds exactly for the empirical law
std::vector<TightnessPoint> tightness_proxy(const PathEnsemble& ensemble,
                                            std::span<const double> radii, double m0,
                                            const AdmissibilitySpec& norms,
                                            std::span<const double> lambda);

struct MomentTable {
    double phi_mean = 0.0;       // E |.|_X^m
    double phi_se = 0.0;
    double m0_xprime = 0.0;      // E |.|_{X'}^m0
    double m0_se = 0.0;
    double m1_x = 0.0;           // E |.|_X^m1
    double m1_se = 0.0;
    int paths = 0;
    int excluded = 0;
};

MomentTable moment_table(const PathEnsemble& ensemble, const AdmissibilitySpec& norms, double m0,
                         double m1, std::span<const double> lambda);

}  // namespace rdspde
