#include "rdspde/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rdspde {

int battery_dim(const PathSample& path, const BatterySpec& battery) {
    const Field& f = path.v.front();
    return f.components * std::min(battery.max_modes, f.modes) * battery.time_points + 1;
}

std::vector<double> battery_features(const PathSample& path, const BatterySpec& battery,
                                     std::span<const double> lambda) {
    path.validate();
    const Field& f0 = path.v.front();
    const int modes = std::min(battery.max_modes, f0.modes);
    std::vector<double> out;
    out.reserve(battery_dim(path, battery));
    const int count = static_cast<int>(path.v.size());
    for (int p = 1; p <= battery.time_points; ++p) {
        const int idx = path.node_indexed ? ((count - 1) * p) / battery.time_points
                                          : std::max(0, (count * p) / battery.time_points - 1);
        const Field& f = path.v[idx];
        for (int i = 0; i < f.components; ++i)
            for (int k = 0; k < modes; ++k) out.push_back(f.at(i, k));
    }
    out.push_back(bochner_norm(path, battery.m, battery.rho, lambda));
    return out;
}

std::vector<double> ensemble_features(const PathEnsemble& ensemble, const BatterySpec& battery,
                                      std::span<const double> lambda) {
    if (ensemble.paths.empty()) throw std::invalid_argument("ensemble_features: empty ensemble");
    std::vector<double> out;
    const int dim = battery_dim(ensemble.paths.front(), battery);
    out.reserve(static_cast<std::size_t>(dim) * ensemble.paths.size());
    for (const auto& p : ensemble.paths) {
        const auto f = battery_features(p, battery, lambda);
        out.insert(out.end(), f.begin(), f.end());
    }
    return out;
}

double empirical_law_distance(const PathEnsemble& a, const PathEnsemble& b,
                              const BatterySpec& battery, std::span<const double> lambda) {
    const int dim = battery_dim(a.paths.front(), battery);
    return energy_distance(ensemble_features(a, battery, lambda),
                           ensemble_features(b, battery, lambda), dim);
}

PermutationTest law_permutation_test(const PathEnsemble& a, const PathEnsemble& b,
                                     const BatterySpec& battery, std::span<const double> lambda,
                                     double significance, int permutations, std::uint64_t seed) {
    const int dim = battery_dim(a.paths.front(), battery);
    return energy_permutation_test(ensemble_features(a, battery, lambda),
                                   ensemble_features(b, battery, lambda), dim, significance,
                                   permutations, seed);
}

namespace {

std::vector<double> xprime_norms(const PathEnsemble& ensemble, const AdmissibilitySpec& norms,
                                 std::span<const double> lambda) {
    std::vector<double> out(ensemble.paths.size());
    for (std::size_t i = 0; i < ensemble.paths.size(); ++i) {
        const auto& p = ensemble.paths[i];
        out[i] = bochner_norm(p, norms.m, norms.rho_prime, lambda) +
                 frac_sobolev_norm(p, norms.alpha, norms.m, norms.rho0, lambda);
    }
    return out;
}

}  // namespace

std::vector<TightnessPoint> tightness_proxy(const PathEnsemble& ensemble,
                                            std::span<const double> radii, double m0,
                                            const AdmissibilitySpec& norms,
                                            std::span<const double> lambda) {
    if (ensemble.paths.empty()) throw std::invalid_argument("tightness_proxy: empty ensemble");
    const auto s = xprime_norms(ensemble, norms, lambda);
    std::vector<double> powers(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) powers[i] = std::pow(s[i], m0);
    const double c = tree_mean(powers);
    std::vector<TightnessPoint> curve;
    curve.reserve(radii.size());
    for (double r : radii) {
        if (!(r > 0.0)) throw std::invalid_argument("tightness_proxy: radii must be positive");
        int tail = 0;
        for (double x : s)
            if (x >= r) ++tail;
        curve.push_back({r, static_cast<double>(tail) / s.size(), c / std::pow(r, m0)});
    }
    return curve;
}

MomentTable moment_table(const PathEnsemble& ensemble, const AdmissibilitySpec& norms, double m0,
                         double m1, std::span<const double> lambda) {
    if (ensemble.paths.empty()) throw std::invalid_argument("moment_table: empty ensemble");
    MomentTable t;
    t.paths = static_cast<int>(ensemble.paths.size());
    t.excluded = ensemble.excluded;
    std::vector<double> phim(ensemble.paths.size());
    std::vector<double> xm1(ensemble.paths.size());
    for (std::size_t i = 0; i < ensemble.paths.size(); ++i) {
        const double bx = bochner_norm(ensemble.paths[i], norms.m, norms.rho, lambda);
        phim[i] = std::pow(bx, norms.m);
        xm1[i] = std::pow(bx, m1);
    }
    const auto xp = xprime_norms(ensemble, norms, lambda);
    std::vector<double> xpm0(xp.size());
    for (std::size_t i = 0; i < xp.size(); ++i) xpm0[i] = std::pow(xp[i], m0);
    t.phi_mean = tree_mean(phim);
    t.phi_se = batch_mean_stderr(phim);
    t.m0_xprime = tree_mean(xpm0);
    t.m0_se = batch_mean_stderr(xpm0);
    t.m1_x = tree_mean(xm1);
    t.m1_se = batch_mean_stderr(xm1);
    return t;
}

}  // namespace rdspde
