// Wall-clock comparison of the OpenMP ensemble map against the serial
// reference on a Gierer-Meinhardt forward-induction workload.
#include <chrono>
#include <cstdio>
#include <vector>

#include "rdspde/solver.hpp"
#include "rdspde/stats.hpp"

using namespace rdspde;

namespace {

struct Workload {
    ModelSpec model;
    DomainSpec domain{1, 1.0, 8};
    WienerSpec wiener{8, {}};
    IntensitySpec intensity;
    SolveConfig config;
    Field w0;

    Workload() {
        model.reaction = Reaction::gierer_meinhardt;
        model.rc = {1.0, 1.0, 1.0, 1.0};
        model.diffusion = {0.02, 0.5};
        model.sigma = {NoiseCoeff::Kind::multiplicative, {0.2, 0.2}};
        model.jump = {NoiseCoeff::Kind::multiplicative, {0.05, 0.05}};
        intensity.kind = IntensitySpec::Kind::two_point;
        intensity.rate = 2.0;
        config.kappa = 7;
        config.substeps = 4;
        config.ensemble = 256;
        w0 = Field(2, domain.total_modes());
        w0.at(0, 0) = 0.8;
        w0.at(1, 0) = 0.9;
    }
};

double run(const Workload& wl, int threads, bool serial_reference, double& checksum) {
    const SpectralWorkspace ws(wl.domain);
    std::vector<double> sink(wl.config.ensemble, 0.0);
    const auto t0 = std::chrono::steady_clock::now();
    auto body = [&](int i) {
        const auto noise = sample_noise(wl.config.grid(), 2, wl.wiener, wl.intensity, 1234,
                                        static_cast<std::uint64_t>(i));
        const auto fwd = forward_induction(wl.model, noise, wl.config, ws, wl.w0, wl.w0);
        sink[i] = fwd.failed ? 0.0 : fwd.wstar.v.back().c[0];
    };
    if (serial_reference)
        for_each_path_serial(wl.config.ensemble, body);
    else
        for_each_path(wl.config.ensemble, threads, body);
    const auto t1 = std::chrono::steady_clock::now();
    checksum = tree_sum(sink);
    return std::chrono::duration<double>(t1 - t0).count();
}

}  // namespace

int main() {
    Workload wl;
    double ref_sum = 0.0;
    const double serial = run(wl, 1, true, ref_sum);
    std::printf("serial reference: %.3f s  checksum %.12g\n", serial, ref_sum);
    bool identical = true;
    for (int threads : {1, 2, 4, 8}) {
        double sum = 0.0;
        const double t = run(wl, threads, false, sum);
        identical = identical && sum == ref_sum;
        std::printf("omp threads=%d: %.3f s  speedup=%.2fx\n", threads, t, serial / t);
    }
    std::printf("parallel results bit-identical to serial reference: %s\n",
                identical ? "yes" : "NO");
    return identical ? 0 : 1;
}
