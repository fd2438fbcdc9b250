#include "rdspde/noise.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <stdexcept>

namespace rdspde {

namespace {

// adaptive Simpson on [a,b]
double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm,
               double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-12) {
    if (b <= a) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

double gauss_tail(double x) { return 0.5 * std::erfc(x / 1.4142135623730951); }  // P(Z >= x)

}  // namespace

void WienerSpec::validate() const {
    if (mode_count < 1) throw std::invalid_argument("WienerSpec: mode_count must be >= 1");
    for (double q : weights)
        if (!(q >= 0.0) || !std::isfinite(q))
            throw std::invalid_argument("WienerSpec: weights must be finite and >= 0");
}

void IntensitySpec::validate() const {
    if (truncation_n < 1) throw std::invalid_argument("IntensitySpec: truncation_n must be >= 1");
    if (!(p_exponent > 0.0 && p_exponent <= 2.0))
        throw std::invalid_argument("IntensitySpec: p_exponent must lie in (0,2]");
    switch (kind) {
        case Kind::two_point:
        case Kind::gaussian_marks:
            if (!(rate >= 0.0)) throw std::invalid_argument("IntensitySpec: rate must be >= 0");
            if (!(two_point_p >= 0.0 && two_point_p <= 1.0))
                throw std::invalid_argument("IntensitySpec: two_point_p must lie in [0,1]");
            if (kind == Kind::gaussian_marks && !(mark_sigma > 0.0))
                throw std::invalid_argument("IntensitySpec: mark_sigma must be positive");
            break;
        case Kind::tempered_stable:
            if (!(stable_c > 0.0) || !(stable_theta > 0.0))
                throw std::invalid_argument("IntensitySpec: stable_c/theta must be positive");
            if (!(stable_a > 0.0 && stable_a < 2.0))
                throw std::invalid_argument("IntensitySpec: stable_a must lie in (0,2)");
            // int min(1,|z|^p) nu(dz) < infinity needs p above the stable index
            if (!(p_exponent > stable_a))
                throw std::invalid_argument("IntensitySpec: p_exponent must exceed stable_a");
            break;
    }
    if (!std::isfinite(mass())) throw std::invalid_argument("IntensitySpec: nu(S_n) not finite");
}

double IntensitySpec::nu_integral(const std::function<double(double)>& f) const {
    const double eps = cutoff();
    switch (kind) {
        case Kind::two_point:
            return eps <= 1.0 ? rate * (two_point_p * f(1.0) + (1.0 - two_point_p) * f(-1.0)) : 0.0;
        case Kind::gaussian_marks: {
            const double s = mark_sigma;
            auto dens = [&](double z) {
                return rate * std::exp(-0.5 * z * z / (s * s)) / (s * 2.5066282746310005);
            };
            const double hi = 10.0 * s + eps;
            return integrate([&](double z) { return f(z) * dens(z); }, eps, hi) +
                   integrate([&](double z) { return f(-z) * dens(z); }, eps, hi);
        }
        case Kind::tempered_stable: {
            auto dens = [&](double z) {
                return stable_c * std::pow(z, -1.0 - stable_a) * std::exp(-stable_theta * z);
            };
            const double hi = eps + 80.0 / stable_theta;
            return integrate([&](double z) { return f(z) * dens(z); }, eps, hi) +
                   integrate([&](double z) { return f(-z) * dens(z); }, eps, hi);
        }
    }
    throw std::logic_error("IntensitySpec: unknown kind");
}

double IntensitySpec::mass() const {
    switch (kind) {
        case Kind::two_point:
            return cutoff() <= 1.0 ? rate : 0.0;
        case Kind::gaussian_marks:
            return rate * 2.0 * gauss_tail(cutoff() / mark_sigma);
        case Kind::tempered_stable: {
            // samplers evaluate this per realization; memoize the quadrature
            static std::mutex mu;
            static std::map<std::array<double, 4>, double> cache;
            const std::array<double, 4> key{stable_c, stable_a, stable_theta,
                                            static_cast<double>(truncation_n)};
            {
                std::lock_guard<std::mutex> lock(mu);
                const auto it = cache.find(key);
                if (it != cache.end()) return it->second;
            }
            const double value = nu_integral([](double) { return 1.0; });
            std::lock_guard<std::mutex> lock(mu);
            cache.emplace(key, value);
            return value;
        }
    }
    throw std::logic_error("IntensitySpec: unknown kind");
}

double IntensitySpec::mean_mark() const {
    switch (kind) {
        case Kind::two_point:
            return cutoff() <= 1.0 ? rate * (2.0 * two_point_p - 1.0) : 0.0;
        case Kind::gaussian_marks:
        case Kind::tempered_stable:
            return 0.0;  // symmetric
    }
    throw std::logic_error("IntensitySpec: unknown kind");
}

double IntensitySpec::abs_moment(double p) const {
    if (kind == Kind::two_point) return cutoff() <= 1.0 ? rate : 0.0;
    return nu_integral([p](double z) { return std::pow(std::abs(z), p); });
}

double IntensitySpec::dropped_p_mass() const {
    const double eps = cutoff();
    const double p = p_exponent;
    switch (kind) {
        case Kind::two_point:
            return eps > 1.0 ? rate : 0.0;
        case Kind::gaussian_marks: {
            const double s = mark_sigma;
            auto dens = [&](double z) {
                return rate * std::exp(-0.5 * z * z / (s * s)) / (s * 2.5066282746310005);
            };
            return 2.0 * integrate([&](double z) { return std::pow(z, p) * dens(z); }, 0.0, eps);
        }
        case Kind::tempered_stable: {
            auto dens = [&](double z) {
                return stable_c * std::pow(z, -1.0 - stable_a) * std::exp(-stable_theta * z);
            };
            // integrand ~ z^(p-1-a) near 0; integrable since p > a is required for finiteness
            if (p <= stable_a) return std::numeric_limits<double>::infinity();
            return 2.0 * integrate([&](double z) { return std::pow(z, p) * dens(z); }, 1e-14, eps);
        }
    }
    throw std::logic_error("IntensitySpec: unknown kind");
}

double IntensitySpec::sample_mark(RngStream& rng) const {
    const double eps = cutoff();
    switch (kind) {
        case Kind::two_point:
            return rng.uniform() < two_point_p ? 1.0 : -1.0;
        case Kind::gaussian_marks: {
            for (int tries = 0; tries < 100000; ++tries) {
                const double z = mark_sigma * rng.normal();
                if (std::abs(z) >= eps) return z;
            }
            throw std::runtime_error("IntensitySpec: mark rejection sampler stalled");
        }
        case Kind::tempered_stable: {
            const double sign = rng.uniform() < 0.5 ? 1.0 : -1.0;
            for (int tries = 0; tries < 1000000; ++tries) {
                // Pareto proposal on [eps, inf), thinned by the exponential taper
                const double z = eps * std::pow(rng.uniform(), -1.0 / stable_a);
                if (rng.uniform() <= std::exp(-stable_theta * (z - eps))) return sign * z;
            }
            throw std::runtime_error("IntensitySpec: mark rejection sampler stalled");
        }
    }
    throw std::logic_error("IntensitySpec: unknown kind");
}

std::vector<double> sample_wiener(const TimeGrid& grid, const WienerSpec& spec, std::uint64_t seed,
                                  std::uint64_t path_id, int components) {
    grid.validate();
    spec.validate();
    RngStream rng(seed, path_id, Substream::wiener);
    const int cells = grid.cells();
    const double tau = grid.dt();
    std::vector<double> dw(static_cast<std::size_t>(cells) * components * spec.mode_count);
    std::size_t idx = 0;
    for (int c = 0; c < cells; ++c)
        for (int i = 0; i < components; ++i)
            for (int k = 0; k < spec.mode_count; ++k)
                dw[idx++] = std::sqrt(spec.weight(k) * tau) * rng.normal();
    return dw;
}

std::vector<JumpEvent> sample_prm(const IntensitySpec& spec, double horizon, std::uint64_t seed,
                                  std::uint64_t path_id) {
    spec.validate();
    if (horizon < 0.0) throw std::invalid_argument("sample_prm: negative horizon");
    std::vector<JumpEvent> jumps;
    if (horizon == 0.0) return jumps;
    const double total = horizon * spec.mass();
    RngStream count_rng(seed, path_id, Substream::prm_count);
    const long n = count_rng.poisson(total);
    jumps.reserve(n);
    RngStream time_rng(seed, path_id, Substream::prm_times);
    RngStream mark_rng(seed, path_id, Substream::prm_marks);
    for (long j = 0; j < n; ++j)
        jumps.push_back({horizon * time_rng.uniform(), spec.sample_mark(mark_rng)});
    std::sort(jumps.begin(), jumps.end(),
              [](const JumpEvent& a, const JumpEvent& b) { return a.time < b.time; });
    return jumps;
}

NoiseRealization sample_noise(const TimeGrid& grid, int components, const WienerSpec& wiener,
                              const IntensitySpec& intensity, std::uint64_t seed,
                              std::uint64_t path_id) {
    NoiseRealization n;
    n.cells = grid.cells();
    n.components = components;
    n.wiener_modes = wiener.mode_count;
    n.dw = sample_wiener(grid, wiener, seed, path_id, components);
    n.jumps = sample_prm(intensity, grid.horizon, seed, path_id);
    n.truncation_n = intensity.truncation_n;
    n.mark_mean = intensity.mean_mark();
    n.seed = seed;
    n.path_id = path_id;
    return n;
}

int cell_of(const TimeGrid& grid, double t) {
    const int c = static_cast<int>(std::ceil(t / grid.dt())) - 1;
    return std::max(0, std::min(grid.cells() - 1, c));
}

Field compensated_integral(const StepIntegrand& integrand, const NoiseRealization& noise,
                           const IntensitySpec& spec, const TimeGrid& grid, double a, double b) {
    if (a < 0.0 || b > grid.horizon || a > b)
        throw std::invalid_argument("compensated_integral: window outside (0,T]");
    Field acc;
    bool seeded = false;
    for (const auto& j : noise.jumps) {
        if (j.time <= a || j.time > b) continue;
        Field f = integrand(cell_of(grid, j.time), j.mark);
        if (!seeded) {
            acc = std::move(f);
            seeded = true;
        } else {
            axpy(acc, 1.0, f);
        }
    }
    // compensator: per-cell mark integral times overlap length
    const double tau = grid.dt();
    for (int c = 0; c < grid.cells(); ++c) {
        const double lo = std::max(a, c * tau);
        const double hi = std::min(b, (c + 1) * tau);
        if (hi <= lo) continue;
        Field probe = integrand(c, spec.kind == IntensitySpec::Kind::two_point ? 1.0 : spec.cutoff());
        Field comp(probe.components, probe.modes);
        for (std::size_t i = 0; i < comp.c.size(); ++i) {
            comp.c[i] = spec.nu_integral([&](double z) {
                return integrand(c, z).c[i];
            });
        }
        if (!seeded) {
            acc = Field(comp.components, comp.modes);
            seeded = true;
        }
        axpy(acc, -(hi - lo), comp);
    }
    if (!seeded) throw std::invalid_argument("compensated_integral: empty window");
    return acc;
}

std::vector<double> levy_path(const NoiseRealization& noise, const IntensitySpec& spec,
                              const TimeGrid& grid) {
    const double drift = spec.mean_mark();
    std::vector<double> out(grid.cells() + 1, 0.0);
    std::size_t j = 0;
    double running = 0.0;
    for (int k = 0; k <= grid.cells(); ++k) {
        const double t = grid.node(k);
        while (j < noise.jumps.size() && noise.jumps[j].time <= t) running += noise.jumps[j++].mark;
        out[k] = running - t * drift;
    }
    return out;
}

namespace {
template <typename T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}
}  // namespace

void write_noise(std::ostream& os, const NoiseRealization& n) {
    os.write("RDN1", 4);
    put<std::uint64_t>(os, static_cast<std::uint64_t>(n.cells));
    put<std::uint64_t>(os, static_cast<std::uint64_t>(n.components));
    put<std::uint64_t>(os, static_cast<std::uint64_t>(n.wiener_modes));
    put<std::uint64_t>(os, static_cast<std::uint64_t>(n.truncation_n));
    put(os, n.mark_mean);
    put<std::uint64_t>(os, n.seed);
    put<std::uint64_t>(os, n.path_id);
    for (double x : n.dw) put(os, x);
    put<std::uint64_t>(os, n.jumps.size());
    for (const auto& j : n.jumps) {
        put(os, j.time);
        put(os, j.mark);
    }
}

NoiseRealization read_noise(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::string_view(magic, 4) != "RDN1")
        throw std::runtime_error("read_noise: bad magic");
    NoiseRealization n;
    n.cells = static_cast<int>(get<std::uint64_t>(is));
    n.components = static_cast<int>(get<std::uint64_t>(is));
    n.wiener_modes = static_cast<int>(get<std::uint64_t>(is));
    n.truncation_n = static_cast<int>(get<std::uint64_t>(is));
    n.mark_mean = get<double>(is);
    n.seed = get<std::uint64_t>(is);
    n.path_id = get<std::uint64_t>(is);
    n.dw.resize(static_cast<std::size_t>(n.cells) * n.components * n.wiener_modes);
    for (double& x : n.dw) x = get<double>(is);
    const std::uint64_t count = get<std::uint64_t>(is);
    n.jumps.resize(count);
    for (auto& j : n.jumps) {
        j.time = get<double>(is);
        j.mark = get<double>(is);
    }
    if (!is) throw std::runtime_error("read_noise: truncated record");
    return n;
}

}  // namespace rdspde
