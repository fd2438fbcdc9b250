#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace rdspde {

// Counter-based random stream.  Every draw is a pure function of
// (seed, path, substream, counter), so ensembles can be sampled in any
// order, from any number of threads, with identical results.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

enum class Substream : std::uint64_t {
    wiener = 1,
    prm_count = 2,
    prm_times = 3,
    prm_marks = 4,
    corpus = 5,
    init = 6,
    shuffle = 7,
    misc = 8,
};

class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint64_t path_id, Substream sub)
        : key_(mix64(mix64(seed) ^ mix64(path_id * 0x9e3779b97f4a7c15ULL + 0x1234567)) ^
               mix64(static_cast<std::uint64_t>(sub) * 0xda942042e4dd58b5ULL)) {}

    std::uint64_t next_u64() { return mix64(key_ ^ mix64(counter_++)); }

    // uniform on (0,1); never returns 0 or 1
    double uniform() {
        const std::uint64_t u = next_u64() >> 11;  // 53 bits
        return (static_cast<double>(u) + 0.5) * (1.0 / 9007199254740992.0);
    }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double c = std::cos(6.283185307179586476925286766559 * u2);
        const double s = std::sin(6.283185307179586476925286766559 * u2);
        cached_ = r * s;
        have_cached_ = true;
        return r * c;
    }

    double exponential() { return -std::log(uniform()); }

    // Knuth multiplication method; fine for the desk-scale means used here.
    long poisson(double mean) {
        if (mean < 0.0) throw std::invalid_argument("poisson: negative mean");
        if (mean == 0.0) return 0;
        if (mean > 5000.0) throw std::invalid_argument("poisson: mean too large for exact sampler");
        const double limit = std::exp(-mean);
        long k = 0;
        double prod = uniform();
        while (prod > limit) {
            ++k;
            prod *= uniform();
        }
        return k;
    }

    // integer in [0, n)
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace rdspde
