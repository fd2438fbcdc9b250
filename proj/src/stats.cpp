#include "rdspde/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rdspde/rng.hpp"

namespace rdspde {

double tree_sum(std::span<const double> x) {
    if (x.empty()) return 0.0;
    if (x.size() == 1) return x[0];
    const std::size_t half = x.size() / 2;
    return tree_sum(x.first(half)) + tree_sum(x.subspan(half));
}

double tree_mean(std::span<const double> x) {
    if (x.empty()) throw std::invalid_argument("tree_mean: empty input");
    return tree_sum(x) / static_cast<double>(x.size());
}

double batch_mean_stderr(std::span<const double> x, int batches) {
    if (batches < 2) throw std::invalid_argument("batch_mean_stderr: need >= 2 batches");
    if (x.size() < static_cast<std::size_t>(batches)) batches = static_cast<int>(x.size());
    if (batches < 2) return 0.0;
    const std::size_t per = x.size() / batches;
    std::vector<double> means(batches);
    for (int b = 0; b < batches; ++b) {
        const std::size_t lo = b * per;
        const std::size_t hi = (b == batches - 1) ? x.size() : lo + per;
        means[b] = tree_mean(x.subspan(lo, hi - lo));
    }
    const double m = tree_mean(means);
    double s2 = 0.0;
    for (double v : means) s2 += (v - m) * (v - m);
    s2 /= (batches - 1);
    return std::sqrt(s2 / batches);
}

namespace {

double euclid(const double* a, const double* b, int dim) {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

// mean of D[rows x][cols y] over the index sets, in a fixed order
double block_mean(const std::vector<double>& dist, std::size_t n_total,
                  std::span<const std::uint32_t> xs, std::span<const std::uint32_t> ys) {
    std::vector<double> rows(xs.size());
    std::vector<double> cols(ys.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double* row = dist.data() + static_cast<std::size_t>(xs[i]) * n_total;
        for (std::size_t j = 0; j < ys.size(); ++j) cols[j] = row[ys[j]];
        rows[i] = tree_sum(cols);
    }
    return tree_sum(rows) / (static_cast<double>(xs.size()) * static_cast<double>(ys.size()));
}

double energy_from_dist(const std::vector<double>& dist, std::size_t n_total,
                        std::span<const std::uint32_t> xs, std::span<const std::uint32_t> ys) {
    const double ab = block_mean(dist, n_total, xs, ys);
    const double aa = block_mean(dist, n_total, xs, xs);
    const double bb = block_mean(dist, n_total, ys, ys);
    return 2.0 * ab - aa - bb;
}

std::vector<double> pooled_distances(std::span<const double> a, std::span<const double> b, int dim,
                                     std::size_t& n_total, std::size_t& na) {
    if (dim <= 0) throw std::invalid_argument("energy_distance: dim must be positive");
    if (a.size() % dim != 0 || b.size() % dim != 0)
        throw std::invalid_argument("energy_distance: sample size not a multiple of dim");
    na = a.size() / dim;
    const std::size_t nb = b.size() / dim;
    if (na == 0 || nb == 0) throw std::invalid_argument("energy_distance: empty sample");
    n_total = na + nb;
    std::vector<double> pool(a.begin(), a.end());
    pool.insert(pool.end(), b.begin(), b.end());
    std::vector<double> dist(n_total * n_total, 0.0);
    for (std::size_t i = 0; i < n_total; ++i)
        for (std::size_t j = i + 1; j < n_total; ++j) {
            const double d = euclid(pool.data() + i * dim, pool.data() + j * dim, dim);
            dist[i * n_total + j] = d;
            dist[j * n_total + i] = d;
        }
    return dist;
}

}  // namespace

double energy_distance(std::span<const double> a, std::span<const double> b, int dim) {
    std::size_t n_total = 0, na = 0;
    const auto dist = pooled_distances(a, b, dim, n_total, na);
    std::vector<std::uint32_t> xs(na), ys(n_total - na);
    for (std::size_t i = 0; i < na; ++i) xs[i] = static_cast<std::uint32_t>(i);
    for (std::size_t j = na; j < n_total; ++j) ys[j - na] = static_cast<std::uint32_t>(j);
    return energy_from_dist(dist, n_total, xs, ys);
}

PermutationTest energy_permutation_test(std::span<const double> a, std::span<const double> b, int dim,
                                        double significance, int permutations, std::uint64_t seed) {
    std::size_t n_total = 0, na = 0;
    const auto dist = pooled_distances(a, b, dim, n_total, na);

    std::vector<std::uint32_t> idx(n_total);
    for (std::size_t i = 0; i < n_total; ++i) idx[i] = static_cast<std::uint32_t>(i);

    PermutationTest out;
    out.observed = energy_from_dist(dist, n_total, std::span(idx).first(na), std::span(idx).subspan(na));

    std::vector<double> draws(permutations);
    RngStream rng(seed, 0, Substream::shuffle);
    std::vector<std::uint32_t> perm = idx;
    for (int p = 0; p < permutations; ++p) {
        for (std::size_t i = n_total - 1; i > 0; --i)
            std::swap(perm[i], perm[rng.below(i + 1)]);
        draws[p] = energy_from_dist(dist, n_total, std::span(perm).first(na), std::span(perm).subspan(na));
    }
    std::vector<double> sorted = draws;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t rank =
        std::min(sorted.size() - 1,
                 static_cast<std::size_t>(std::ceil((1.0 - significance) * permutations)));
    out.quantile = sorted[rank];
    int ge = 0;
    for (double d : draws)
        if (d >= out.observed) ++ge;
    out.p_value = (ge + 1.0) / (permutations + 1.0);
    out.significant = out.observed > out.quantile;
    return out;
}

namespace {

// series expansion of P(a,x), valid for x < a+1
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < 500; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// continued fraction for Q(a,x), valid for x >= a+1
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q: bad arguments");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

double chi_square_pvalue(double statistic, int df) {
    if (df < 1) throw std::invalid_argument("chi_square_pvalue: df must be >= 1");
    return gamma_q(0.5 * df, 0.5 * statistic);
}

GofResult chi_square_gof(std::span<const long> observed, std::span<const double> expected) {
    if (observed.size() != expected.size() || observed.size() < 2)
        throw std::invalid_argument("chi_square_gof: need matching bins, at least 2");
    GofResult r;
    for (std::size_t b = 0; b < observed.size(); ++b) {
        if (expected[b] <= 0.0) throw std::invalid_argument("chi_square_gof: empty expected bin");
        const double d = observed[b] - expected[b];
        r.statistic += d * d / expected[b];
    }
    r.df = static_cast<int>(observed.size()) - 1;
    r.p_value = chi_square_pvalue(r.statistic, r.df);
    return r;
}

}  // namespace rdspde
