#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace rdspde {

// Pairwise (tree) summation with a fixed association order, so reductions
// are bit-stable regardless of how many threads produced the inputs.
double tree_sum(std::span<const double> x);
double tree_mean(std::span<const double> x);

// Monte-Carlo standard error by nonoverlapping batch means.
double batch_mean_stderr(std::span<const double> x, int batches = 16);

// Energy distance between two samples of feature vectors (row-major,
// dim columns each).  Zero iff the samples coincide as multisets; used as
// the computable stand-in for a metric on path laws.
double energy_distance(std::span<const double> a, std::span<const double> b, int dim);

struct PermutationTest {
    double observed = 0.0;
    double quantile = 0.0;  // requested upper quantile of the permutation law
    double p_value = 0.0;
    bool significant = false;  // observed > quantile
};

// Two-sample permutation test for the energy distance at the given
// significance level.  Deterministic given the seed.
PermutationTest energy_permutation_test(std::span<const double> a, std::span<const double> b, int dim,
                                        double significance, int permutations, std::uint64_t seed);

// regularized upper incomplete gamma Q(a,x)
double gamma_q(double a, double x);

// survival p-value of a Pearson statistic under chi-square with df degrees
double chi_square_pvalue(double statistic, int df);

struct GofResult {
    double statistic = 0.0;
    int df = 0;
    double p_value = 0.0;
};

// Pearson goodness-of-fit of observed integer counts against expected bin
// probabilities; the final bin absorbs the tail
GofResult chi_square_gof(std::span<const long> observed, std::span<const double> expected);

}  // namespace rdspde
