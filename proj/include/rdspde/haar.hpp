#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rdspde/path.hpp"

namespace rdspde {

struct ProjectionLevel {
    int kappa = 1;
    Field initial_datum;  // value used on the first output cell

    void validate() const {
        if (kappa < 1) throw std::invalid_argument("ProjectionLevel: kappa must be >= 1");
        if (!initial_datum.finite()) throw std::invalid_argument("ProjectionLevel: non-finite datum");
    }
};

// Cell-average projection onto level-kappa piecewise constants.  Exact for
// piecewise-constant inputs; trapezoid with per-cell subdivision for
// node-indexed inputs.
PathSample haar_project(const PathSample& path, int kappa, int subdiv = 8);

// One-cell delay of a piecewise-constant path; the first cell holds `hold`.
PathSample shift_path(const PathSample& path, const Field& hold);

// Shifted projection: cell 0 = initial datum, cell k (k>=1) = average of the
// input over cell k-1.  Output cell k depends only on data up to t_k.
PathSample shifted_projection(const PathSample& path, const ProjectionLevel& level, int subdiv = 8);

struct IneqRecord {
    int path_id = 0;
    int kappa = 0;
    std::string ineq;
    double m = 0.0;
    double alpha = 0.0;  // 0 for alpha-independent inequalities
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;  // rhs - lhs
};

struct SuiteParams {
    std::vector<int> kappas{1, 2, 3, 4, 5, 6, 7, 8};
    std::vector<double> ms{2.0, 3.0};
    std::vector<double> alphas{0.1, 0.25};
    double rho = 0.0;
    double rtol = 1e-9;
    int subdiv = 8;
};

struct SuiteReport {
    long rows = 0;
    long violations = 0;
    double worst_rel = -1.0;        // max (lhs-rhs)/max(lhs,rhs); negative = all slack
    std::string worst_ineq;
    double c_wstab = 0.0;           // empirical constant for the W-stability bound (reported only)
    long wstab_rows = 0;
};

using IneqSink = std::function<void(const IneqRecord&)>;

// Evaluates both sides of the projection/shift inequalities over a corpus
// of paths and reports violations beyond the relative tolerance.  The
// W-stability bound is reported with its empirical constant rather than
// counted as a violation.
SuiteReport projection_inequality_suite(std::span<const PathSample> corpus, const SuiteParams& params,
                                        std::span<const double> lambda, const IneqSink& sink = {});

// Scalar test corpus: alternating piecewise-constant (level const_level) and
// piecewise-linear (node-indexed, level linear_level) paths with iid and
// random-walk values in [-1, 1].
std::vector<PathSample> make_projection_corpus(int count, std::uint64_t seed, double horizon = 1.0,
                                               int const_level = 8, int linear_level = 5);

}  // namespace rdspde
