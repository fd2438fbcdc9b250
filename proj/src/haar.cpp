#include "rdspde/haar.hpp"

#include <cmath>

#include "rdspde/rng.hpp"

namespace rdspde {

PathSample haar_project(const PathSample& path, int kappa, int subdiv) {
    path.validate();
    if (kappa < 0 || kappa > 20) throw std::invalid_argument("haar_project: kappa out of range");
    PathSample out;
    out.grid = TimeGrid{path.grid.horizon, kappa};
    out.node_indexed = false;

    if (!path.node_indexed) {
        if (path.grid.level < kappa)
            throw std::invalid_argument("haar_project: input grid coarser than target level");
        const int per = 1 << (path.grid.level - kappa);
        out.v.reserve(out.grid.cells());
        for (int c = 0; c < out.grid.cells(); ++c) {
            Field acc = path.v[static_cast<std::size_t>(c) * per];
            for (int j = 1; j < per; ++j) {
                const Field& f = path.v[static_cast<std::size_t>(c) * per + j];
                for (std::size_t i = 0; i < acc.c.size(); ++i) acc.c[i] += f.c[i];
            }
            for (double& x : acc.c) x /= per;
            out.v.push_back(std::move(acc));
        }
        return out;
    }

    const auto q = path_quadrature(path, kappa, subdiv);
    const int per_cell = (q.cells / out.grid.cells()) * q.nodes_per_cell;
    out.v.reserve(out.grid.cells());
    for (int c = 0; c < out.grid.cells(); ++c) {
        Field acc(path.v.front().components, path.v.front().modes);
        double wsum = 0.0;
        for (int j = 0; j < per_cell; ++j) {
            const std::size_t i = static_cast<std::size_t>(c) * per_cell + j;
            axpy(acc, q.w[i], q.f[i]);
            wsum += q.w[i];
        }
        for (double& x : acc.c) x /= wsum;
        out.v.push_back(std::move(acc));
    }
    return out;
}

PathSample shift_path(const PathSample& path, const Field& hold) {
    path.validate();
    if (path.node_indexed)
        throw std::invalid_argument("shift_path: path must be piecewise constant");
    if (!hold.same_shape(path.v.front()))
        throw std::invalid_argument("shift_path: hold value shape mismatch");
    PathSample out;
    out.grid = path.grid;
    out.node_indexed = false;
    out.v.reserve(path.v.size());
    out.v.push_back(hold);
    for (std::size_t k = 0; k + 1 < path.v.size(); ++k) out.v.push_back(path.v[k]);
    return out;
}

PathSample shifted_projection(const PathSample& path, const ProjectionLevel& level, int subdiv) {
    level.validate();
    return shift_path(haar_project(path, level.kappa, subdiv), level.initial_datum);
}

std::vector<PathSample> make_projection_corpus(int count, std::uint64_t seed, double horizon,
                                               int const_level, int linear_level) {
    std::vector<PathSample> corpus;
    corpus.reserve(count);
    for (int p = 0; p < count; ++p) {
        RngStream rng(seed, static_cast<std::uint64_t>(p), Substream::corpus);
        const bool piecewise_constant = (p % 2) == 0;
        const bool walk = (p % 4) >= 2;
        PathSample path;
        path.grid = TimeGrid{horizon, piecewise_constant ? const_level : linear_level};
        path.node_indexed = !piecewise_constant;
        const int n = path.value_count();
        path.v.reserve(n);
        double level_value = rng.uniform(-1.0, 1.0);
        for (int k = 0; k < n; ++k) {
            Field f(1, 1);
            if (walk) {
                f.c[0] = level_value;
                level_value += 0.25 * rng.uniform(-1.0, 1.0);
                level_value = std::max(-1.0, std::min(1.0, level_value));
            } else {
                f.c[0] = rng.uniform(-1.0, 1.0);
            }
            path.v.push_back(std::move(f));
        }
        corpus.push_back(std::move(path));
    }
    return corpus;
}

}  // namespace rdspde
