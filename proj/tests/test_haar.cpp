#include <doctest.h>

#include <cmath>

#include "rdspde/haar.hpp"
#include "rdspde/rng.hpp"

using namespace rdspde;

namespace {

const std::vector<double> kScalarLambda{0.0};

PathSample ramp_path(int level) {  // f(t) = t on [0,1], node-indexed
    PathSample p;
    p.grid = TimeGrid{1.0, level};
    p.node_indexed = true;
    for (int k = 0; k <= p.grid.cells(); ++k) {
        Field f(1, 1);
        f.c[0] = p.grid.node(k);
        p.v.push_back(f);
    }
    return p;
}

Field scalar(double v) {
    Field f(1, 1);
    f.c[0] = v;
    return f;
}

}  // namespace

TEST_CASE("haar projection") {
    SUBCASE("constants are preserved") {
        const auto c = PathSample::constant(TimeGrid{1.0, 5}, scalar(3.25));
        const auto p = haar_project(c, 2);
        for (const auto& f : p.v) CHECK(f.c[0] == 3.25);
    }
    SUBCASE("ramp averages: closed-form cell integrals") {
        const auto p = haar_project(ramp_path(6), 1);
        REQUIRE(p.v.size() == 2);
        CHECK(p.v[0].c[0] == doctest::Approx(0.25).epsilon(1e-14));
        CHECK(p.v[1].c[0] == doctest::Approx(0.75).epsilon(1e-14));
    }
    SUBCASE("ramp projection error matches the closed form tau/sqrt(12)") {
        // P_k f - f is a sawtooth; its L2 norm integrates to tau/sqrt(12)
        for (int kappa : {2, 3, 4}) {
            const auto f = ramp_path(8);
            const auto p = haar_project(f, kappa);
            const auto q = path_quadrature(f, 8, 8);
            const std::size_t per = q.f.size() / p.v.size();
            double acc = 0.0;
            for (std::size_t i = 0; i < q.f.size(); ++i) {
                const double d = q.f[i].c[0] - p.v[i / per].c[0];
                acc += q.w[i] * d * d;
            }
            const double tau = 1.0 / (1 << kappa);
            CHECK(std::sqrt(acc) == doctest::Approx(tau / std::sqrt(12.0)).epsilon(2e-3));
        }
    }
    SUBCASE("coarser input grid is rejected") {
        const auto c = PathSample::constant(TimeGrid{1.0, 2}, scalar(1.0));
        CHECK_THROWS(haar_project(c, 3));
    }
    SUBCASE("idempotent on its range") {
        RngStream rng(1, 0, Substream::misc);
        PathSample p;
        p.grid = TimeGrid{1.0, 6};
        for (int k = 0; k < p.grid.cells(); ++k) p.v.push_back(scalar(rng.uniform(-1.0, 1.0)));
        const auto once = haar_project(p, 3);
        const auto twice = haar_project(once, 3);
        for (int k = 0; k < 8; ++k) CHECK(twice.v[k].c[0] == once.v[k].c[0]);
    }
}

TEST_CASE("shift operator") {
    PathSample p;
    p.grid = TimeGrid{1.0, 2};
    for (double v : {1.0, 2.0, 3.0, 4.0}) p.v.push_back(scalar(v));
    const auto s = shift_path(p, p.v.front());
    REQUIRE(s.v.size() == 4);
    CHECK(s.v[0].c[0] == 1.0);
    CHECK(s.v[1].c[0] == 1.0);
    CHECK(s.v[2].c[0] == 2.0);
    CHECK(s.v[3].c[0] == 3.0);

    const auto c = PathSample::constant(TimeGrid{1.0, 3}, scalar(5.0));
    const auto sc = shift_path(c, scalar(5.0));
    for (const auto& f : sc.v) CHECK(f.c[0] == 5.0);
}

TEST_CASE("shifted projection") {
    SUBCASE("constant path with matching datum is fixed") {
        const auto c = PathSample::constant(TimeGrid{1.0, 5}, scalar(2.0));
        const auto hp = shifted_projection(c, {3, scalar(2.0)});
        for (const auto& f : hp.v) CHECK(f.c[0] == 2.0);
    }
    SUBCASE("ramp with zero datum: [0, 0.125, 0.375, 0.625]") {
        const auto hp = shifted_projection(ramp_path(6), {2, scalar(0.0)});
        REQUIRE(hp.v.size() == 4);
        CHECK(hp.v[0].c[0] == doctest::Approx(0.0));
        CHECK(hp.v[1].c[0] == doctest::Approx(0.125).epsilon(1e-13));
        CHECK(hp.v[2].c[0] == doctest::Approx(0.375).epsilon(1e-13));
        CHECK(hp.v[3].c[0] == doctest::Approx(0.625).epsilon(1e-13));
    }
    SUBCASE("output cell k depends only on input up to t_k") {
        // change the input on late cells; early output cells must not move
        RngStream rng(2, 0, Substream::misc);
        PathSample p;
        p.grid = TimeGrid{1.0, 5};
        for (int k = 0; k < 32; ++k) p.v.push_back(scalar(rng.uniform(-1.0, 1.0)));
        auto q = p;
        for (int k = 16; k < 32; ++k) q.v[k].c[0] += 9.0;  // perturb second half
        const auto hp = shifted_projection(p, {3, scalar(0.0)});
        const auto hq = shifted_projection(q, {3, scalar(0.0)});
        for (int c = 0; c <= 4; ++c) CHECK(hp.v[c].c[0] == hq.v[c].c[0]);
    }
    SUBCASE("linear in the path for a zero datum") {
        RngStream rng(3, 0, Substream::misc);
        PathSample a, b;
        a.grid = b.grid = TimeGrid{1.0, 4};
        for (int k = 0; k < 16; ++k) {
            a.v.push_back(scalar(rng.uniform(-1.0, 1.0)));
            b.v.push_back(scalar(rng.uniform(-1.0, 1.0)));
        }
        auto lin = a;
        for (int k = 0; k < 16; ++k) lin.v[k].c[0] = 2.0 * a.v[k].c[0] - 3.0 * b.v[k].c[0];
        const ProjectionLevel lvl{2, scalar(0.0)};
        const auto ha = shifted_projection(a, lvl);
        const auto hb = shifted_projection(b, lvl);
        const auto hl = shifted_projection(lin, lvl);
        for (int k = 0; k < 4; ++k)
            CHECK(hl.v[k].c[0] ==
                  doctest::Approx(2.0 * ha.v[k].c[0] - 3.0 * hb.v[k].c[0]).epsilon(1e-13));
    }
}

TEST_CASE("projection inequality suite on a small corpus") {
    const auto corpus = make_projection_corpus(60, 99, 1.0, 7, 4);
    SuiteParams params;
    params.kappas = {1, 2, 3, 4, 5, 6, 7};
    const auto rep = projection_inequality_suite(corpus, params, kScalarLambda);
    CHECK(rep.rows > 0);
    CHECK(rep.violations == 0);
    CHECK(rep.c_wstab > 0.0);
    CHECK(std::isfinite(rep.c_wstab));
}

TEST_CASE("inequality suite over multi-mode fields and a weighted spatial norm") {
    RngStream rng(77, 0, Substream::corpus);
    std::vector<PathSample> corpus;
    for (int p = 0; p < 10; ++p) {
        PathSample path;
        path.grid = TimeGrid{1.0, 5};
        path.node_indexed = (p % 2) == 1;
        for (int k = 0; k < path.value_count(); ++k) {
            Field f(2, 3);
            for (double& x : f.c) x = rng.uniform(-1.0, 1.0);
            path.v.push_back(std::move(f));
        }
        corpus.push_back(std::move(path));
    }
    const std::vector<double> lambda{0.0, 9.87, 39.5};
    SuiteParams params;
    params.kappas = {1, 2, 3, 4, 5};
    params.rho = 0.5;
    const auto rep = projection_inequality_suite(corpus, params, lambda);
    CHECK(rep.violations == 0);
}

TEST_CASE("constants corpus: inequalities hold trivially") {
    std::vector<PathSample> corpus;
    for (int i = 0; i < 4; ++i)
        corpus.push_back(PathSample::constant(TimeGrid{1.0, 6}, scalar(0.5 * i)));
    SuiteParams params;
    params.kappas = {1, 3, 6};
    const auto rep = projection_inequality_suite(corpus, params, kScalarLambda);
    CHECK(rep.violations == 0);
}

TEST_CASE("uniform small-ball decay of the shifted projection error") {
    // on a fixed corpus of continuous paths with bounded slope (the
    // random-walk flavor), max_f |hatProj_k f - f| decays as kappa grows
    const auto all = make_projection_corpus(80, 5, 1.0, 8, 5);
    std::vector<PathSample> corpus;
    for (std::size_t p = 3; p < all.size(); p += 4) corpus.push_back(all[p]);
    REQUIRE(corpus.size() == 20);
    for (const auto& p : corpus) REQUIRE(p.node_indexed);
    double first = 0.0, prev = 1e300;
    for (int kappa : {1, 3, 5, 7}) {
        double worst = 0.0;
        for (const auto& f : corpus) {
            const Field f0 = f.v.front();
            const auto hp = shifted_projection(f, {kappa, f0});
            // measure on the common refinement
            const auto qa = path_quadrature(f, 8, 8);
            const std::size_t per = qa.f.size() / hp.v.size();
            double acc = 0.0;
            for (std::size_t i = 0; i < qa.f.size(); ++i) {
                const double d = qa.f[i].c[0] - hp.v[i / per].c[0];
                acc += qa.w[i] * d * d;
            }
            worst = std::max(worst, std::sqrt(acc));
        }
        CHECK(worst <= prev * (1.0 + 1e-12));
        if (prev == 1e300) first = worst;
        prev = worst;
    }
    CHECK(prev < 0.5 * first);
    CHECK(prev < 0.1);
}
