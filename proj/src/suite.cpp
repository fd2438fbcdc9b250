#include <algorithm>
#include <cmath>

#include "rdspde/haar.hpp"
#include "rdspde/stats.hpp"

namespace rdspde {

namespace {

double powm(double x, double m) {
    if (m == 2.0) return x * x;
    if (m == 3.0) return x * x * x;
    return std::pow(x, m);
}

std::vector<double> mode_weights(double rho, std::span<const double> lambda) {
    std::vector<double> w(lambda.size());
    for (std::size_t k = 0; k < lambda.size(); ++k)
        w[k] = rho == 0.0 ? 1.0 : std::pow(1.0 + lambda[k], rho);
    return w;
}

double fnorm(const Field& f, std::span<const double> mw) {
    double s = 0.0;
    for (int i = 0; i < f.components; ++i) {
        const auto ci = f.comp(i);
        for (std::size_t k = 0; k < mw.size(); ++k) s += mw[k] * ci[k] * ci[k];
    }
    return std::sqrt(s);
}

double fdiff(const Field& a, const Field& b, std::span<const double> mw) {
    double s = 0.0;
    for (int i = 0; i < a.components; ++i) {
        const auto ca = a.comp(i);
        const auto cb = b.comp(i);
        for (std::size_t k = 0; k < mw.size(); ++k) {
            const double d = ca[k] - cb[k];
            s += mw[k] * d * d;
        }
    }
    return std::sqrt(s);
}

// quadrature view of one corpus path plus everything reused across kappas
struct PathView {
    PathQuadrature q;
    std::vector<double> fn;  // |f_i|
    std::vector<double> pd;  // pairwise |f_i - f_j|, i<j
    Field f0;
    double f0n = 0.0;
    bool exact_const = false;
    std::size_t n = 0;

    std::size_t pidx(std::size_t i, std::size_t j) const {  // i < j
        return i * (2 * n - i - 1) / 2 + (j - i - 1);
    }
};

PathView build_view(const PathSample& path, int target_level, int subdiv,
                    std::span<const double> mw) {
    PathView v;
    v.exact_const = !path.node_indexed;
    v.q = path_quadrature(path, target_level, subdiv);
    v.n = v.q.f.size();
    v.fn.resize(v.n);
    for (std::size_t i = 0; i < v.n; ++i) v.fn[i] = fnorm(v.q.f[i], mw);
    v.pd.resize(v.n * (v.n - 1) / 2);
    std::size_t idx = 0;
    for (std::size_t i = 0; i < v.n; ++i)
        for (std::size_t j = i + 1; j < v.n; ++j) v.pd[idx++] = fdiff(v.q.f[i], v.q.f[j], mw);
    v.f0 = path.v.front();
    v.f0n = fnorm(v.f0, mw);
    return v;
}

// symmetric fractional seminorm^m of the view
double frac_power(const PathView& v, double m, double beta) {
    const double dt = v.q.horizon / v.q.cells;
    if (v.exact_const) {
        std::vector<double> J(v.n, 0.0);
        for (std::size_t d = 1; d < v.n; ++d)
            J[d] = frac_kernel_cell_pair(static_cast<int>(d), dt, beta);
        double s = 0.0;
        std::size_t idx = 0;
        for (std::size_t i = 0; i < v.n; ++i)
            for (std::size_t j = i + 1; j < v.n; ++j) s += J[j - i] * powm(v.pd[idx++], m);
        return 2.0 * s;
    }
    // node-indexed: trapezoid nodes at refinement-cell endpoints
    const std::size_t gmax = static_cast<std::size_t>(v.q.cells) + 1;
    std::vector<double> K(gmax + 1, 0.0);
    for (std::size_t g = 1; g <= gmax; ++g) K[g] = std::pow(g * dt, -(1.0 + beta));
    const double w2 = (dt / 2.0) * (dt / 2.0);
    double s = 0.0;
    std::size_t idx = 0;
    for (std::size_t i = 0; i < v.n; ++i) {
        const std::size_t ti = i / 2 + i % 2;
        for (std::size_t j = i + 1; j < v.n; ++j) {
            const std::size_t g = j / 2 + j % 2 - ti;
            const double d = v.pd[idx++];
            if (g == 0) continue;
            s += K[g] * powm(d, m);
        }
    }
    return 2.0 * w2 * s;
}

struct KappaData {
    int cellsk = 0;
    std::size_t per_nodes = 0;  // view nodes per kappa-cell
    double tau = 0.0;
    std::vector<Field> avg;    // P_kappa cell values
    std::vector<double> avgn;  // |avg_c|
    std::vector<double> pn;    // |P f - f| at view nodes
    std::vector<double> hn;    // |hatProj f - f| at view nodes
    std::vector<double> sn;    // |S f - f| at view nodes
    std::vector<double> hpd;   // pairwise diffs of hatProj cell values
    std::vector<double> hpn;   // |hatProj cell values|
};

KappaData build_kappa(const PathView& v, int kappa, std::span<const double> mw) {
    KappaData k;
    k.cellsk = 1 << kappa;
    k.tau = v.q.horizon / k.cellsk;
    const std::size_t npc = static_cast<std::size_t>(v.q.nodes_per_cell);
    k.per_nodes = (static_cast<std::size_t>(v.q.cells) / k.cellsk) * npc;

    k.avg.reserve(k.cellsk);
    k.avgn.resize(k.cellsk);
    for (int c = 0; c < k.cellsk; ++c) {
        Field acc(v.f0.components, v.f0.modes);
        double wsum = 0.0;
        for (std::size_t j = 0; j < k.per_nodes; ++j) {
            const std::size_t i = c * k.per_nodes + j;
            axpy(acc, v.q.w[i], v.q.f[i]);
            wsum += v.q.w[i];
        }
        for (double& x : acc.c) x /= wsum;
        k.avgn[c] = fnorm(acc, mw);
        k.avg.push_back(std::move(acc));
    }

    k.pn.resize(v.n);
    k.hn.resize(v.n);
    k.sn.resize(v.n);
    for (std::size_t i = 0; i < v.n; ++i) {
        const int c = static_cast<int>(i / k.per_nodes);
        k.pn[i] = fdiff(k.avg[c], v.q.f[i], mw);
        const Field& hp = c == 0 ? v.f0 : k.avg[c - 1];
        k.hn[i] = fdiff(hp, v.q.f[i], mw);
        if (c == 0)
            k.sn[i] = fdiff(v.f0, v.q.f[i], mw);
        else
            k.sn[i] = v.pd[v.pidx(i - k.per_nodes, i)];
    }

    k.hpn.resize(k.cellsk);
    k.hpn[0] = v.f0n;
    for (int c = 1; c < k.cellsk; ++c) k.hpn[c] = k.avgn[c - 1];
    k.hpd.resize(static_cast<std::size_t>(k.cellsk) * (k.cellsk - 1) / 2);
    std::size_t idx = 0;
    for (int a = 0; a < k.cellsk; ++a) {
        const Field& fa = a == 0 ? v.f0 : k.avg[a - 1];
        for (int b = a + 1; b < k.cellsk; ++b)
            k.hpd[idx++] = fdiff(fa, b == 0 ? v.f0 : k.avg[b - 1], mw);
    }
    return k;
}

double hat_frac_power(const KappaData& k, double m, double beta) {
    std::vector<double> J(k.cellsk, 0.0);
    for (int d = 1; d < k.cellsk; ++d) J[d] = frac_kernel_cell_pair(d, k.tau, beta);
    double s = 0.0;
    std::size_t idx = 0;
    for (int a = 0; a < k.cellsk; ++a)
        for (int b = a + 1; b < k.cellsk; ++b) s += J[b - a] * powm(k.hpd[idx++], m);
    return 2.0 * s;
}

}  // namespace

SuiteReport projection_inequality_suite(std::span<const PathSample> corpus, const SuiteParams& params,
                                        std::span<const double> lambda, const IneqSink& sink) {
    for (double m : params.ms)
        for (double a : params.alphas) NormSpec{m, a, params.rho}.validate_frac();
    if (params.kappas.empty() || params.ms.empty() || params.alphas.empty())
        throw std::invalid_argument("projection_inequality_suite: empty parameter set");
    const int max_kappa = *std::max_element(params.kappas.begin(), params.kappas.end());
    const auto mw = mode_weights(params.rho, lambda);

    SuiteReport rep;
    auto emit = [&](int path_id, int kappa, const char* ineq, double m, double alpha, double lhs,
                    double rhs, bool counted) {
        ++rep.rows;
        if (sink) sink(IneqRecord{path_id, kappa, ineq, m, alpha, lhs, rhs, rhs - lhs});
        if (!counted) return;
        const double scale = std::max({lhs, rhs, 1e-300});
        const double rel = (lhs - rhs) / scale;
        if (rel > rep.worst_rel) {
            rep.worst_rel = rel;
            rep.worst_ineq = ineq;
        }
        if (rel > params.rtol) ++rep.violations;
    };

    for (std::size_t p = 0; p < corpus.size(); ++p) {
        const PathView v = build_view(corpus[p], max_kappa, params.subdiv, mw);

        std::vector<double> lm_m(params.ms.size());  // ||f||_{L^m}^m
        for (std::size_t im = 0; im < params.ms.size(); ++im) {
            double s = 0.0;
            for (std::size_t i = 0; i < v.n; ++i) s += v.q.w[i] * powm(v.fn[i], params.ms[im]);
            lm_m[im] = s;
        }
        std::vector<double> w_m(params.ms.size() * params.alphas.size());  // |f|_{W^alpha_m}^m
        for (std::size_t im = 0; im < params.ms.size(); ++im)
            for (std::size_t ia = 0; ia < params.alphas.size(); ++ia)
                w_m[im * params.alphas.size() + ia] =
                    frac_power(v, params.ms[im], params.alphas[ia] * params.ms[im]);

        for (int kappa : params.kappas) {
            const KappaData kd = build_kappa(v, kappa, mw);
            for (std::size_t im = 0; im < params.ms.size(); ++im) {
                const double m = params.ms[im];
                const double tau_f0m = kd.tau * powm(v.f0n, m);

                double proj_m = 0.0;  // ||P f||^m
                for (int c = 0; c < kd.cellsk; ++c) proj_m += kd.tau * powm(kd.avgn[c], m);
                emit(static_cast<int>(p), kappa, "project_contract", m, 0.0, std::pow(proj_m, 1.0 / m),
                     std::pow(lm_m[im], 1.0 / m), true);

                double shift_m = 0.0;  // ||S f||^m
                double sdiff_m = 0.0;  // ||S f - f||^m
                double head_m = 0.0;   // int_0^tau |f(0)-f(s)|^m
                for (std::size_t i = 0; i < v.n; ++i) {
                    const double svn = i < kd.per_nodes ? v.f0n : v.fn[i - kd.per_nodes];
                    shift_m += v.q.w[i] * powm(svn, m);
                    sdiff_m += v.q.w[i] * powm(kd.sn[i], m);
                    if (i < kd.per_nodes) head_m += v.q.w[i] * powm(kd.sn[i], m);
                }
                emit(static_cast<int>(p), kappa, "shift_bound", m, 0.0, shift_m, lm_m[im] + tau_f0m, true);
                emit(static_cast<int>(p), kappa, "shift_error", m, 0.0, sdiff_m,
                     head_m + powm(2.0, m) * lm_m[im], true);

                double hat_m = kd.tau * powm(v.f0n, m);  // ||hatProj f||^m
                for (int c = 0; c + 1 < kd.cellsk; ++c) hat_m += kd.tau * powm(kd.avgn[c], m);
                emit(static_cast<int>(p), kappa, "shifted_project_bound", m, 0.0, hat_m, lm_m[im] + tau_f0m, true);

                double pdiff_m = 0.0;  // ||P f - f||^m
                double hdiff_m = 0.0;  // ||hatProj f - f||^m
                for (std::size_t i = 0; i < v.n; ++i) {
                    pdiff_m += v.q.w[i] * powm(kd.pn[i], m);
                    hdiff_m += v.q.w[i] * powm(kd.hn[i], m);
                }
                for (std::size_t ia = 0; ia < params.alphas.size(); ++ia) {
                    const double alpha = params.alphas[ia];
                    const double wm = w_m[im * params.alphas.size() + ia];
                    emit(static_cast<int>(p), kappa, "project_error", m, alpha, std::pow(pdiff_m, 1.0 / m),
                         std::pow(kd.tau, alpha) * std::pow(wm, 1.0 / m), true);
                    emit(static_cast<int>(p), kappa, "shifted_project_error", m, alpha, hdiff_m,
                         head_m + std::pow(kd.tau, alpha * m) * wm, true);

                    const double wstab_lhs = hat_frac_power(kd, m, alpha * m);
                    const double wstab_rhs = wm + tau_f0m;
                    emit(static_cast<int>(p), kappa, "shifted_project_wstab", m, alpha, wstab_lhs, wstab_rhs, false);
                    if (wstab_rhs > 0.0) {
                        rep.c_wstab = std::max(rep.c_wstab, wstab_lhs / wstab_rhs);
                        ++rep.wstab_rows;
                    }
                }
            }
        }
    }
    return rep;
}

}  // namespace rdspde
