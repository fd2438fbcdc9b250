#include "rdspde/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <iostream>
#include <sstream>

#include "rdspde/diagnostics.hpp"
#include "rdspde/haar.hpp"
#include "rdspde/stats.hpp"

namespace rdspde {

const char* kOutDirEnvVar() { return "RDSPDE_OUT_DIR"; }

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_csv(const std::string& path, const Table& table) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    for (std::size_t c = 0; c < table.columns.size(); ++c)
        out << (c ? "," : "") << table.columns[c];
    out << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_g17(row[c]);
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

Table read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    Table t;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty csv: " + path);
    std::istringstream header(line);
    std::string tok;
    while (std::getline(header, tok, ',')) t.columns.push_back(tok);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::vector<double> vals;
        while (std::getline(row, tok, ',')) {
            try {
                vals.push_back(std::stod(tok));
            } catch (const std::exception&) {
                vals.push_back(std::numeric_limits<double>::quiet_NaN());
            }
        }
        t.rows.push_back(std::move(vals));
    }
    return t;
}

void write_manifest(const std::string& path,
                    const std::vector<std::pair<std::string, std::string>>& entries) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    for (const auto& [k, v] : entries) out << k << "=" << v << "\n";
    if (!out) throw std::runtime_error("write failed: " + path);
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

void write_ensemble_snapshot(const std::string& path, const PathEnsemble& ensemble) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out.write("ENS1", 4);
    put<std::uint64_t>(out, ensemble.paths.size());
    put<double>(out, ensemble.grid.horizon);
    put<std::uint64_t>(out, static_cast<std::uint64_t>(ensemble.grid.level));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(ensemble.excluded));
    const bool any = !ensemble.paths.empty();
    put<std::uint64_t>(out, any ? ensemble.paths.front().v.front().components : 0);
    put<std::uint64_t>(out, any ? ensemble.paths.front().v.front().modes : 0);
    for (std::size_t i = 0; i < ensemble.paths.size(); ++i) {
        const auto& p = ensemble.paths[i];
        put<std::uint64_t>(out, ensemble.seeds.size() > i ? ensemble.seeds[i] : 0);
        put<std::uint64_t>(out, p.node_indexed ? 1 : 0);
        put<std::uint64_t>(out, p.v.size());
        for (const auto& f : p.v)
            for (double x : f.c) put(out, x);
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

PathEnsemble read_ensemble_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::string_view(magic, 4) != "ENS1")
        throw std::runtime_error("bad ensemble snapshot: " + path);
    PathEnsemble e;
    const std::uint64_t count = get<std::uint64_t>(in);
    e.grid.horizon = get<double>(in);
    e.grid.level = static_cast<int>(get<std::uint64_t>(in));
    e.excluded = static_cast<int>(get<std::uint64_t>(in));
    const int comps = static_cast<int>(get<std::uint64_t>(in));
    const int modes = static_cast<int>(get<std::uint64_t>(in));
    for (std::uint64_t i = 0; i < count; ++i) {
        e.seeds.push_back(get<std::uint64_t>(in));
        PathSample p;
        p.grid = e.grid;
        p.node_indexed = get<std::uint64_t>(in) != 0;
        const std::uint64_t vals = get<std::uint64_t>(in);
        for (std::uint64_t k = 0; k < vals; ++k) {
            Field f(comps, modes);
            for (double& x : f.c) x = get<double>(in);
            p.v.push_back(std::move(f));
        }
        e.paths.push_back(std::move(p));
    }
    if (!in) throw std::runtime_error("truncated ensemble snapshot: " + path);
    return e;
}

void write_svg_plot(const std::string& path, const Table& table, const std::string& title) {
    if (table.columns.size() < 2 || table.rows.empty())
        throw std::runtime_error("plot needs at least two columns and one row");
    const int W = 720, H = 440, ML = 70, MR = 20, MT = 40, MB = 45;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& r : table.rows) {
        if (std::isfinite(r[0])) {
            xmin = std::min(xmin, r[0]);
            xmax = std::max(xmax, r[0]);
        }
        for (std::size_t c = 1; c < r.size(); ++c)
            if (std::isfinite(r[c])) {
                ymin = std::min(ymin, r[c]);
                ymax = std::max(ymax, r[c]);
            }
    }
    if (xmax <= xmin) xmax = xmin + 1.0;
    if (ymax <= ymin) ymax = ymin + 1.0;
    auto px = [&](double x) { return ML + (x - xmin) / (xmax - xmin) * (W - ML - MR); };
    auto py = [&](double y) { return H - MB - (y - ymin) / (ymax - ymin) * (H - MT - MB); };
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
    out << "<rect width='100%' height='100%' fill='white'/>\n";
    out << "<text x='" << W / 2 << "' y='24' text-anchor='middle' font-size='15'>" << title
        << "</text>\n";
    out << "<line x1='" << ML << "' y1='" << H - MB << "' x2='" << W - MR << "' y2='" << H - MB
        << "' stroke='black'/>\n";
    out << "<line x1='" << ML << "' y1='" << MT << "' x2='" << ML << "' y2='" << H - MB
        << "' stroke='black'/>\n";
    out << "<text x='" << ML << "' y='" << H - 10 << "' font-size='11'>" << format_g17(xmin)
        << "</text>\n";
    out << "<text x='" << W - MR << "' y='" << H - 10 << "' text-anchor='end' font-size='11'>"
        << format_g17(xmax) << "</text>\n";
    out << "<text x='" << ML - 6 << "' y='" << H - MB << "' text-anchor='end' font-size='11'>"
        << format_g17(ymin) << "</text>\n";
    out << "<text x='" << ML - 6 << "' y='" << MT + 6 << "' text-anchor='end' font-size='11'>"
        << format_g17(ymax) << "</text>\n";
    out << "<text x='" << (ML + W - MR) / 2 << "' y='" << H - 10
        << "' text-anchor='middle' font-size='12'>" << table.columns[0] << "</text>\n";
    for (std::size_t c = 1; c < table.columns.size(); ++c) {
        const char* color = palette[(c - 1) % 8];
        out << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
        for (const auto& r : table.rows)
            if (r.size() > c && std::isfinite(r[0]) && std::isfinite(r[c]))
                out << px(r[0]) << "," << py(r[c]) << " ";
        out << "'/>\n";
        out << "<text x='" << W - MR - 4 << "' y='" << MT + 16 * c
            << "' text-anchor='end' font-size='12' fill='" << color << "'>" << table.columns[c]
            << "</text>\n";
    }
    out << "</svg>\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

namespace {

void error_record(int code, const std::string& field, const std::string& message) {
    std::cerr << "error code=" << code << " field=" << field << " message=" << message << "\n";
}

struct Loaded {
    RunConfig rc;
    std::string dir;
};

int load_config(const std::string& config_path, const CliOverrides& ov, Loaded& out) {
    try {
        out.rc = RunConfig::load(config_path);
        if (ov.seed) out.rc.seed = *ov.seed;
        if (ov.threads) out.rc.threads = *ov.threads;
        if (ov.format) out.rc.format = *ov.format;
        if (ov.out_dir) out.rc.out_dir = *ov.out_dir;
        if (out.rc.format != "csv" && out.rc.format != "binary")
            throw ConfigError("output.format", "expected csv|binary, got " + out.rc.format);
        out.rc.validate();
    } catch (const ConfigError& e) {
        error_record(2, e.field, e.what());
        return 2;
    } catch (const std::exception& e) {
        error_record(2, "config", e.what());
        return 2;
    }
    out.dir = out.rc.out_dir;
    if (out.dir.empty()) {
        const char* env = std::getenv(kOutDirEnvVar());
        out.dir = env && *env ? env : "out";
    }
    std::error_code ec;
    std::filesystem::create_directories(out.dir, ec);
    if (ec) {
        error_record(4, "output.dir", "cannot create directory " + out.dir);
        return 4;
    }
    return 0;
}

std::vector<std::pair<std::string, std::string>> manifest_entries(const RunConfig& rc) {
    std::vector<std::pair<std::string, std::string>> m;
    m.emplace_back("model", reaction_name(rc.model.reaction));
    std::string coeffs;
    for (double c : rc.model.rc) coeffs += (coeffs.empty() ? "" : " ") + format_g17(c);
    m.emplace_back("coeffs", coeffs);
    m.emplace_back("dim", std::to_string(rc.domain.dim));
    m.emplace_back("modes", std::to_string(rc.domain.modes));
    m.emplace_back("kappa", std::to_string(rc.solver.kappa));
    m.emplace_back("substeps", std::to_string(rc.solver.substeps));
    m.emplace_back("horizon", format_g17(rc.solver.horizon));
    m.emplace_back("ensemble", std::to_string(rc.solver.ensemble));
    m.emplace_back("mode", rc.mode == FixedPointMode::forward ? "forward" : "picard");
    m.emplace_back("seed", std::to_string(rc.seed));
    m.emplace_back("truncation_n", std::to_string(rc.intensity.truncation_n));
    m.emplace_back("nu_mass", format_g17(rc.intensity.mass()));
    // small-jump mass discarded by the truncation, int_{|z|<1/n} |z|^p nu(dz)
    m.emplace_back("dropped_p_mass", format_g17(rc.intensity.dropped_p_mass()));
    // empirical affine-growth constant of the noise coefficient maps
    m.emplace_back("noise_growth",
                   format_g17(noise_growth_constant(rc.model, rc.domain, 2.0,
                                                    rc.intensity.abs_moment(2.0), 64, rc.seed)));
    return m;
}

}  // namespace

int run_experiment(const std::string& config_path, const CliOverrides& overrides) {
    Loaded cfg;
    if (const int rcode = load_config(config_path, overrides, cfg)) return rcode;
    const RunConfig& rc = cfg.rc;

    try {
        const SpectralWorkspace ws(rc.domain);
        const Field w0 = rc.initial_field();
        const PathEnsemble init = rc.initial_ensemble();
        const auto rep = fixed_point_iterate(rc.model, init, rc.solver, ws, rc.wiener, rc.intensity,
                                             w0, w0, rc.mode, rc.seed, rc.threads);

        auto manifest = manifest_entries(rc);
        manifest.emplace_back("sweeps", std::to_string(rep.sweeps));
        manifest.emplace_back("converged", rep.converged ? "1" : "0");
        manifest.emplace_back("excluded", std::to_string(rep.excluded));
        manifest.emplace_back("left_admissible", rep.left_admissible ? "1" : "0");
        write_manifest(cfg.dir + "/manifest.txt", manifest);

        const auto adm = rc.solver.admissibility();
        if (!rep.ensemble.paths.empty()) {
            const auto table =
                moment_table(rep.ensemble, adm, rc.solver.m0, rc.solver.m1, ws.lambda());
            Table moments;
            moments.columns = {"paths",   "excluded", "phi_mean", "phi_se",       "m0_xprime",
                               "m0_se",   "m1_x",     "m1_se",    "self_residual"};
            moments.rows = {{static_cast<double>(table.paths), static_cast<double>(table.excluded),
                             table.phi_mean, table.phi_se, table.m0_xprime, table.m0_se, table.m1_x,
                             table.m1_se,
                             rc.mode == FixedPointMode::forward ? rep.self_residual : -1.0}};
            write_csv(cfg.dir + "/moments.csv", moments);

            std::vector<double> xp;
            for (const auto& p : rep.ensemble.paths)
                xp.push_back(bochner_norm(p, rc.solver.m, rc.solver.rho_prime, ws.lambda()) +
                             frac_sobolev_norm(p, rc.solver.alpha, rc.solver.m, rc.solver.rho0,
                                               ws.lambda()));
            const double base = std::max(1e-12, tree_mean(xp));
            std::vector<double> radii;
            for (int j = -4; j <= 4; ++j) radii.push_back(base * std::pow(2.0, j));
            const auto curve = tightness_proxy(rep.ensemble, radii, rc.solver.m0, adm, ws.lambda());
            Table tight;
            tight.columns = {"radius", "empirical_tail", "chebyshev_bound"};
            for (const auto& pt : curve)
                tight.rows.push_back({pt.radius, pt.empirical_tail, pt.chebyshev_bound});
            write_csv(cfg.dir + "/tightness.csv", tight);
        }

        Table law;
        law.columns = {"sweep", "law_distance", "phi_mean", "in_set"};
        for (std::size_t s = 0; s < rep.phi_mean.size(); ++s)
            law.rows.push_back({static_cast<double>(s + 1),
                                s < rep.law_distance.size() ? rep.law_distance[s] : -1.0,
                                rep.phi_mean[s], static_cast<double>(rep.in_set[s])});
        write_csv(cfg.dir + "/law_distance.csv", law);

        if (rc.format == "binary")
            write_ensemble_snapshot(cfg.dir + "/ensemble.bin", rep.ensemble);

        const double rate =
            static_cast<double>(rep.excluded) / std::max(1, rc.solver.ensemble);
        if (rate > rc.failure_threshold) {
            error_record(3, "ensemble.exclusion_rate",
                         "rate " + format_g17(rate) + " exceeds threshold " +
                             format_g17(rc.failure_threshold));
            return 3;
        }
    } catch (const std::exception& e) {
        error_record(4, "io", e.what());
        return 4;
    }
    return 0;
}

int run_projection_suite(const std::string& config_path, const CliOverrides& overrides) {
    Loaded cfg;
    if (const int rcode = load_config(config_path, overrides, cfg)) return rcode;
    const RunConfig& rc = cfg.rc;
    try {
        const auto corpus =
            make_projection_corpus(rc.suite_count, rc.seed, rc.solver.horizon,
                                   rc.suite_const_level, rc.suite_linear_level);
        SuiteParams params;
        params.kappas = rc.suite_kappas;
        params.ms = rc.suite_ms;
        params.alphas = rc.suite_alphas;
        params.rtol = rc.suite_rtol;
        const std::vector<double> lambda{0.0};  // scalar corpus

        std::ofstream csv(cfg.dir + "/projections.csv");
        if (!csv) throw std::runtime_error("cannot open projections.csv");
        csv << "path_id,kappa,ineq,m,alpha,lhs,rhs,margin\n";
        const auto rep = projection_inequality_suite(
            corpus, params, lambda, [&](const IneqRecord& r) {
                csv << r.path_id << "," << r.kappa << "," << r.ineq << "," << format_g17(r.m) << ","
                    << format_g17(r.alpha) << "," << format_g17(r.lhs) << "," << format_g17(r.rhs)
                    << "," << format_g17(r.margin) << "\n";
            });
        if (!csv) throw std::runtime_error("write failed: projections.csv");
        std::cout << "rows=" << rep.rows << " violations=" << rep.violations
                  << " worst_rel=" << format_g17(rep.worst_rel)
                  << " wstab_constant=" << format_g17(rep.c_wstab) << "\n";
        std::cout << (rep.violations == 0 ? "PASS" : "FAIL") << " projection inequality suite\n";
        return rep.violations == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        error_record(4, "suite", e.what());
        return 4;
    }
}

int run_noise_suite(const std::string& config_path, const CliOverrides& overrides) {
    Loaded cfg;
    if (const int rcode = load_config(config_path, overrides, cfg)) return rcode;
    const RunConfig& rc = cfg.rc;
    try {
        const long n = rc.noise_samples;
        const TimeGrid grid = rc.solver.grid();
        Table out;
        out.columns = {"value", "bound", "pass"};
        std::vector<std::string> names;
        bool all_pass = true;
        auto record = [&](const std::string& name, double value, double bound, bool pass) {
            names.push_back(name);
            out.rows.push_back({value, bound, pass ? 1.0 : 0.0});
            std::cout << (pass ? "PASS " : "FAIL ") << name << " value=" << format_g17(value)
                      << " bound=" << format_g17(bound) << "\n";
            all_pass = all_pass && pass;
        };

        {  // Wiener increment variance
            const double tau = grid.dt();
            const double q0 = rc.wiener.weight(0);
            std::vector<double> sq(n);
            for (long i = 0; i < n; ++i) {
                const auto dw = sample_wiener(grid, rc.wiener, rc.seed,
                                              static_cast<std::uint64_t>(i), 1);
                sq[i] = dw[0] * dw[0];
            }
            const double var = tree_mean(sq);
            const double se = q0 * tau * std::sqrt(2.0 / n);
            record("wiener_variance", std::abs(var - q0 * tau), 3.0 * se,
                   std::abs(var - q0 * tau) <= 3.0 * se);
        }
        {  // determinism
            const auto a = sample_wiener(grid, rc.wiener, rc.seed, 7, 1);
            const auto b = sample_wiener(grid, rc.wiener, rc.seed, 7, 1);
            record("wiener_determinism", a == b ? 0.0 : 1.0, 0.0, a == b);
        }
        {  // PRM count goodness of fit
            const double mean = grid.horizon * rc.intensity.mass();
            if (mean == 0.0) {
                long nonzero = 0;
                for (long i = 0; i < n; ++i)
                    if (!sample_prm(rc.intensity, grid.horizon, rc.seed,
                                    static_cast<std::uint64_t>(i))
                             .empty())
                        ++nonzero;
                record("prm_count_zero_mass", static_cast<double>(nonzero), 0.0, nonzero == 0);
            } else {
                const int kmax = static_cast<int>(mean + 6.0 * std::sqrt(mean) + 4.0);
                std::vector<long> counts(kmax + 2, 0);
                for (long i = 0; i < n; ++i) {
                    const auto jumps = sample_prm(rc.intensity, grid.horizon, rc.seed,
                                                  static_cast<std::uint64_t>(i));
                    counts[std::min<std::size_t>(jumps.size(), kmax + 1)]++;
                }
                std::vector<double> expected(kmax + 2, 0.0);
                double cum = 0.0, logp = -mean;
                for (int k = 0; k <= kmax; ++k) {
                    expected[k] = n * std::exp(logp);
                    cum += std::exp(logp);
                    logp += std::log(mean) - std::log1p(k);
                }
                expected[kmax + 1] = std::max(1e-9, n * (1.0 - cum));
                const auto gof = chi_square_gof(counts, expected);
                record("prm_count_gof_pvalue", gof.p_value, 1e-3, gof.p_value >= 1e-3);
            }
        }
        {  // independently scattered over disjoint mark sets
            std::vector<double> a(n), b(n);
            for (long i = 0; i < n; ++i) {
                const auto jumps =
                    sample_prm(rc.intensity, grid.horizon, rc.seed, static_cast<std::uint64_t>(i));
                long pos = 0, neg = 0;
                for (const auto& j : jumps) (j.mark > 0 ? pos : neg)++;
                a[i] = static_cast<double>(pos);
                b[i] = static_cast<double>(neg);
            }
            const double ma = tree_mean(a), mb = tree_mean(b);
            double cab = 0.0, va = 0.0, vb = 0.0;
            for (long i = 0; i < n; ++i) {
                cab += (a[i] - ma) * (b[i] - mb);
                va += (a[i] - ma) * (a[i] - ma);
                vb += (b[i] - mb) * (b[i] - mb);
            }
            const double corr = va > 0 && vb > 0 ? cab / std::sqrt(va * vb) : 0.0;
            record("prm_scatter_correlation", std::abs(corr), 3.0 / std::sqrt(double(n)),
                   std::abs(corr) <= 3.0 / std::sqrt(double(n)));
        }
        {  // compensated integral mean zero (identity-mark integrand); the
            // compensator is deterministic, so it is hoisted out of the loop
            auto ident = [](int, double z) {
                Field f(1, 1);
                f.c[0] = z;
                return f;
            };
            NoiseRealization no_jumps;
            no_jumps.cells = grid.cells();
            const double compensator =
                -compensated_integral(ident, no_jumps, rc.intensity, grid, 0.0, grid.horizon)
                     .c[0];
            std::vector<double> vals(n);
            for (long i = 0; i < n; ++i) {
                const auto jumps =
                    sample_prm(rc.intensity, grid.horizon, rc.seed, static_cast<std::uint64_t>(i));
                double sum = 0.0;
                for (const auto& j : jumps) sum += j.mark;
                vals[i] = sum - compensator;
            }
            const double mean = tree_mean(vals);
            double var = 0.0;
            for (double v : vals) var += (v - mean) * (v - mean);
            var /= std::max<long>(1, n - 1);
            const double se = std::sqrt(var / n);
            record("compensated_mean", std::abs(mean), 3.0 * se, std::abs(mean) <= 3.0 * se);
        }
        {
            std::ofstream csv(cfg.dir + "/noise.csv");
            csv << "check,value,bound,pass\n";
            for (std::size_t i = 0; i < out.rows.size(); ++i)
                csv << names[i] << "," << format_g17(out.rows[i][0]) << ","
                    << format_g17(out.rows[i][1]) << "," << (out.rows[i][2] != 0.0 ? 1 : 0) << "\n";
            if (!csv) throw std::runtime_error("write failed: noise.csv");
        }
        std::cout << (all_pass ? "PASS" : "FAIL") << " noise law suite\n";
        return all_pass ? 0 : 1;
    } catch (const std::exception& e) {
        error_record(4, "suite", e.what());
        return 4;
    }
}

int run_plot(const std::string& csv_path, const std::optional<std::string>& out_path) {
    try {
        const Table t = read_csv(csv_path);
        const std::string out = out_path ? *out_path : csv_path + ".svg";
        write_svg_plot(out, t, std::filesystem::path(csv_path).filename().string());
        std::cout << "wrote " << out << "\n";
        return 0;
    } catch (const std::exception& e) {
        error_record(2, "plot", e.what());
        return 2;
    }
}

}  // namespace rdspde
