#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rdspde/diagnostics.hpp"
#include "rdspde/io.hpp"

using namespace rdspde;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::filesystem::path fresh_dir(const std::string& tag) {
    const auto dir = std::filesystem::temp_directory_path() / ("rdspde_" + tag);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string write_config(const std::filesystem::path& dir, const std::string& body) {
    const auto path = dir / "config.ini";
    std::ofstream out(path);
    out << body;
    REQUIRE(out);
    return path.string();
}

const char* kMinimalKpp = R"(# minimal deterministic run
[model]
reaction = kpp
coeffs = 1.0
diffusion = 0.01
[domain]
modes = 8
[initial]
values = 0.4
[noise]
wiener_modes = 1
rate = 0.0
[solver]
kappa = 4
ensemble = 4
substeps = 2
[run]
seed = 7
)";

}  // namespace

TEST_CASE("ini parsing") {
    const auto ini = IniFile::parse("[a]\nx = 1.5 # trailing comment\n\n[b]\nname = hello\n");
    CHECK(ini.get_double("a", "x", 0.0) == 1.5);
    CHECK(ini.get("b", "name", "") == "hello");
    CHECK(ini.get_long("b", "missing", 42) == 42);
    CHECK_THROWS_AS(IniFile::parse("[a\nx=1\n"), ConfigError);
    CHECK_THROWS_AS(IniFile::parse("[a]\njust a line\n"), ConfigError);
}

TEST_CASE("run config validation names the failing field") {
    SUBCASE("unknown reaction") {
        const auto ini = IniFile::parse("[model]\nreaction = frog\ncoeffs=1\ndiffusion=1\n");
        try {
            RunConfig::from_ini(ini);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(e.field == "model.reaction");
        }
    }
    SUBCASE("unknown key") {
        std::string body = kMinimalKpp;
        body += "typo_key = 3\n";
        try {
            RunConfig::from_ini(IniFile::parse(body));
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(e.field == "run.typo_key");
        }
    }
    SUBCASE("component mismatch") {
        const auto ini = IniFile::parse(
            "[model]\nreaction = gierer_meinhardt\ncoeffs = 1,1,1,1\ndiffusion = 1,1\n"
            "[initial]\nvalues = 0.5\n");
        CHECK_THROWS_AS(RunConfig::from_ini(ini), ConfigError);
    }
    SUBCASE("minimal config loads") {
        const auto rc = RunConfig::from_ini(IniFile::parse(kMinimalKpp));
        CHECK(rc.model.reaction == Reaction::kpp);
        CHECK(rc.solver.kappa == 4);
        CHECK(rc.seed == 7);
    }
}

TEST_CASE("experiment runner") {
    const auto dir = fresh_dir("harness");
    const auto config = write_config(dir, kMinimalKpp);

    SUBCASE("exit 0 and csv matches the library computation bit-exactly") {
        CliOverrides ov;
        ov.out_dir = (dir / "a").string();
        REQUIRE(run_experiment(config, ov) == 0);

        const auto rc = RunConfig::load(config);
        const SpectralWorkspace ws(rc.domain);
        const Field w0 = rc.initial_field();
        const auto rep =
            fixed_point_iterate(rc.model, rc.initial_ensemble(), rc.solver, ws, rc.wiener,
                                rc.intensity, w0, w0, rc.mode, rc.seed, rc.threads);
        const auto table = moment_table(rep.ensemble, rc.solver.admissibility(), rc.solver.m0,
                                        rc.solver.m1, ws.lambda());
        const Table csv = read_csv((dir / "a" / "moments.csv").string());
        REQUIRE(csv.rows.size() == 1);
        CHECK(csv.rows[0][2] == table.phi_mean);  // exact round trip through %.17g
        CHECK(csv.rows[0][4] == table.m0_xprime);
        CHECK(csv.rows[0][6] == table.m1_x);
    }
    SUBCASE("byte-identical reruns, including across thread counts") {
        CliOverrides a, b, c;
        a.out_dir = (dir / "r1").string();
        b.out_dir = (dir / "r2").string();
        c.out_dir = (dir / "r3").string();
        a.threads = 1;
        b.threads = 1;
        c.threads = 8;
        REQUIRE(run_experiment(config, a) == 0);
        REQUIRE(run_experiment(config, b) == 0);
        REQUIRE(run_experiment(config, c) == 0);
        for (const char* f : {"moments.csv", "law_distance.csv", "tightness.csv", "manifest.txt"}) {
            CHECK(slurp((dir / "r1" / f).string()) == slurp((dir / "r2" / f).string()));
            CHECK(slurp((dir / "r1" / f).string()) == slurp((dir / "r3" / f).string()));
        }
    }
    SUBCASE("binary format adds a readable ensemble snapshot") {
        CliOverrides ov;
        ov.out_dir = (dir / "bin").string();
        ov.format = "binary";
        REQUIRE(run_experiment(config, ov) == 0);
        const auto ens = read_ensemble_snapshot((dir / "bin" / "ensemble.bin").string());
        CHECK(ens.paths.size() == 4);
        CHECK(ens.grid.level == 4);
        CHECK(ens.paths.front().v.front().modes == 8);
    }
    SUBCASE("unknown model name exits 2") {
        const auto bad = write_config(fresh_dir("harness_bad"),
                                      "[model]\nreaction = nope\ncoeffs=1\ndiffusion=1\n");
        CHECK(run_experiment(bad, {}) == 2);
    }
    SUBCASE("path-failure rate above threshold exits 3") {
        const auto d = fresh_dir("harness_blowup");
        const auto blowup = write_config(
            d,
            "[model]\nreaction = kpp\ncoeffs = 0\ndiffusion = 0\n"
            "sigma = multiplicative\nsigma_coeffs = 1e40\n"
            "[domain]\nmodes = 4\n[initial]\nvalues = 2.0\n"
            "[noise]\nwiener_modes = 1\nrate = 0\n"
            "[solver]\nkappa = 4\nensemble = 4\nsubsteps = 1\nR = 1e30\n"
            "[run]\nfailure_threshold = 0.5\nseed = 4\n");
        CliOverrides ov;
        ov.out_dir = (d / "out").string();
        CHECK(run_experiment(blowup, ov) == 3);
    }
    SUBCASE("unwritable output directory exits 4") {
        const auto d = fresh_dir("harness_io");
        const auto cfgp = write_config(d, kMinimalKpp);
        std::ofstream(d / "blocker") << "x";
        CliOverrides ov;
        ov.out_dir = (d / "blocker" / "sub").string();  // a file in the way
        CHECK(run_experiment(cfgp, ov) == 4);
    }
    SUBCASE("gaussian marks with truncation report the dropped small-jump mass") {
        const auto d = fresh_dir("harness_gauss");
        const auto cfgp = write_config(
            d,
            "[model]\nreaction = gierer_meinhardt\ncoeffs = 1,1,1,1\ndiffusion = 0.01,0.1\n"
            "jump = multiplicative\njump_coeffs = 0.05,0.05\n"
            "[domain]\nmodes = 4\n[initial]\nvalues = 0.8,0.9\n"
            "[noise]\nwiener_modes = 4\nintensity = gaussian_marks\nrate = 2.0\n"
            "mark_sigma = 0.5\ntruncation_n = 2\n"
            "[solver]\nkappa = 4\nensemble = 8\nsubsteps = 2\n[run]\nseed = 5\n");
        CliOverrides ov;
        ov.out_dir = (d / "out").string();
        REQUIRE(run_experiment(cfgp, ov) == 0);
        const std::string manifest = slurp((d / "out" / "manifest.txt").string());
        CHECK(manifest.find("dropped_p_mass=") != std::string::npos);
        CHECK(manifest.find("dropped_p_mass=0\n") == std::string::npos);  // strictly positive here
    }
    SUBCASE("square 2-D domain runs end to end") {
        const auto d = fresh_dir("harness_2d");
        const auto cfgp = write_config(d,
                                       "[model]\nreaction = kpp\ncoeffs = 1.0\ndiffusion = 0.02\n"
                                       "sigma = additive\nsigma_coeffs = 0.1\n"
                                       "[domain]\ndim = 2\nmodes = 4\n[initial]\nvalues = 0.5\n"
                                       "[noise]\nwiener_modes = 4\nrate = 0\n"
                                       "[solver]\nkappa = 4\nensemble = 8\nsubsteps = 2\n"
                                       "[run]\nseed = 6\n");
        CliOverrides ov;
        ov.out_dir = (d / "out").string();
        CHECK(run_experiment(cfgp, ov) == 0);
        const Table m = read_csv((d / "out" / "moments.csv").string());
        CHECK(m.rows[0][2] > 0.0);  // phi_mean
    }
    SUBCASE("env var supplies the default output directory") {
        const auto d = fresh_dir("harness_env");
        const auto cfgp = write_config(d, kMinimalKpp);
        setenv(kOutDirEnvVar(), (d / "from_env").string().c_str(), 1);
        CHECK(run_experiment(cfgp, {}) == 0);
        unsetenv(kOutDirEnvVar());
        CHECK(std::filesystem::exists(d / "from_env" / "moments.csv"));
    }
}

TEST_CASE("snapshot round trip") {
    const auto dir = fresh_dir("snapshot");
    PathEnsemble e;
    e.grid = TimeGrid{1.0, 2};
    e.excluded = 3;
    for (int i = 0; i < 5; ++i) {
        Field f(2, 3);
        for (std::size_t j = 0; j < f.c.size(); ++j) f.c[j] = i + 0.25 * j;
        e.paths.push_back(PathSample::constant(e.grid, f));
        e.seeds.push_back(100 + i);
    }
    const auto path = (dir / "ens.bin").string();
    write_ensemble_snapshot(path, e);
    const auto back = read_ensemble_snapshot(path);
    REQUIRE(back.paths.size() == 5);
    CHECK(back.excluded == 3);
    CHECK(back.grid.level == 2);
    for (int i = 0; i < 5; ++i) {
        CHECK(back.seeds[i] == e.seeds[i]);
        for (std::size_t k = 0; k < e.paths[i].v.size(); ++k)
            CHECK(back.paths[i].v[k].c == e.paths[i].v[k].c);
    }
}

TEST_CASE("csv and plot") {
    const auto dir = fresh_dir("plot");
    Table t;
    t.columns = {"x", "linear", "square"};
    for (int i = 0; i <= 10; ++i)
        t.rows.push_back({0.1 * i, 0.2 * i, 0.01 * i * i});
    const auto csv = (dir / "data.csv").string();
    write_csv(csv, t);
    const Table back = read_csv(csv);
    REQUIRE(back.columns == t.columns);
    REQUIRE(back.rows.size() == t.rows.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r)
        for (std::size_t c = 0; c < 3; ++c) CHECK(back.rows[r][c] == t.rows[r][c]);  // 17 digits

    CHECK(run_plot(csv, std::nullopt) == 0);
    CHECK(std::filesystem::exists(csv + ".svg"));
    const std::string svg = slurp(csv + ".svg");
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("polyline") != std::string::npos);
}

TEST_CASE("cli binary") {
    const char* cli = std::getenv("RDSPDE_CLI");
    if (!cli || !*cli) return;  // only run when ctest provides the binary

    const auto dir = fresh_dir("cli");
    const auto config = write_config(dir, kMinimalKpp);
    auto shell = [&](const std::string& cmd) {
        const int status = std::system(cmd.c_str());
        return status == -1 ? -1 : WEXITSTATUS(status);
    };
    CHECK(shell(std::string(cli) + " run " + config + " --out-dir " + (dir / "out").string() +
                " > /dev/null 2>&1") == 0);
    CHECK(std::filesystem::exists(dir / "out" / "moments.csv"));
    CHECK(shell(std::string(cli) + " plot " + (dir / "out" / "moments.csv").string() +
                " > /dev/null 2>&1") == 0);

    const auto bad = write_config(fresh_dir("cli_bad"),
                                  "[model]\nreaction = nope\ncoeffs=1\ndiffusion=1\n");
    CHECK(shell(std::string(cli) + " run " + bad + " > /dev/null 2>&1") == 2);
}
