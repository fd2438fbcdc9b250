#include "rdspde/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace rdspde {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

}  // namespace

IniFile IniFile::parse(const std::string& text) {
    IniFile ini;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno), "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno), "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno), "empty key");
        ini.values_[section + "." + key] = trim(line.substr(eq + 1));
    }
    return ini;
}

IniFile IniFile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

bool IniFile::has(const std::string& section, const std::string& key) const {
    return values_.count(section + "." + key) > 0;
}

std::string IniFile::get(const std::string& section, const std::string& key,
                         const std::string& fallback) const {
    const std::string full = section + "." + key;
    read_.insert(full);
    const auto it = values_.find(full);
    return it == values_.end() ? fallback : it->second;
}

std::string IniFile::require(const std::string& section, const std::string& key) const {
    const std::string full = section + "." + key;
    read_.insert(full);
    const auto it = values_.find(full);
    if (it == values_.end()) throw ConfigError(full, "missing required key");
    return it->second;
}

double IniFile::get_double(const std::string& section, const std::string& key,
                           double fallback) const {
    const std::string raw = get(section, key, "");
    if (raw.empty()) return fallback;
    try {
        std::size_t pos = 0;
        const double v = std::stod(raw, &pos);
        if (pos != raw.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(section + "." + key, "not a number: " + raw);
    }
}

long IniFile::get_long(const std::string& section, const std::string& key, long fallback) const {
    const std::string raw = get(section, key, "");
    if (raw.empty()) return fallback;
    try {
        std::size_t pos = 0;
        const long v = std::stol(raw, &pos);
        if (pos != raw.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(section + "." + key, "not an integer: " + raw);
    }
}

std::uint64_t IniFile::get_u64(const std::string& section, const std::string& key,
                               std::uint64_t fallback) const {
    const std::string raw = get(section, key, "");
    if (raw.empty()) return fallback;
    try {
        std::size_t pos = 0;
        const std::uint64_t v = std::stoull(raw, &pos);
        if (pos != raw.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(section + "." + key, "not an unsigned integer: " + raw);
    }
}

std::vector<double> IniFile::get_list(const std::string& section, const std::string& key) const {
    std::vector<double> out;
    std::string raw = get(section, key, "");
    for (char& c : raw)
        if (c == ',') c = ' ';
    std::istringstream in(raw);
    std::string tok;
    while (in >> tok) {
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw ConfigError(section + "." + key, "not a number: " + tok);
        }
    }
    return out;
}

std::vector<std::string> IniFile::unread_keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_)
        if (!read_.count(k)) out.push_back(k);
    return out;
}

RunConfig RunConfig::from_ini(const IniFile& ini) {
    RunConfig rc;

    const std::string reaction = ini.require("model", "reaction");
    try {
        rc.model.reaction = reaction_by_name(reaction);
    } catch (const std::exception& e) {
        throw ConfigError("model.reaction", e.what());
    }
    rc.model.rc = ini.get_list("model", "coeffs");
    rc.model.diffusion = ini.get_list("model", "diffusion");
    rc.model.positivity_floor = ini.get_double("model", "positivity_floor", 1e-6);
    auto noise_kind = [&](const std::string& key) {
        const std::string v = ini.get("model", key, "off");
        if (v == "off") return NoiseCoeff::Kind::off;
        if (v == "additive") return NoiseCoeff::Kind::additive;
        if (v == "multiplicative") return NoiseCoeff::Kind::multiplicative;
        throw ConfigError("model." + key, "expected off|additive|multiplicative, got " + v);
    };
    rc.model.sigma.kind = noise_kind("sigma");
    rc.model.sigma.c = ini.get_list("model", "sigma_coeffs");
    rc.model.jump.kind = noise_kind("jump");
    rc.model.jump.c = ini.get_list("model", "jump_coeffs");

    rc.domain.dim = static_cast<int>(ini.get_long("domain", "dim", 1));
    rc.domain.length = ini.get_double("domain", "length", 1.0);
    rc.domain.modes = static_cast<int>(ini.get_long("domain", "modes", 8));

    rc.initial_values = ini.get_list("initial", "values");
    rc.initial_bump = ini.get_list("initial", "bump");

    rc.wiener.mode_count = static_cast<int>(ini.get_long("noise", "wiener_modes", 8));
    rc.wiener.weights = ini.get_list("noise", "wiener_weights");
    const std::string kind = ini.get("noise", "intensity", "two_point");
    if (kind == "two_point")
        rc.intensity.kind = IntensitySpec::Kind::two_point;
    else if (kind == "gaussian_marks")
        rc.intensity.kind = IntensitySpec::Kind::gaussian_marks;
    else if (kind == "tempered_stable")
        rc.intensity.kind = IntensitySpec::Kind::tempered_stable;
    else
        throw ConfigError("noise.intensity",
                          "expected two_point|gaussian_marks|tempered_stable, got " + kind);
    rc.intensity.rate = ini.get_double("noise", "rate", 1.0);
    rc.intensity.two_point_p = ini.get_double("noise", "two_point_p", 0.5);
    rc.intensity.mark_sigma = ini.get_double("noise", "mark_sigma", 1.0);
    rc.intensity.stable_c = ini.get_double("noise", "stable_c", 1.0);
    rc.intensity.stable_a = ini.get_double("noise", "stable_a", 0.5);
    rc.intensity.stable_theta = ini.get_double("noise", "stable_theta", 1.0);
    rc.intensity.p_exponent = ini.get_double("noise", "p_exponent", 2.0);
    rc.intensity.truncation_n = static_cast<int>(ini.get_long("noise", "truncation_n", 1));

    rc.solver.kappa = static_cast<int>(ini.get_long("solver", "kappa", 5));
    rc.solver.substeps = static_cast<int>(ini.get_long("solver", "substeps", 4));
    rc.solver.horizon = ini.get_double("solver", "horizon", 1.0);
    rc.solver.m = ini.get_double("solver", "m", 2.0);
    rc.solver.m0 = ini.get_double("solver", "m0", rc.solver.m);
    rc.solver.m1 = ini.get_double("solver", "m1", 3.0);
    rc.solver.alpha = ini.get_double("solver", "alpha", 0.25);
    rc.solver.rho = ini.get_double("solver", "rho", 0.0);
    rc.solver.rho_prime = ini.get_double("solver", "rho_prime", 0.5);
    rc.solver.rho0 = ini.get_double("solver", "rho0", -1.0);
    rc.solver.R = ini.get_double("solver", "R", 10.0);
    rc.solver.ensemble = static_cast<int>(ini.get_long("solver", "ensemble", 64));
    rc.solver.max_sweeps = static_cast<int>(ini.get_long("solver", "max_sweeps", 8));
    rc.solver.tolerance = ini.get_double("solver", "tolerance", 0.05);
    const std::string mode = ini.get("solver", "mode", "forward");
    if (mode == "forward")
        rc.mode = FixedPointMode::forward;
    else if (mode == "picard")
        rc.mode = FixedPointMode::picard;
    else
        throw ConfigError("solver.mode", "expected forward|picard, got " + mode);

    rc.seed = ini.get_u64("run", "seed", 0);
    rc.threads = static_cast<int>(ini.get_long("run", "threads", 0));
    rc.failure_threshold = ini.get_double("run", "failure_threshold", 0.1);

    rc.out_dir = ini.get("output", "dir", "");
    rc.format = ini.get("output", "format", "csv");
    if (rc.format != "csv" && rc.format != "binary")
        throw ConfigError("output.format", "expected csv|binary, got " + rc.format);

    rc.suite_count = static_cast<int>(ini.get_long("suite", "count", rc.suite_count));
    rc.suite_const_level = static_cast<int>(ini.get_long("suite", "const_level", rc.suite_const_level));
    rc.suite_linear_level =
        static_cast<int>(ini.get_long("suite", "linear_level", rc.suite_linear_level));
    rc.suite_rtol = ini.get_double("suite", "rtol", rc.suite_rtol);
    if (ini.has("suite", "kappas")) {
        rc.suite_kappas.clear();
        for (double k : ini.get_list("suite", "kappas"))
            rc.suite_kappas.push_back(static_cast<int>(k));
    }
    if (ini.has("suite", "ms")) rc.suite_ms = ini.get_list("suite", "ms");
    if (ini.has("suite", "alphas")) rc.suite_alphas = ini.get_list("suite", "alphas");
    rc.noise_samples = ini.get_long("suite", "noise_samples", rc.noise_samples);

    const auto unread = ini.unread_keys();
    if (!unread.empty()) throw ConfigError(unread.front(), "unknown key");

    rc.validate();
    return rc;
}

RunConfig RunConfig::load(const std::string& path) { return from_ini(IniFile::load(path)); }

void RunConfig::validate() const {
    try {
        model.validate();
    } catch (const std::exception& e) {
        throw ConfigError("model", e.what());
    }
    try {
        domain.validate();
    } catch (const std::exception& e) {
        throw ConfigError("domain", e.what());
    }
    try {
        wiener.validate();
    } catch (const std::exception& e) {
        throw ConfigError("noise", e.what());
    }
    try {
        intensity.validate();
    } catch (const std::exception& e) {
        throw ConfigError("noise", e.what());
    }
    try {
        solver.validate();
    } catch (const std::exception& e) {
        throw ConfigError("solver", e.what());
    }
    if (static_cast<int>(initial_values.size()) != model.components())
        throw ConfigError("initial.values", "need one value per component");
    if (!initial_bump.empty() && static_cast<int>(initial_bump.size()) != model.components())
        throw ConfigError("initial.bump", "need one value per component");
    if (!(failure_threshold >= 0.0 && failure_threshold <= 1.0))
        throw ConfigError("run.failure_threshold", "must lie in [0,1]");
}

Field RunConfig::initial_field() const {
    Field f(model.components(), domain.total_modes());
    const double c0 = std::sqrt(domain.measure());  // coefficient of the constant eigenfunction
    for (int i = 0; i < f.components; ++i) {
        f.at(i, 0) = initial_values[i] * c0;
        if (!initial_bump.empty() && f.modes > 1) f.at(i, 1) = initial_bump[i];
    }
    return f;
}

PathEnsemble RunConfig::initial_ensemble() const {
    PathEnsemble e;
    e.grid = solver.grid();
    e.paths.assign(solver.ensemble, PathSample::constant(e.grid, initial_field()));
    e.seeds.assign(solver.ensemble, 0);
    return e;
}

}  // namespace rdspde
