#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "rdspde/models.hpp"
#include "rdspde/noise.hpp"
#include "rdspde/solver.hpp"

namespace rdspde {

// configuration failure that names the offending field
struct ConfigError : std::runtime_error {
    std::string field;
    ConfigError(std::string f, const std::string& message)
        : std::runtime_error(message), field(std::move(f)) {}
};

// line-based sectioned key=value text; '#' starts a comment
class IniFile {
  public:
    static IniFile parse(const std::string& text);
    static IniFile load(const std::string& path);

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key,
                    const std::string& fallback) const;
    std::string require(const std::string& section, const std::string& key) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    long get_long(const std::string& section, const std::string& key, long fallback) const;
    std::uint64_t get_u64(const std::string& section, const std::string& key,
                          std::uint64_t fallback) const;
    std::vector<double> get_list(const std::string& section, const std::string& key) const;

    // any key never read by the loaders is reported as unknown
    std::vector<std::string> unread_keys() const;

  private:
    std::map<std::string, std::string> values_;
    mutable std::set<std::string> read_;
};

struct RunConfig {
    ModelSpec model;
    DomainSpec domain;
    WienerSpec wiener;
    IntensitySpec intensity;
    SolveConfig solver;
    FixedPointMode mode = FixedPointMode::forward;
    std::vector<double> initial_values;  // per-component constant
    std::vector<double> initial_bump;    // optional first-mode coefficient per component
    std::uint64_t seed = 0;
    int threads = 0;  // 0 = library default
    double failure_threshold = 0.1;
    std::string out_dir;  // empty: flag, then env, then "out"
    std::string format = "csv";  // csv | binary

    // [suite] section: corpus and tolerance knobs for the CLI suites
    int suite_count = 200;
    int suite_const_level = 8;
    int suite_linear_level = 5;
    double suite_rtol = 1e-9;
    std::vector<int> suite_kappas{1, 2, 3, 4, 5, 6, 7, 8};
    std::vector<double> suite_ms{2.0, 3.0};
    std::vector<double> suite_alphas{0.1, 0.25};
    long noise_samples = 100000;

    static RunConfig from_ini(const IniFile& ini);
    static RunConfig load(const std::string& path);
    void validate() const;

    Field initial_field() const;
    PathEnsemble initial_ensemble() const;
};

}  // namespace rdspde
