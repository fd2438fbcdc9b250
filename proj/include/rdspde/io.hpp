#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rdspde/config.hpp"

namespace rdspde {

// columnar table: comma-separated, header row, 17 significant digits
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

std::string format_g17(double v);
void write_csv(const std::string& path, const Table& table);
Table read_csv(const std::string& path);

void write_manifest(const std::string& path,
                    const std::vector<std::pair<std::string, std::string>>& entries);

void write_ensemble_snapshot(const std::string& path, const PathEnsemble& ensemble);
PathEnsemble read_ensemble_snapshot(const std::string& path);

// static SVG line plot of every column against the first one
void write_svg_plot(const std::string& path, const Table& table, const std::string& title);

struct CliOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<int> threads;
    std::optional<std::string> format;
};

// exit codes: 0 success, 2 config error, 3 path-failure rate above the
// configured threshold, 4 I/O failure
int run_experiment(const std::string& config_path, const CliOverrides& overrides);
int run_projection_suite(const std::string& config_path, const CliOverrides& overrides);
int run_noise_suite(const std::string& config_path, const CliOverrides& overrides);
int run_plot(const std::string& csv_path, const std::optional<std::string>& out_path);

// default output directory when neither config nor flag names one
const char* kOutDirEnvVar();

}  // namespace rdspde
