#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rdspde/io.hpp"

int main(int argc, char** argv) {
    CLI::App app{"spectral solver and fixed-point diagnostics for noise-driven reaction-diffusion systems"};
    app.require_subcommand(1);

    std::string config_path;
    std::string csv_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<int> threads;
    std::optional<std::string> format;
    std::optional<std::string> plot_out;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "override the config seed");
        cmd->add_option("--out-dir", out_dir, "output directory");
        cmd->add_option("--threads", threads, "worker threads (0 = all)");
        cmd->add_option("--format", format, "csv or binary")
            ->check(CLI::IsMember({"csv", "binary"}));
    };

    auto* run = app.add_subcommand("run", "run a configured experiment");
    run->add_option("config", config_path, "config file")->required();
    add_common(run);

    auto* suite = app.add_subcommand("suite", "verification suites");
    suite->require_subcommand(1);
    auto* proj = suite->add_subcommand("projections", "projection inequality suite");
    proj->add_option("config", config_path, "config file")->required();
    add_common(proj);
    auto* noise = suite->add_subcommand("noise", "noise law suite");
    noise->add_option("config", config_path, "config file")->required();
    add_common(noise);

    auto* plot = app.add_subcommand("plot", "render a columnar file as an SVG image");
    plot->add_option("file", csv_path, "columnar csv file")->required();
    plot->add_option("--out", plot_out, "output svg path");

    CLI11_PARSE(app, argc, argv);

    rdspde::CliOverrides ov{seed, out_dir, threads, format};
    if (run->parsed()) return rdspde::run_experiment(config_path, ov);
    if (suite->parsed()) {
        if (proj->parsed()) return rdspde::run_projection_suite(config_path, ov);
        return rdspde::run_noise_suite(config_path, ov);
    }
    return rdspde::run_plot(csv_path, plot_out);
}
