// sqzsim <spectrum|error-signals|lock|budget> --config FILE [--seed N] [--out DIR]
//
// Exit codes: 0 ok, 2 configuration or usage error, 3 simulation failure.
// SQZSIM_LOG=trace|debug|info|warn|error|off sets stderr verbosity (default warn).

#include "sqzsim/sqzsim.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <string>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSimulation = 3;

void setup_logging()
{
    auto logger = spdlog::stderr_color_mt("sqzsim");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("SQZSIM_LOG")) {
        const auto level = spdlog::level::from_str(env);
        if (level == spdlog::level::off && std::string(env) != "off") {
            spdlog::warn("SQZSIM_LOG='{}' not recognized, keeping 'warn'", env);
        } else {
            spdlog::set_level(level);
        }
    }
}

sqzsim::cli::CommandOutput run(const std::string& command, const sqzsim::cli::ScenarioConfig& cfg, std::uint64_t seed)
{
    using namespace sqzsim::cli;
    if (command == "spectrum") {
        const auto r = cmd_spectrum(cfg);
        spdlog::info("spectrum: {} bins", r.squeezed.bins.size());
        return spectrum_output(r);
    }
    if (command == "error-signals") {
        const auto table = cmd_error_signals(cfg);
        spdlog::info("error-signals: {} rows", table.rows().size());
        return {{{"error_signals.csv", table}}, {}};
    }
    if (command == "lock") {
        const auto r = cmd_lock(cfg, seed);
        spdlog::info("lock: acquired={} residual={} rad ({})", r.report.acquired, r.report.residual_rms,
                     r.report.diagnostics);
        return lock_output(r);
    }
    const auto r = cmd_budget(cfg);
    spdlog::info("budget: {}", to_string(r.plan.injection_case));
    return budget_output(r);
}

} // namespace

int main(int argc, char** argv)
{
    setup_logging();

    CLI::App app{"Squeezed-light source simulator"};
    std::string command;
    std::string config_path;
    std::uint64_t seed = 42;
    std::string out_dir = ".";
    app.add_option("command", command, "spectrum | error-signals | lock | budget")
        ->required()
        ->check(CLI::IsMember({"spectrum", "error-signals", "lock", "budget"}));
    app.add_option("--config", config_path, "scenario file")->required();
    app.add_option("--seed", seed, "random seed for lock runs")->capture_default_str();
    app.add_option("--out", out_dir, "output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    sqzsim::cli::ScenarioConfig cfg;
    try {
        cfg = sqzsim::cli::load_config(config_path);
    } catch (const sqzsim::cli::ConfigError& e) {
        spdlog::error("{}: {}", config_path, e.what());
        return kExitConfig;
    }

    try {
        const auto out = run(command, cfg, seed);
        sqzsim::cli::write_outputs(out, out_dir);
        for (const auto& [name, table] : out.tables) {
            spdlog::debug("wrote {}", (std::filesystem::path(out_dir) / name).string());
        }
    } catch (const std::exception& e) {
        spdlog::error("{} failed: {}", command, e.what());
        return kExitSimulation;
    }
    return 0;
}
