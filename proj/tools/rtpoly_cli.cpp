// Command-line driver: parses an experiment config, dispatches the enabled
// experiments, and writes CSV tables plus a JSON summary and run manifest.
//
// Exit codes: 0 all enabled assertions pass, 1 configuration or IO error,
// 2 an experiment assertion failed.

#include <cstdlib>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rtp/config.hpp"
#include "rtp/runner.hpp"
#include "rtp/version.hpp"

int main(int argc, char** argv) {
    CLI::App app{"random trigonometric polynomial simulation experiments"};
    app.set_version_flag("--version", rtp::version_string);
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    auto* run = app.add_subcommand("run", "run the experiments enabled in a config file");
    run->add_option("config", config_path, "path to the key=value config file")->required();
    run->add_option("overrides", overrides, "key=value or section.key=value overrides");

    auto* list = app.add_subcommand("list-experiments",
                                    "list experiment kinds, the statements they check, and "
                                    "their default tolerances");

    CLI11_PARSE(app, argc, argv);

    if (list->parsed()) {
        std::cout << rtp::list_experiments_text();
        return 0;
    }

    try {
        rtp::ConfigFile cfg = rtp::parse_config_file(config_path);
        for (const auto& ov : overrides) rtp::apply_override(cfg, ov);

        const char* env_dir = std::getenv("RTPOLY_OUT_DIR");
        const rtp::RunResult result = rtp::run_config(cfg, env_dir ? env_dir : "");

        for (const auto& outcome : result.outcomes)
            std::cout << (outcome.pass ? "[PASS] " : "[FAIL] ") << outcome.kind << "\n";
        std::cout << "outputs written to " << result.output_dir << "\n";
        return result.exit_code;
    } catch (const rtp::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
