#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "rtp/config.hpp"
#include "rtp/runner.hpp"

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

const char* fast_demo_config = R"(# fast demo configuration
model = gaussian
master_seed = 424242

[epsilon_identity]
n_list = 1,10,50
mq = 2048

[window_identity]
n = 64
count = 3
mx = 1024

[sinc_zero_mean]
trials = 500
grid_size = 160
)";

} // namespace

TEST_CASE("config parser handles sections, comments, and values") {
    const auto cfg = rtp::parse_config_text(fast_demo_config, "demo.cfg");
    REQUIRE(cfg.globals.at("model").value == "gaussian");
    REQUIRE(cfg.globals.at("master_seed").value == "424242");
    REQUIRE(cfg.sections.size() == 3);
    REQUIRE(cfg.find("epsilon_identity") != nullptr);
    REQUIRE(cfg.find("epsilon_identity")->keys.at("mq").value == "2048");
    REQUIRE(cfg.find("missing") == nullptr);
}

TEST_CASE("config parser reports line-anchored errors") {
    try {
        rtp::parse_config_text("model = gaussian\nbogus line\n", "bad.cfg");
        FAIL("expected config_error");
    } catch (const rtp::config_error& e) {
        REQUIRE(std::string(e.what()).find("bad.cfg:2") != std::string::npos);
    }
    REQUIRE_THROWS_AS(rtp::parse_config_text("[dup]\n[dup]\n", "dup.cfg"), rtp::config_error);
    REQUIRE_THROWS_AS(rtp::parse_config_file("/nonexistent/path.cfg"), rtp::config_error);
}

TEST_CASE("overrides touch globals and sections") {
    auto cfg = rtp::parse_config_text(fast_demo_config, "demo.cfg");
    rtp::apply_override(cfg, "master_seed=7");
    rtp::apply_override(cfg, "epsilon_identity.mq=4096");
    rtp::apply_override(cfg, "tv_convergence.tolerance=0.2");
    REQUIRE(cfg.globals.at("master_seed").value == "7");
    REQUIRE(cfg.find("epsilon_identity")->keys.at("mq").value == "4096");
    REQUIRE(cfg.find("tv_convergence") != nullptr);
    REQUIRE_THROWS_AS(rtp::apply_override(cfg, "no-equals-sign"), rtp::config_error);
}

TEST_CASE("unknown sections and keys are schema violations") {
    auto cfg = rtp::parse_config_text("[not_an_experiment]\nx = 1\n", "bad.cfg");
    REQUIRE_THROWS_AS(rtp::run_config(cfg, "/tmp/rtpoly_bad"), rtp::config_error);

    auto cfg2 = rtp::parse_config_text("[epsilon_identity]\nbad_key = 1\n", "bad2.cfg");
    try {
        rtp::run_config(cfg2, "/tmp/rtpoly_bad2");
        FAIL("expected config_error");
    } catch (const rtp::config_error& e) {
        REQUIRE(std::string(e.what()).find("bad2.cfg:2") != std::string::npos);
        REQUIRE(std::string(e.what()).find("bad_key") != std::string::npos);
    }

    auto cfg3 = rtp::parse_config_text("model = cauchy\n[epsilon_identity]\n", "bad3.cfg");
    REQUIRE_THROWS_AS(rtp::run_config(cfg3, "/tmp/rtpoly_bad3"), rtp::config_error);
}

TEST_CASE("list-experiments output is stable and complete") {
    const std::string text = rtp::list_experiments_text();
    REQUIRE(text.find("nodal_convergence") != std::string::npos);
    REQUIRE(text.find("stein_bound_check") != std::string::npos);
    std::size_t lines = 0;
    for (char c : text)
        if (c == '\n') ++lines;
    REQUIRE(lines == rtp::experiment_registry().size());
}

TEST_CASE("run_config executes experiments and writes outputs") {
    auto cfg = rtp::parse_config_text(fast_demo_config, "demo.cfg");
    const fs::path dir = fs::temp_directory_path() / "rtpoly_run_test";
    fs::remove_all(dir);
    const auto result = rtp::run_config(cfg, dir.string());
    REQUIRE(result.exit_code == 0);
    REQUIRE(result.all_pass);
    REQUIRE(result.outcomes.size() == 3);
    REQUIRE(fs::exists(dir / "epsilon_identity.csv"));
    REQUIRE(fs::exists(dir / "window_identity.csv"));
    REQUIRE(fs::exists(dir / "sinc_zero_mean.csv"));
    REQUIRE(fs::exists(dir / "summary.json"));
    REQUIRE(fs::exists(dir / "manifest.json"));

    const auto summary = nlohmann::json::parse(read_file(dir / "summary.json"));
    REQUIRE(summary["all_pass"] == true);
    REQUIRE(summary["experiments"]["epsilon_identity"]["pass"] == true);
    REQUIRE(summary["master_seed"] == 424242);

    const auto manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
    REQUIRE(manifest["code_version"] == rtp::version_string);
    REQUIRE(manifest["config_echo"]["globals"]["model"] == "gaussian");
    REQUIRE(manifest["outputs"].size() == 3);

    // every CSV starts with a header row
    const std::string csv = read_file(dir / "epsilon_identity.csv");
    REQUIRE(csv.rfind("n,value,target,abs_error\n", 0) == 0);
}

TEST_CASE("disabled sections are skipped") {
    auto cfg = rtp::parse_config_text(
        "[epsilon_identity]\nenabled = false\n[window_identity]\nn = 64\ncount = 2\nmx = 1024\n",
        "demo.cfg");
    const fs::path dir = fs::temp_directory_path() / "rtpoly_skip_test";
    fs::remove_all(dir);
    const auto result = rtp::run_config(cfg, dir.string());
    REQUIRE(result.outcomes.size() == 1);
    REQUIRE(result.outcomes[0].kind == "window_identity");
    REQUIRE_FALSE(fs::exists(dir / "epsilon_identity.csv"));
}

TEST_CASE("seed override changes numbers but keeps the schema") {
    auto cfg = rtp::parse_config_text("[window_identity]\nn = 64\ncount = 2\nmx = 1024\n", "d.cfg");
    const fs::path d1 = fs::temp_directory_path() / "rtpoly_seed_a";
    const fs::path d2 = fs::temp_directory_path() / "rtpoly_seed_b";
    fs::remove_all(d1);
    fs::remove_all(d2);
    rtp::run_config(cfg, d1.string());
    rtp::apply_override(cfg, "master_seed=777");
    rtp::run_config(cfg, d2.string());
    const std::string c1 = read_file(d1 / "window_identity.csv");
    const std::string c2 = read_file(d2 / "window_identity.csv");
    REQUIRE(c1.substr(0, c1.find('\n')) == c2.substr(0, c2.find('\n'))); // same header
    REQUIRE(c1 != c2);                                                   // different numbers
}

TEST_CASE("repeat runs are byte-identical") {
    auto cfg = rtp::parse_config_text(fast_demo_config, "demo.cfg");
    const fs::path d1 = fs::temp_directory_path() / "rtpoly_det_a";
    const fs::path d2 = fs::temp_directory_path() / "rtpoly_det_b";
    fs::remove_all(d1);
    fs::remove_all(d2);
    rtp::run_config(cfg, d1.string());
    rtp::run_config(cfg, d2.string());
    for (const char* name :
         {"epsilon_identity.csv", "window_identity.csv", "sinc_zero_mean.csv", "summary.json"})
        REQUIRE(read_file(d1 / name) == read_file(d2 / name));
}

#ifdef RTPOLY_CLI_PATH
TEST_CASE("CLI end-to-end: run, override, list, error paths") {
    const fs::path dir = fs::temp_directory_path() / "rtpoly_cli_e2e";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const fs::path cfg_path = dir / "demo.cfg";
    std::ofstream(cfg_path) << fast_demo_config;

    const std::string cli = RTPOLY_CLI_PATH;
    const std::string out1 = (dir / "out1").string();
    REQUIRE(std::system((cli + " run " + cfg_path.string() + " output_dir=" + out1 +
                         " > /dev/null")
                            .c_str()) == 0);
    REQUIRE(fs::exists(fs::path(out1) / "summary.json"));

    // seed override: same schema, different numbers
    const std::string out2 = (dir / "out2").string();
    REQUIRE(std::system((cli + " run " + cfg_path.string() + " output_dir=" + out2 +
                         " master_seed=7 > /dev/null")
                            .c_str()) == 0);
    REQUIRE(read_file(fs::path(out1) / "sinc_zero_mean.csv") !=
            read_file(fs::path(out2) / "sinc_zero_mean.csv"));

    // missing config file: exit code 1
    const int missing = std::system((cli + " run /nonexistent.cfg > /dev/null 2>&1").c_str());
    REQUIRE(WEXITSTATUS(missing) == 1);

    // list-experiments prints one row per registered kind
    const std::string listed = (dir / "list.txt").string();
    REQUIRE(std::system((cli + " list-experiments > " + listed).c_str()) == 0);
    const std::string text = read_file(listed);
    REQUIRE(text.find("nodal_convergence") != std::string::npos);
    REQUIRE(text.find("stein_bound_check") != std::string::npos);
}
#endif
