// qlif command-line driver. Talks to the library only through qlif.h.
#include <cstdint>
#include <cstdio>
#include <string>
#include <utility>

#include "CLI11.hpp"
#include "qlif/qlif.h"

namespace {

constexpr int kPrecondition = 2;

int report_failure() {
    std::fprintf(stderr, "%s\n", qlif_last_error_record());
    return kPrecondition;
}

int run_scenario(const std::string& command, const std::string& config, const std::string& out, unsigned threads) {
    qlif_scenario* scenario = nullptr;
    qlif_status status = qlif_scenario_load(config.c_str(), &scenario);
    if (status != QLIF_OK) return report_failure();
    int exit_code = kPrecondition;
    status = qlif_run_command(scenario, command.c_str(), out.c_str(), threads, &exit_code);
    qlif_scenario_destroy(scenario);
    if (status != QLIF_OK) {
        std::fprintf(stderr, "%s\n", qlif_last_error_record());
        return exit_code;
    }
    std::printf("%s: %s\n", command.c_str(), qlif_last_message());
    if (exit_code == 1) std::fprintf(stderr, "%s: tolerance check failed\n", command.c_str());
    return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum reference frame transformations to locally inertial frames"};
    app.require_subcommand(1);

    std::string config;
    std::string out = ".";
    std::uint64_t seed = 0;
    unsigned threads = 0;
    double tolerance_scale = 1.0;

    const std::pair<const char*, const char*> commands[] = {
        {"transform", "map every branch to the locally inertial frame of the particle"},
        {"geodesics", "integrate one geodesic per branch metric"},
        {"collapse", "gravitational self-energy difference and collapse time vs separation"},
    };
    for (const auto& [name, about] : commands) {
        CLI::App* sub = app.add_subcommand(name, about);
        sub->add_option("--config", config, "scenario config (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "output directory");
        sub->add_option("--seed", seed, "accepted for interface symmetry; these commands draw no random numbers");
        sub->add_option("--threads", threads, "worker threads (0 = config value)");
    }
    CLI::App* selftest = app.add_subcommand("selftest", "run the built-in invariant suite");
    selftest->add_option("--seed", seed, "seed for randomized checks");
    selftest->add_option("--threads", threads, "ignored; the suite is single-threaded");
    selftest->add_option("--out", out, "ignored");
    selftest->add_option("--tolerance-scale", tolerance_scale, "multiplies every threshold");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kPrecondition;
    }

    if (selftest->parsed()) {
        int exit_code = kPrecondition;
        const qlif_status status = qlif_selftest(seed, tolerance_scale, &exit_code);
        if (status != QLIF_OK) return report_failure();
        std::fputs(qlif_last_message(), exit_code == 0 ? stdout : stderr);
        return exit_code;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    return run_scenario(command, config, out, threads);
}
