#include <CLI11.hpp>

#include <iostream>
#include <optional>

#include "commands.hpp"
#include "shortrate/errors.hpp"

using namespace shortrate::cli;

int main(int argc, char** argv) {
    CLI::App app{"Optimal consumption under a short-rate diffusion"};
    app.require_subcommand(1, 1);

    std::string config_file, profile;
    std::vector<std::string> assignments;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;
    std::optional<std::string> output;
    bool force = false;

    app.option_defaults()->always_capture_default(false);
    app.add_option("--config", config_file, "settings file of key = value lines");
    app.add_option("--set", assignments, "override one key (repeatable), e.g. --set problem.gamma=0.1");
    app.add_option("--profile", profile, "named preset")->check(CLI::IsMember({"desk", "paper"}));
    app.add_option("--seed", seed, "RNG seed");
    app.add_option("--threads", threads, "worker threads for Monte Carlo")->check(CLI::PositiveNumber);
    app.add_option("--output", output, "output directory");
    app.add_flag("--force", force, "solve even when finiteness is not established");

    const std::vector<std::pair<std::string, std::string>> commands{
        {"feasibility", "classify the model and print the feasibility report"},
        {"solve", "solve the HJB equation by monotone iteration"},
        {"solve-b", "solve the problem stopped when the rate reaches 0"},
        {"solve-c", "value and bond exposure when bonds are traded"},
        {"simulate", "one sample path of rate, wealth and consumption"},
        {"estimate", "Monte Carlo value of the computed policy against the PDE value"},
        {"residual", "HJB residual of a stored solution"},
    };
    for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInvalidInput;
    }

    Invocation inv;
    inv.command = app.get_subcommands().front()->get_name();
    try {
        Settings s = default_settings();
        if (!profile.empty()) merge_settings(s, profile_settings(profile));
        if (!config_file.empty()) merge_settings(s, read_settings_file(config_file));
        Settings overrides;
        for (const std::string& a : assignments) {
            auto [key, value] = parse_assignment(a);
            overrides.insert_or_assign(std::move(key), std::move(value));
        }
        if (seed) overrides["run.seed"] = std::to_string(*seed);
        if (threads) overrides["run.threads"] = std::to_string(*threads);
        if (output) overrides["output.dir"] = *output;
        merge_settings(s, overrides);
        inv.config = build_config(s);
        inv.config.solver.force = force;
        inv.settings = std::move(s);
    } catch (const shortrate::InvalidInput& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kInvalidInput;
    }
    return run_guarded(inv);
}
