#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "acdiag/job.hpp"

// Builds and probes separately absolutely continuous surfaces with a
// prescribed diagonal, and recovers series representations of diagonals
// from surface oracles. Commands come from a JSON config (--config) or the
// built-in demos; flags override environment overrides override the file.
int main(int argc, char** argv) {
    CLI::App app{"acdiag - absolutely continuous extension and diagonal "
                 "series toolkit"};
    app.get_formatter()->column_width(30);

    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::string command;
    std::string demo_name;

    app.add_option("command", command,
                   "extend | extract | analyze | roundtrip | demo (optional "
                   "when --config names one)");
    app.add_option("name", demo_name, "demo name for the demo command");
    app.add_option("--config", config_path, "JSON job configuration");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed, "RNG seed for property sampling");
    app.add_option("--threads", threads, "worker threads for grid scans");

    CLI11_PARSE(app, argc, argv);

    try {
        acdiag::job::JobConfig cfg;
        if (!config_path.empty()) {
            cfg = acdiag::job::config_from_json_file(config_path);
            if (!command.empty())
                cfg.command = acdiag::job::command_from_name(command);
            if (!demo_name.empty()) cfg.demo = demo_name;
        } else if (command == "demo") {
            if (demo_name.empty())
                throw acdiag::ConfigError(
                    "demo requires a name: step | xsin | weierstrass | "
                    "pseudonorm");
            cfg = acdiag::job::demo_config(demo_name);
        } else if (!command.empty()) {
            throw acdiag::ConfigError("command '" + command +
                                      "' requires --config");
        } else {
            std::cerr << app.help();
            return 1;
        }

        acdiag::job::apply_env_overrides(cfg);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (seed) cfg.seed = *seed;
        if (threads) cfg.threads = *threads;
        return acdiag::job::run(cfg);
    } catch (const acdiag::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
