#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>

#include "dlab/cli_reports.hpp"
#include "dlab/parallel.hpp"

int main(int argc, char** argv) {
    CLI::App app{"dlab: dispersive estimate laboratory"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out_dir = ".";
    unsigned threads = 0;
    std::uint64_t seed = 0;
    app.add_option("--config", config_path, "experiment configuration (JSON)")->required();
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--threads", threads, "worker threads (default: DLAB_THREADS or hardware)");
    auto* seed_opt = app.add_option("--seed", seed, "override the config seed");

    for (const std::string& command : dlab::known_commands()) app.add_subcommand(command, "run a " + command + " experiment");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    dlab::RunOptions options;
    options.threads = threads > 0 ? threads : dlab::Executor::default_threads();
    if (seed_opt->count() > 0) options.seed = seed;
    const std::string command = app.get_subcommands().front()->get_name();
    return dlab::run_config(command, config_path, out_dir, options);
}
