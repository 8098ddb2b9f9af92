#include "cdsbounds/cli_app.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"No-arbitrage and good-deal bounds for illiquid CDS positions"};
    std::string command;
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    bool plots = false;

    app.add_option("command", command, "bounds | hedge | density | gooddeal | sweep | scalecheck")
        ->required()
        ->check(CLI::IsMember(cdsbounds::command_names()));
    app.add_option("--config", config, "run configuration file")->required();
    app.add_option("--out", out, "output directory")->required();
    auto* seed_opt = app.add_option("--seed", seed, "override run.seed");
    app.add_flag("--plots", plots, "also render SVG plots of the CSVs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return cdsbounds::exit_config;
    }

    cdsbounds::RunOptions options;
    if (*seed_opt)
        options.seed = seed;
    options.plots = plots;
    try {
        return cdsbounds::run_guarded(command, config, out, options, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
}
