#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
    using namespace nsk::cli;
    CLI::App app{"Pseudo-spectral NSK simulator and harmonic-analysis checks"};
    app.require_subcommand(1);

    std::string manifest;
    Overrides o;
    std::uint64_t seed = 0;
    std::string output;
    for (const char* name : {"simulate", "decay-fit", "check-inequalities", "spectrum"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--manifest", manifest, "run manifest (JSON)")->required();
        sub->add_option("--seed", seed, "master seed, overrides the manifest");
        sub->add_option("--jobs", o.jobs, "concurrent experiments")->check(CLI::PositiveNumber);
        sub->add_option("--output", output, "output directory, overrides the manifest");
        if (std::string(name) == "simulate") sub->add_flag("--resume", o.resume, "continue an existing trajectory");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? exit_ok : exit_usage;
    }
    const auto* sub = app.get_subcommands().front();
    if (sub->count("--seed")) o.seed = seed;
    if (!output.empty()) o.output = output;

    try {
        const RunManifest m = load_manifest(manifest, sub->get_name(), o);
        return run(m, o);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n" << sub->help();
        return exit_usage;
    } catch (const nsk::ConfigurationError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_model_failure;
    }
}
