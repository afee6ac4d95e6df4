#include "app/runner.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    CLI::App app{"pathflow: functional Ito decompositions on simulated paths"};
    app.require_subcommand(1);
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    for (const char* name : {"simulate", "localtime", "variation", "verify"}) {
        auto* sub = app.add_subcommand(name, std::string("run the ") + name + " experiment");
        sub->add_option("--config", config, "experiment file (.toml or .json)")->required();
        sub->add_option("--out", out, "output directory")->required();
        sub->add_option("--seed-override", seed, "replace simulation.seed0");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    const auto sub = pathflow::app::subcommand_from_string(app.get_subcommands().front()->get_name());
    return pathflow::app::run_cli(sub, config, out, seed);
}
