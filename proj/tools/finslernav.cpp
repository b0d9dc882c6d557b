// Command-line front end: runs verification scenarios, integrates geodesics
// and samples level sets from JSON configs. Exit codes: 0 success, 1 check or
// runtime failure, 2 configuration error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "finsler/scenario.hpp"

namespace {

int dispatch(const std::string& mode, const std::string& config_path, const std::string& out_dir,
             std::optional<std::uint64_t> seed) {
    finsler::ScenarioConfig cfg = finsler::ScenarioConfig::load(config_path);
    if (seed) cfg.seed = *seed;
    if (mode == "verify") return finsler::run_verify(cfg, out_dir, std::cout);
    if (mode == "geodesic") return finsler::run_geodesic(cfg, out_dir, std::cout);
    return finsler::run_levelset(cfg, out_dir, std::cout);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finsler / Lorentz-Finsler navigation toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::string mode;
    for (const char* name : {"verify", "geodesic", "levelset"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "scenario JSON")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "override the scenario seed");
        sub->callback([&mode, name] { mode = name; });
    }

    CLI11_PARSE(app, argc, argv);

    try {
        return dispatch(mode, config_path, out_dir, seed);
    } catch (const finsler::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const finsler::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
