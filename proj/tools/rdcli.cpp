#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "mcrd/app/config.hpp"
#include "mcrd/app/modes.hpp"
#include "mcrd/app/output.hpp"
#include "mcrd/errors.hpp"

namespace fs = std::filesystem;
using namespace mcrd;
using namespace mcrd::app;

namespace {

int fail(int code, const std::string& kind, const std::string& message, const std::optional<fs::path>& dir) {
    const json record = error_record(code, kind, message);
    std::cerr << record.dump() << std::endl;
    if (dir) {
        try {
            write_atomic(*dir / "error.json", record.dump(2) + "\n");
        } catch (const std::exception&) {
        }
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App cli{"Mass-conserving reaction-diffusion toolkit"};
    std::string mode;
    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    bool no_plots = false;
    cli.add_option("mode", mode, "simulate | stationary | spectrum | sweep | limit-tau1 | verify")
        ->required()
        ->check(CLI::IsMember(kModes));
    cli.add_option("--config", config_path, "JSON configuration file")->required();
    cli.add_option("--out", out_dir, "output directory (overrides output_dir)");
    cli.add_option("--seed", seed, "random seed (overrides stepper.seed)");
    cli.add_flag("--no-plots", no_plots, "skip SVG plots");

    try {
        cli.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return cli.exit(e);
    } catch (const CLI::ParseError& e) {
        cli.exit(e);
        return fail(kExitConfig, "usage", e.what(), std::nullopt);
    }

    std::optional<fs::path> dir;
    if (out_dir) dir = *out_dir;
    try {
        RunConfig cfg = load_config(config_path);
        if (!dir) dir = fs::path(cfg.output_dir);
        RunOptions options;
        options.out_dir = dir;
        options.seed = seed;
        options.plots = !no_plots;
        const int code = run_mode(mode, std::move(cfg), options);
        if (code == kExitInvariant) return fail(code, "invariant", "verification checks failed", dir);
        return code;
    } catch (const ConfigError& e) {
        return fail(kExitConfig, "config", e.what(), dir);
    } catch (const InvariantViolation& e) {
        return fail(kExitInvariant, "invariant", e.what(), dir);
    } catch (const SolverError& e) {
        return fail(kExitSolver, "solver", e.what(), dir);
    } catch (const json::exception& e) {
        return fail(kExitConfig, "config", e.what(), dir);
    } catch (const std::exception& e) {
        return fail(kExitSolver, "solver", e.what(), dir);
    }
}
