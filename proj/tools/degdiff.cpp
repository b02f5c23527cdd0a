// degdiff: run, compare and diagnose degenerate-diffusion experiments.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "degdiff/runner.hpp"

namespace {

void print_compare(const std::vector<degdiff::CompareRow>& rows) {
    std::printf("%5s %7s %7s %10s %14s %14s %8s %8s\n", "level", "n", "steps", "t", "L1", "Linf", "p(L1)",
                "p(Linf)");
    for (const auto& r : rows)
        std::printf("%5zu %7zu %7zu %10.4g %14.6e %14.6e %8.3f %8.3f\n", r.level, r.n, r.steps, r.t, r.l1, r.linf,
                    r.l1_order, r.linf_order);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Degenerate diffusion solver with particle representation checks"};
    app.set_version_flag("--version", std::string(degdiff::kVersion));
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string output_root;

    auto* run = app.add_subcommand("run", "Solve, simulate particles and write the artifact tree");
    run->add_option("config", config_path, "Run configuration (TOML)")->required()->check(CLI::ExistingFile);
    run->add_option("--seed", seed, "Override particles.seed");
    run->add_option("--output-root", output_root, "Root for relative output paths (default: $DEGDIFF_OUTPUT_ROOT)");

    std::string oracle;
    std::size_t levels = 3;
    auto* compare = app.add_subcommand("compare", "Error against an exact solution on a refinement ladder");
    compare->add_option("config", config_path, "Run configuration (TOML)")->required()->check(CLI::ExistingFile);
    compare->add_option("--oracle", oracle, "heat | barenblatt | stationary")
        ->required()
        ->check(CLI::IsMember({"heat", "barenblatt", "stationary"}));
    compare->add_option("--levels", levels, "Ladder length; each level doubles n and steps")
        ->check(CLI::PositiveNumber);
    compare->add_option("--output-root", output_root, "Root for relative output paths (default: $DEGDIFF_OUTPUT_ROOT)");

    std::string artifact_dir;
    auto* diagnose = app.add_subcommand("diagnose", "Re-check the invariants of an artifact tree");
    diagnose->add_option("artifact-dir", artifact_dir, "Directory written by `run`")
        ->required()
        ->check(CLI::ExistingDirectory);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // --help and --version exit 0; every other parse failure is a usage error
        return app.exit(e) == 0 ? degdiff::kExitOk : degdiff::kExitUsage;
    }

    degdiff::RunOptions opt;
    opt.seed = seed;
    if (!output_root.empty()) opt.output_root = output_root;

    try {
        if (*run) {
            const auto outcome = degdiff::run(degdiff::load_config(config_path), opt);
            std::cout << outcome.summary.dump(2) << "\n";
            std::cerr << "artifacts: " << outcome.directory.string() << "\n";
            if (outcome.exit_code != degdiff::kExitOk)
                std::cerr << (outcome.exit_code == degdiff::kExitNoConvergence ? "solver did not converge"
                                                                               : "invariant violated")
                          << "\n";
            return outcome.exit_code;
        }
        if (*compare) {
            const auto config = degdiff::load_config(config_path);
            const auto rows = degdiff::compare(config, oracle, levels);
            print_compare(rows);
            const auto dir = degdiff::detail::output_directory(config, opt);
            std::string jsonl;
            for (const auto& r : rows) jsonl += degdiff::compare_row_json(r).dump() + "\n";
            degdiff::detail::write_file(dir / ("compare_" + oracle + ".jsonl"), jsonl);
            return degdiff::kExitOk;
        }
        if (*diagnose) {
            const auto result = degdiff::diagnose(artifact_dir);
            std::cout << degdiff::diagnose_json(result).dump(2) << "\n";
            return result.ok() ? degdiff::kExitOk : degdiff::kExitInvariant;
        }
    } catch (const degdiff::ConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return degdiff::kExitNoConvergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return degdiff::kExitUsage;
    }
    return degdiff::kExitUsage;
}
