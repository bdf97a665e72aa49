// unravel: master equation and unraveling ensembles from the command line.
//
//   unravel master|ensemble|compare|functionals (--spec FILE | --preset NAME) --out DIR
//           [--seed N] [--n-traj N] [--unraveling wiener|poisson] [--trajectory K]
//
// Exit status: 0 success, 1 runtime failure, 2 invalid input,
// 3 compare threshold violated.

#include <iostream>

#include <CLI11.hpp>

#include "unravel/cli/commands.hpp"
#include "unravel/cli/model_spec.hpp"

using namespace unravel;
using namespace unravel::cli;

int main(int argc, char** argv)
{
    CLI::App app{"Lindblad master equation, Wiener and Poisson unravelings, and their entropy functionals"};
    app.require_subcommand(1);

    std::string spec_path;
    std::string preset_name;
    std::string out_dir;
    std::uint64_t seed = 0;
    std::size_t n_traj = 0;
    std::string unraveling;
    std::size_t trajectory = 0;
    std::size_t threads = 0;

    const std::vector<std::pair<std::string, std::string>> commands{
        {"master", "Integrate the master equation"},
        {"ensemble", "Run a trajectory ensemble of the configured unraveling"},
        {"compare", "Check both unravelings against the master equation"},
        {"functionals", "Entropy functionals along a single trajectory"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        auto* spec_opt = sub->add_option("--spec", spec_path, "JSON model file")->check(CLI::ExistingFile);
        auto* preset_opt = sub->add_option("--preset", preset_name, "Built-in model: damping or rabi");
        spec_opt->excludes(preset_opt);
        sub->add_option("--out", out_dir, "Output directory")->required();
        sub->add_option("--seed", seed, "Master seed (overrides the model file)");
        sub->add_option("--n-traj", n_traj, "Number of trajectories (overrides the model file)")->check(CLI::Range(2ul, 1ul << 40));
        sub->add_option("--unraveling", unraveling, "wiener or poisson (overrides the model file)")
            ->check(CLI::IsMember({"wiener", "poisson"}));
        sub->add_option("--threads", threads, "Worker threads (default: UNRAVEL_THREADS or all cores)");
        if (name == "functionals") sub->add_option("--trajectory", trajectory, "Trajectory index under the seed");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInvalidInput;
    }

    CLI::App* sub = app.get_subcommands().front();
    const std::string command = sub->get_name();

    EnsembleConfig config = preset("damping");
    CommandOptions options;
    try {
        if (!spec_path.empty()) {
            config = parse_model(spec_path);
        } else if (!preset_name.empty()) {
            config = preset(preset_name);
        } else {
            std::cerr << "error: one of --spec or --preset is required\n";
            return kExitInvalidInput;
        }
        options.out_dir = out_dir;
        if (sub->count("--seed")) options.seed = seed;
        if (sub->count("--n-traj")) options.n_traj = n_traj;
        if (!unraveling.empty()) options.unraveling = parse_unraveling(unraveling);
        options.trajectory = trajectory;
        options.workers = threads;
        config = apply_options(std::move(config), options);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalidInput;
    }

    try {
        if (command == "master") return cmd_master(config, options);
        if (command == "ensemble") return cmd_ensemble(config, options);
        if (command == "compare") {
            const int status = cmd_compare(config, options);
            if (status == kExitThresholdViolated) std::cerr << "compare: thresholds violated, see compare_summary.json\n";
            return status;
        }
        return cmd_functionals(config, options);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntimeError;
    }
}
