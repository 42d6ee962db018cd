// Command line front end.
//
//   combsim run <spec-file>            execute a parsed experiment spec
//   combsim preset <name> [--set k=v]  run a named preset with overrides
//   combsim list-presets               enumerate presets with one-line notes
//
// Exit codes: 0 success, 2 spec/usage error, 3 loop non-convergence.

#include "combsim/combsim.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr int kExitSpecError = 2;
constexpr int kExitNonConvergence = 3;

int run_and_report(const combsim::ExperimentSpec& spec) {
    const combsim::RunResult result = combsim::run_experiment(spec);
    for (const auto& path : result.data_files) std::cout << "wrote " << path << "\n";
    for (const auto& path : result.manifest_files) std::cout << "wrote " << path << "\n";
    return 0;
}

int run_spec_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::cerr << "error: cannot read spec file: " << path << "\n";
        return kExitSpecError;
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return run_and_report(combsim::parse_spec(buffer.str()));
}

int run_preset(const std::string& name, const std::vector<std::string>& overrides) {
    std::string text = "preset = " + name + "\n";
    for (const auto& kv : overrides) {
        if (kv.find('=') == std::string::npos)
            throw combsim::SpecError("--set needs key=value, got '" + kv + "'");
        text += kv + "\n";
    }
    return run_and_report(combsim::parse_spec(text));
}

void list_presets() {
    std::cout << "fringe             steady-state interference fringe of the feedback loop\n"
              << "cosine-benchmark   ideal two-port interferometer cosine at matched flux\n"
              << "atomic-phase       baseline and probe-shifted fringes, rigid offset\n"
              << "sensitivity        optimal-phase report: slope, noise, delta-phi vs 1/sqrt(N)\n"
              << "destruction        insertion sweep: lossy amplifier at fixed mean gain\n"
              << "sweep              sensitivity report swept over one loop parameter\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hybrid light-atom loop simulator"};
    app.require_subcommand(1);

    std::string spec_path;
    auto* run = app.add_subcommand("run", "execute an experiment spec file");
    run->add_option("spec-file", spec_path, "path to a key = value spec")->required();

    std::string preset_name;
    std::vector<std::string> overrides;
    auto* preset = app.add_subcommand("preset", "run a named preset");
    preset->add_option("name", preset_name, "preset name (see list-presets)")->required();
    preset->add_option("--set", overrides, "override a spec key, e.g. --set gamma_a=0.4");

    auto* list = app.add_subcommand("list-presets", "enumerate available presets");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitSpecError;
    }

    try {
        if (list->parsed()) {
            list_presets();
            return 0;
        }
        if (run->parsed()) return run_spec_file(spec_path);
        return run_preset(preset_name, overrides);
    } catch (const combsim::NonConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNonConvergence;
    } catch (const combsim::SpecError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSpecError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSpecError;
    }
}
