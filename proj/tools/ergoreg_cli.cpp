#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ergoreg/experiment.hpp"

namespace {

ergoreg::ExperimentConfig load_config(const std::string& path) {
    if (path.empty()) return ergoreg::ExperimentConfig{};
    std::ifstream in(path);
    if (!in) throw ergoreg::config_error("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ergoreg::config_error("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return ergoreg::ExperimentConfig::from_json(j);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ergoreg: averaging transforms over integrable flows, their norms, "
                 "bounds, and Monte Carlo checks"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    unsigned threads = 0;
    app.add_option("--config", config_path, "JSON experiment configuration (schema 1)");
    app.add_option("--out", out_dir, "output directory (default: config 'out' or ./results)");
    app.add_option("--seed", seed, "override the config seed")->each([&](const std::string&) {
        seed_set = true;
    });
    app.add_option("--threads", threads,
                   "worker threads (0: ERGOREG_THREADS or hardware)");

    using ergoreg::ExperimentKind;
    std::pair<const char*, ExperimentKind> subs[] = {
        {"sweep-t", ExperimentKind::sweep_T},
        {"sweep-munu", ExperimentKind::sweep_munu},
        {"mc-validate", ExperimentKind::mc_validate},
        {"lower-bounds", ExperimentKind::lower_bounds},
        {"inequalities", ExperimentKind::inequalities},
        {"norms", ExperimentKind::norms},
    };
    for (const auto& [name, kind] : subs) {
        auto* cmd = app.add_subcommand(name);
        cmd->fallthrough();  // global flags may follow the subcommand
        (void)kind;
    }

    CLI11_PARSE(app, argc, argv);

    try {
        ergoreg::ExperimentConfig config = load_config(config_path);
        for (const auto& [name, kind] : subs) {
            if (app.got_subcommand(name)) config.experiment = kind;
        }
        if (seed_set) config.seed = seed;
        if (threads > 0) config.threads = threads;
        if (!out_dir.empty()) config.out_dir = out_dir;

        const ergoreg::SweepResult result = ergoreg::run(config);

        std::filesystem::create_directories(config.out_dir);
        const std::string base =
            config.out_dir + "/" + ergoreg::experiment_name(config.experiment);
        ergoreg::emit_csv(result, base + ".csv");
        ergoreg::emit_metadata(result, config, base + ".meta.json");

        std::cout << ergoreg::experiment_name(config.experiment) << ": " << result.rows.size()
                  << " rows, config " << result.config_hash << "\n";
        for (const std::string& note : result.notes) std::cout << "  " << note << "\n";
        std::cout << "  wrote " << base << ".csv\n";
        if (result.invariant_violation) {
            std::cerr << "invariant violation detected during the run\n";
            return 3;
        }
        return 0;
    } catch (const ergoreg::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
