#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "orthorec/experiments.hpp"

namespace {

int run_command(const std::string& config_path, const std::string& out_dir) {
    std::ifstream in(config_path);
    if (!in) {
        std::cerr << "cannot open config: " << config_path << "\n";
        return 1;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    orthorec::ExperimentConfig cfg;
    try {
        cfg = orthorec::config_from_json(buf.str());
    } catch (const orthorec::ConfigInvalid& e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return 1;
    }
    orthorec::ExperimentResult res = orthorec::run_experiment(cfg);
    orthorec::write_outputs(res, out_dir);
    for (const auto& run : res.runs) {
        if (run.breakdown)
            std::cerr << run.method << ": breakdown at step "
                      << run.breakdown->step << ": " << run.breakdown->message
                      << "\n";
    }
    return res.partial ? 2 : 0;
}

int golden_command(const std::string& experiment) {
    orthorec::ExperimentConfig cfg;
    try {
        cfg = orthorec::default_config(experiment);
    } catch (const orthorec::ConfigInvalid& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    cfg.metric_stride = 0;  // golden scalars only
    orthorec::ExperimentResult res = orthorec::run_experiment(cfg);
    for (const auto& run : res.runs) {
        for (const auto& [name, value] : run.golden)
            std::printf("%s %s %.6e\n", run.method.c_str(), name.c_str(), value);
    }
    return res.partial ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Recurrence matrix and pencil up/downdating experiments"};
    app.require_subcommand(1);

    std::string config_path, out_dir, experiment;
    CLI::App* run = app.add_subcommand("run", "run an experiment from a JSON config");
    run->add_option("--config", config_path, "path to config JSON")->required();
    run->add_option("--out", out_dir, "output directory")->required();
    CLI::App* golden = app.add_subcommand("golden", "print final golden scalars");
    golden->add_option("--experiment", experiment, "experiment name")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? 1 : 1;
    }
    if (run->parsed()) return run_command(config_path, out_dir);
    return golden_command(experiment);
}
