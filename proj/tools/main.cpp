#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "dualrail/io.hpp"
#include "dualrail/pipeline.hpp"
#include "dualrail/version.hpp"

namespace {

using namespace dualrail;

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<double> t1_ns, t2_ns, theta_rad, bs_transmittance;
    std::optional<int> threads;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config file")->required();
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--seed", args.seed, "override the config seed");
    cmd->add_option("--t1-ns", args.t1_ns, "override release time of mode 1");
    cmd->add_option("--t2-ns", args.t2_ns, "override release time of mode 2");
    cmd->add_option("--theta-rad", args.theta_rad, "override the idler combining phase");
    cmd->add_option("--bs-transmittance", args.bs_transmittance,
                    "override the idler beamsplitter |t|^2");
    cmd->add_option("--threads", args.threads, "worker count for the measure stage");
}

ExperimentConfig load_config(const CommonArgs& args) {
    ExperimentConfig cfg = ExperimentConfig::from_file(args.config_path);
    if (args.seed) cfg.seed = *args.seed;
    if (args.t1_ns) cfg.release.t1 = *args.t1_ns * 1e-9;
    if (args.t2_ns) cfg.release.t2 = *args.t2_ns * 1e-9;
    if (args.theta_rad) cfg.source.theta = *args.theta_rad;
    if (args.bs_transmittance)
        cfg.source.bs = BeamSplitterParams::from_transmittance(*args.bs_transmittance);
    if (args.threads) cfg.threads = *args.threads;
    cfg.check();
    if (!cfg.source.weak_pump())
        std::cerr << "warning: pump amplitude above 0.3, weak-pump heralding model "
                     "is strained\n";
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-mode single-photon entanglement: heralding, storage, homodyne "
                 "tomography and analysis"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    CommonArgs args;
    std::string in_file, samples_file;
    std::vector<std::string> state_files;
    std::vector<double> dtaus_ns, storage_times_ns, delays_ns;
    int bootstrap_n = 0;
    bool no_loss_correction = false;

    auto* c_generate = app.add_subcommand("generate", "build the heralded two-mode state");
    add_common(c_generate, args);

    auto* c_store = app.add_subcommand("store", "apply loss, dephasing and detuning rotation");
    add_common(c_store, args);
    c_store->add_option("--in", in_file, "input state file")->required();

    auto* c_measure = app.add_subcommand("measure", "sample homodyne quadrature pairs");
    add_common(c_measure, args);
    c_measure->add_option("--in", in_file, "input state file")->required();

    auto* c_reconstruct =
        app.add_subcommand("reconstruct", "maximum-likelihood density matrix from samples");
    add_common(c_reconstruct, args);
    c_reconstruct->add_option("--in", samples_file, "input samples file")->required();

    auto* c_analyze = app.add_subcommand("analyze", "negativity, Wigner origin and estimators");
    add_common(c_analyze, args);
    c_analyze->add_option("--in", state_files, "state file(s)")->required();
    c_analyze->add_option("--dtau-ns", dtaus_ns, "release-time differences for the phase fit");
    c_analyze->add_option("--storage-time-ns", storage_times_ns,
                          "storage times for the decay fit");
    c_analyze->add_option("--samples", samples_file, "samples file for bootstrap errors");
    c_analyze->add_option("--bootstrap", bootstrap_n, "bootstrap resample count");
    c_analyze->add_flag("--no-loss-correction", no_loss_correction,
                        "skip the loss-corrected amplitude estimate");

    auto* c_pipeline =
        app.add_subcommand("pipeline", "generate | store | measure | reconstruct | analyze");
    add_common(c_pipeline, args);

    auto* c_paper = app.add_subcommand(
        "reproduce-paper", "calibrated storage-time series and release-timing tables");
    add_common(c_paper, args);

    auto* c_envelope =
        app.add_subcommand("envelope", "simulate stored single photons and extract "
                                       "temporal modes per release delay");
    add_common(c_envelope, args);
    c_envelope->add_option("--delays-ns", delays_ns, "release delays")
        ->expected(-1)
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        const ExperimentConfig cfg = load_config(args);
        const std::filesystem::path out_dir = args.out_dir;
        std::filesystem::create_directories(out_dir);

        if (c_generate->parsed()) {
            const auto out = pipeline::generate(cfg, out_dir);
            std::cout << out.string() << "\n";
        } else if (c_store->parsed()) {
            const auto out = pipeline::store(cfg, in_file, out_dir);
            std::cout << out.string() << "\n";
        } else if (c_measure->parsed()) {
            const auto out = pipeline::measure(cfg, in_file, out_dir);
            std::cout << out.string() << "\n";
        } else if (c_reconstruct->parsed()) {
            const auto out = pipeline::reconstruct(cfg, samples_file, out_dir);
            std::cout << out.string() << "\n";
        } else if (c_analyze->parsed()) {
            pipeline::AnalyzeOptions opts;
            for (const auto& f : state_files) opts.state_files.emplace_back(f);
            for (double v : dtaus_ns) opts.dtaus.push_back(v * 1e-9);
            for (double v : storage_times_ns) opts.storage_times.push_back(v * 1e-9);
            if (!samples_file.empty()) opts.samples_file = samples_file;
            opts.bootstrap_resamples = bootstrap_n;
            opts.apply_loss_correction = !no_loss_correction;
            const auto out = pipeline::analyze(cfg, opts, out_dir);
            std::cout << out.string() << "\n";
        } else if (c_pipeline->parsed()) {
            pipeline::run_pipeline(cfg, out_dir);
            std::cout << (out_dir / "report.txt").string() << "\n";
        } else if (c_paper->parsed()) {
            pipeline::reproduce_paper(cfg, out_dir, std::cout);
        } else if (c_envelope->parsed()) {
            std::vector<double> delays;
            for (double v : delays_ns) delays.push_back(v * 1e-9);
            for (const auto& out : pipeline::simulate_envelopes(cfg, delays, out_dir))
                std::cout << out.string() << "\n";
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const DiagnosticsError& e) {
        std::cerr << "numerical diagnostics failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
