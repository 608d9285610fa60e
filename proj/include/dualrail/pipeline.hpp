#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "dualrail/analysis.hpp"
#include "dualrail/config.hpp"

namespace dualrail::pipeline {

using std::filesystem::path;

// Stage entry points behind the CLI subcommands. Every stage is a pure
// function of (config, input files, master seed); substream seeds are derived
// by hashing the stage name, and a manifest entry is appended in out_dir.

path generate(const ExperimentConfig& cfg, const path& out_dir);
path store(const ExperimentConfig& cfg, const path& state_file, const path& out_dir);
path measure(const ExperimentConfig& cfg, const path& state_file, const path& out_dir);
path reconstruct(const ExperimentConfig& cfg, const path& samples_file, const path& out_dir);

struct AnalyzeOptions {
    std::vector<path> state_files;
    std::vector<double> dtaus;            // seconds, aligned with state_files
    std::vector<double> storage_times;    // seconds, aligned with state_files
    std::optional<path> samples_file;     // enables bootstrap errors
    int bootstrap_resamples = 0;
    bool apply_loss_correction = true;    // amplitude estimates from config losses
};

path analyze(const ExperimentConfig& cfg, const AnalyzeOptions& opts, const path& out_dir);

// generate | store | measure | reconstruct | analyze
void run_pipeline(const ExperimentConfig& cfg, const path& out_dir);

// Calibrate (eta0 common, sigma) against the first two published negativities,
// then emit the five-point storage series, the four release-timing pairs with
// Wigner origins, and the calibration summary.
struct CalibrationResult {
    double eta0 = 0.0;
    double sigma = 0.0;
    double residual = 0.0; // rms at the two calibration points
    std::vector<double> series; // model E at 0,100,...,400 ns
};

CalibrationResult reproduce_paper(const ExperimentConfig& cfg, const path& out_dir,
                                  std::ostream& log);

// Preliminary single-photon experiment: per release delay, simulate traces of
// a stored single photon and extract the temporal mode by PCA.
std::vector<path> simulate_envelopes(const ExperimentConfig& cfg,
                                     std::span<const double> delays, const path& out_dir);

// model-level (noise-free) state preparation shared by stages and tests
DensityMatrix model_heralded_state(const ExperimentConfig& cfg);
DensityMatrix model_stored_state(const ExperimentConfig& cfg);

} // namespace dualrail::pipeline
