#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "dualrail/channels.hpp"
#include "dualrail/source.hpp"
#include "dualrail/tomography.hpp"

namespace dualrail {

struct EnvelopeConfig {
    double gamma = 15.0e6;    // field decay rate, 1/s; support ~400 ns
    double t_start = 40.0e-9; // trigger latency of the electronics
    double t_min = -100.0e-9;
    double dt = 10.0e-9;
    int n_points = 101;

    Eigen::VectorXd times() const;
    void check() const;
};

// Flat key-value configuration; unknown or duplicate keys are errors and the
// seed is mandatory (no wall-clock entropy). See config reference in README.
struct ExperimentConfig {
    std::uint64_t seed = 0;
    SourceParams source;
    FakeCountParams fake{10.0 / 410.0}; // 10 cps fake over ~400 cps herald
    DecayModel decay1{1.0, 1.42e-6};
    DecayModel decay2{1.0, 1.29e-6};
    DephasingParams dephasing;
    ReleaseSchedule release{0.0, 0.0, 2.0 * kPi * 300.0e3};
    TomographyPlan plan;
    EnvelopeConfig envelope;
    int threads = 1;

    static ExperimentConfig from_file(const std::filesystem::path& path);
    static ExperimentConfig from_text(const std::string& text);

    void check() const;
    std::string canonical_text() const;
    std::uint64_t config_hash() const;
    // losses accumulated at the configured release times
    LossParams losses_at_release() const;
};

} // namespace dualrail
