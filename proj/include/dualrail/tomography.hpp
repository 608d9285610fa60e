#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "dualrail/fock.hpp"
#include "dualrail/homodyne.hpp"

namespace dualrail {

struct TomographyPlan {
    std::vector<HomodyneBasis> bases = homodyne_basis_grid();
    int samples_per_basis = 3000;
    Cutoff cutoff{3};
    int max_iterations = 2000;
    double convergence_tol = 1e-6; // trace-norm of the iterate update

    void check() const;
};

// rank-one factor u with Pi = u u^dag:
// u_{(k,l)} = e^{-i(phi1 k + phi2 l)} psi_k(x1) psi_l(x2)
Vector povm_vector(double x1, double x2, const HomodyneBasis& b, Cutoff cutoff);
Matrix povm_element(double x1, double x2, const HomodyneBasis& b, Cutoff cutoff);

struct MleDiagnostics {
    int iterations = 0;
    bool converged = false;
    double final_update_norm = 0.0;
    std::vector<double> log_likelihood; // mean log p per iteration
    std::vector<std::string> warnings;
};

struct MleResult {
    DensityMatrix rho;
    MleDiagnostics diagnostics;
};

// Unbinned RrhoR expectation-maximization: rho <- N[R rho R] with
// R = sum_k Pi_k / p_k(rho). Iterates stay Hermitian, PSD, unit trace;
// automatically switches to the diluted update (damping 0.5) if the
// likelihood ever decreases. Non-convergence is flagged in diagnostics;
// empty data is fatal.
MleResult mle_reconstruct(std::span<const QuadratureBatch> data, const TomographyPlan& plan,
                          const DensityMatrix* warm_start = nullptr);

// Bootstrap over heralding events: resample with replacement within each
// basis, rerun the reconstruction and the caller's metrics, return the
// standard deviation per metric across resamples.
using MetricFn = std::function<std::map<std::string, double>(const DensityMatrix&)>;

struct BootstrapResult {
    std::map<std::string, double> std_errors;
    std::map<std::string, double> means;
    int resamples = 0;
};

BootstrapResult bootstrap(std::span<const QuadratureBatch> data, const TomographyPlan& plan,
                          int resamples, std::uint64_t seed, const MetricFn& metrics,
                          const DensityMatrix* warm_start = nullptr);

} // namespace dualrail
