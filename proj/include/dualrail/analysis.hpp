#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "dualrail/channels.hpp"
#include "dualrail/fock.hpp"

namespace dualrail {

struct ValueWithError {
    double value = 0.0;
    double error = 0.0;
};

// ---------------------------------------------------------------------------
// Entanglement
// ---------------------------------------------------------------------------

// log2 of the trace norm of the partial transpose, computed in the
// renormalized subspace {|0,0>,|0,1>,|1,0>,|1,1>}; a lower bound on the
// full-space value. Raw eigensolver output, clamp at the caller if needed.
double log_negativity_subspace(const DensityMatrix& rho);

// ---------------------------------------------------------------------------
// Wigner function, convention integral W = 1; W_vac(0,0) = 1/pi per mode
// ---------------------------------------------------------------------------

// single-mode displaced-parity kernel K(x,p): W = (1/pi) tr[rho K]
Matrix wigner_kernel(int dim, double x, double p);

struct WignerSection {
    Eigen::VectorXd xs;
    Eigen::VectorXd ps;
    Eigen::MatrixXd w; // rows follow xs, columns ps
};

// full two-mode W(x1,p1,x2,p2), row-major over (x1,p1,x2,p2) with every axis
// on the same grid pair
struct Wigner4D {
    Eigen::VectorXd xs;
    Eigen::VectorXd ps;
    std::vector<double> w;

    double at(int i1, int j1, int i2, int j2) const;
};

Wigner4D wigner(const DensityMatrix& rho, const Eigen::VectorXd& xs,
                const Eigen::VectorXd& ps);
// diagonal slice W(X, P, X, P)
WignerSection wigner_cross_section(const DensityMatrix& rho, const Eigen::VectorXd& xs,
                                   const Eigen::VectorXd& ps);
double wigner_at(const DensityMatrix& rho, double x1, double p1, double x2, double p2);
double wigner_origin(const DensityMatrix& rho); // W(0,0,0,0)

// ---------------------------------------------------------------------------
// Estimators
// ---------------------------------------------------------------------------

struct AmplitudeEstimate {
    double alpha = 0.0;     // normalized, alpha^2 + beta^2 = 1
    double beta = 0.0;
    double alpha_raw = 0.0; // sqrt(rho_{01,01} / (1-l2)) before normalization
    double beta_raw = 0.0;  // sqrt(rho_{10,10} / (1-l1))
};

// Loss-correct the one-photon diagonals: the |0,1> photon lives in mode 2 and
// is undone by 1/(1-l2), the |1,0> photon by 1/(1-l1). Exact inverse of
// loss_channel on dual-rail inputs.
AmplitudeEstimate estimate_amplitudes(const DensityMatrix& rho, const LossParams& losses);

// sigma = sqrt(-2 ln r), r = |rho_{01,10}| / sqrt(rho_{01,01} rho_{10,10}).
// r > 1 + 1e-6 throws DiagnosticsError (unphysical); r <= 0 returns +inf.
double estimate_dephasing(const DensityMatrix& rho);

// Unwrap arg(rho_{10,01}) over the series and least-squares fit
// phase = 2 pi f dtau + c. A successive unwrapped gap of magnitude >= pi is
// ambiguous and throws DiagnosticsError (sample dtau more densely).
double fit_phase_rotation(std::span<const std::pair<double, DensityMatrix>> series);
double fit_phase_rotation_phases(std::span<const std::pair<double, double>> dtau_phase);

// least squares on ln(fraction) = ln(eta0) - t/tau
DecayModel fit_exponential_decay(std::span<const std::pair<double, double>> points);

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

struct AnalysisReport {
    ValueWithError log_negativity;  // clamped at 0
    double log_negativity_raw = 0.0;
    ValueWithError wigner_origin;
    double one_photon_weight = 0.0; // rho_{01,01} + rho_{10,10}
    double vacuum_weight = 0.0;
    std::optional<double> dephasing_sigma; // radians; absent without one-photon support
    double off_diagonal_phase = 0.0;       // arg rho_{10,01}
    double off_diagonal_abs = 0.0;         // |rho_{01,10}|
    std::optional<AmplitudeEstimate> amplitudes;
    std::optional<double> rotation_frequency_hz;
};

AnalysisReport analyze_state(const DensityMatrix& rho,
                             const std::optional<LossParams>& losses = std::nullopt);

} // namespace dualrail
