#pragma once

#include <vector>

#include "dualrail/fock.hpp"

namespace dualrail {

struct LossParams {
    double l1 = 0.0; // loss of mode 1, in [0,1]
    double l2 = 0.0; // loss of mode 2, in [0,1]

    void check() const;
};

// Exponential memory decay eta(t) = eta0 exp(-t/tau).
struct DecayModel {
    double eta0 = 1.0; // base efficiency, in (0,1]
    double tau = 1.0;  // lifetime, seconds

    void check() const;
    double efficiency_at(double t) const; // t >= 0
};

struct DephasingParams {
    double sigma = 0.0; // std dev of the relative phase, radians

    void check() const;
};

struct ReleaseSchedule {
    double t1 = 0.0;          // release time of mode 1, seconds
    double t2 = 0.0;          // release time of mode 2, seconds
    double delta_omega = 0.0; // detuning, rad/s

    void check() const;
    double dtau() const { return t1 - t2; }
};

// Kraus operators of the single-mode pure-loss channel at the given dimension;
// exactly trace preserving at any cutoff.
std::vector<Matrix> loss_kraus(int dim, double loss);

// Linear maps on raw two-mode matrices; exposed so tests can probe complete
// positivity (Choi matrices) and the paper's subspace formulas directly.
Matrix apply_loss_map(const Matrix& rho, int mode_dim, double l1, double l2);
Matrix apply_dephasing_map(const Matrix& rho, int mode_dim, double sigma);

// Per-mode photon loss. Restricted to the one-photon subspace this reproduces
// the closed-form element scalings: populations by (1-L), the |0,1><1,0|
// coherence by sqrt((1-L1)(1-L2)), lost weight accrues to vacuum.
DensityMatrix loss_channel(const DensityMatrix& rho, const LossParams& p);

// Gaussian diffusion of the relative phase, applied as exp(i theta (n1-n2)/2)
// with theta ~ N(0, sigma^2): element ((k,l),(m,n)) is scaled by
// exp(-sigma^2 D^2 / 8), D = (k-l)-(m-n). The |0,1><1,0| coherence picks up
// exp(-sigma^2/2); diagonals are untouched.
DensityMatrix dephasing_channel(const DensityMatrix& rho, const DephasingParams& p);

// phase_rotation with phi_i = delta_omega * t_i; for the dual-rail state the
// |0,1><1,0| coherence rotates by -delta_omega * (t1 - t2)
DensityMatrix detuning_rotation(const DensityMatrix& rho, const ReleaseSchedule& s);

} // namespace dualrail
