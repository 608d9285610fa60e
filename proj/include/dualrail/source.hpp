#pragma once

#include "dualrail/fock.hpp"

namespace dualrail {

// Two-NOPO source. q1, q2 are the effective pump amplitudes; theta is the
// phase locked between the idler paths at the combining beamsplitter.
struct SourceParams {
    double q1 = 0.1;
    double q2 = 0.1;
    double theta = 0.0;
    BeamSplitterParams bs = BeamSplitterParams::balanced();
    Cutoff cutoff{3};

    void check() const;      // throws std::invalid_argument on |q| >= 1
    bool weak_pump() const;  // max(|q1|,|q2|) <= 0.3, advisory only
};

struct FakeCountParams {
    double l_fake = 0.0; // vacuum mixing weight in [0,1]

    static FakeCountParams from_rates(double fake_cps, double herald_cps);
    void check() const;
};

struct HeraldResult {
    PureState state;    // two signal modes (s1, s2)
    double herald_prob; // squared norm of the projected state
};

// Four-mode NOPO output over (s1, i1, s2, i2): amplitudes q1^n1 q2^n2 on
// |n1, n1, n2, n2>, normalized.
PureState initial_state(const SourceParams& p);

// Combine the idlers on the beamsplitter (theta on the reflected path),
// project the detected port onto <1| and the other onto <0|. For real (t, r)
// the heralded state is exactly
//     (t q2 |0,1> + r q1 e^{i theta} |1,0>) / norm
// zero projected norm (q1 = q2 = 0) throws DiagnosticsError.
HeraldResult herald_single_click(const SourceParams& p);

// (1 - l_fake) rho + l_fake |0,0><0,0|
DensityMatrix mix_fake_counts(const DensityMatrix& rho, const FakeCountParams& f);

// alpha |0,1> + beta e^{i theta} |1,0>, normalized; convenience for tests and
// target states
PureState dual_rail_state(Cutoff cutoff, double alpha, double beta, double theta);

} // namespace dualrail
