#include "dualrail/source.hpp"

#include <cmath>
#include <stdexcept>

namespace dualrail {

void SourceParams::check() const {
    if (!(std::abs(q1) < 1.0) || !(std::abs(q2) < 1.0))
        throw std::invalid_argument("pump amplitudes must satisfy |q| < 1");
    if (!std::isfinite(theta)) throw std::invalid_argument("theta must be finite");
    bs.check();
    if (cutoff.n_max < 1) throw std::invalid_argument("cutoff: n_max must be >= 1");
}

bool SourceParams::weak_pump() const {
    return std::max(std::abs(q1), std::abs(q2)) <= 0.3;
}

FakeCountParams FakeCountParams::from_rates(double fake_cps, double herald_cps) {
    if (fake_cps < 0.0 || herald_cps < 0.0)
        throw std::invalid_argument("count rates must be nonnegative");
    const double total = fake_cps + herald_cps;
    if (total <= 0.0) throw std::invalid_argument("total count rate must be positive");
    return {fake_cps / total};
}

void FakeCountParams::check() const {
    if (l_fake < 0.0 || l_fake > 1.0)
        throw std::invalid_argument("l_fake must be in [0,1]");
}

PureState initial_state(const SourceParams& p) {
    p.check();
    const int d = p.cutoff.dim();
    const Eigen::Index size = static_cast<Eigen::Index>(d) * d * d * d;
    Vector amp = Vector::Zero(size);
    // |n1>_{s1}|n1>_{i1}|n2>_{s2}|n2>_{i2}, s1 slowest
    for (int n1 = 0; n1 < d; ++n1)
        for (int n2 = 0; n2 < d; ++n2) {
            const Eigen::Index idx = ((static_cast<Eigen::Index>(n1) * d + n1) * d + n2) * d + n2;
            amp(idx) = std::pow(p.q1, n1) * std::pow(p.q2, n2);
        }
    return PureState(p.cutoff, 4, std::move(amp));
}

HeraldResult herald_single_click(const SourceParams& p) {
    p.check();
    const PureState four = initial_state(p);
    const int d = p.cutoff.dim();

    // Combine the idlers with theta on the reflected path. The mode map is
    // chosen so that projecting <0|_{i1}<1|_{i2} leaves exactly
    // t q2 |0,1> + r q1 e^{i theta} |1,0> for real (t, r).
    const BeamSplitterParams effective{std::conj(p.bs.t),
                                       -std::conj(p.bs.r) * std::exp(Complex{0.0, -p.theta})};
    const PureState mixed = apply_beamsplitter(four, effective, 2, 4);

    // project idlers: i1 -> <0|, i2 -> <1|
    Vector signal = Vector::Zero(static_cast<Eigen::Index>(d) * d);
    const Eigen::Index s_i2 = 1;
    const Eigen::Index s_s2 = s_i2 * d;
    const Eigen::Index s_i1 = s_s2 * d;
    const Eigen::Index s_s1 = s_i1 * d;
    for (int n1 = 0; n1 < d; ++n1)
        for (int n2 = 0; n2 < d; ++n2)
            signal(n1 * d + n2) =
                mixed.amplitudes()(n1 * s_s1 + 0 * s_i1 + n2 * s_s2 + 1 * s_i2);

    const double prob = signal.squaredNorm();
    if (!(prob > 0.0))
        throw DiagnosticsError("herald impossible: projected state has zero norm "
                               "(no pump photons reach the detector)");
    return {PureState(p.cutoff, 2, std::move(signal)), prob};
}

DensityMatrix mix_fake_counts(const DensityMatrix& rho, const FakeCountParams& f) {
    f.check();
    Matrix out = (1.0 - f.l_fake) * rho.elements();
    out(0, 0) += f.l_fake;
    return DensityMatrix(rho.cutoff(), std::move(out));
}

PureState dual_rail_state(Cutoff cutoff, double alpha, double beta, double theta) {
    const int d = cutoff.dim();
    Vector amp = Vector::Zero(static_cast<Eigen::Index>(d) * d);
    amp(0 * d + 1) = alpha;
    amp(1 * d + 0) = beta * std::exp(Complex{0.0, theta});
    return PureState(cutoff, 2, std::move(amp));
}

} // namespace dualrail
