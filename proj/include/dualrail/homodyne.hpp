#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "dualrail/fock.hpp"
#include "dualrail/rng.hpp"

namespace dualrail {

// Quadrature convention: x = (a + a^dag)/sqrt(2), vacuum variance 1/2,
// <x|n> = H_n(x) exp(-x^2/2) / sqrt(2^n n! sqrt(pi)).

// Local-oscillator phase pair, stored modulo 2 pi.
struct HomodyneBasis {
    double phi1 = 0.0;
    double phi2 = 0.0;

    static HomodyneBasis wrapped(double p1, double p2);
};

struct QuadratureBatch {
    HomodyneBasis basis;
    std::vector<std::array<double, 2>> samples; // (x1, x2)
};

struct QuadratureGrid {
    Eigen::VectorXd x1;
    Eigen::VectorXd x2;

    static QuadratureGrid uniform(double lo, double hi, int n);
};

// psi_0(x) .. psi_{n_max}(x)
Eigen::VectorXd hermite_functions(int n_max, double x);
// rows n, columns grid points
Eigen::MatrixXd hermite_table(int n_max, const Eigen::VectorXd& xs);

// p(x1,x2) = <x1,x2| R rho R^dag |x1,x2>, R = exp(i(phi1 n1 + phi2 n2)).
// The grid must span [-5,5] on both axes; the result must integrate to
// 1 +- 1e-6 (trapezoid) or a DiagnosticsError is thrown.
Eigen::MatrixXd quadrature_pdf(const DensityMatrix& rho, const HomodyneBasis& b,
                               const QuadratureGrid& grid);
double quadrature_pdf_at(const DensityMatrix& rho, const HomodyneBasis& b,
                         double x1, double x2);

// Exact inverse-CDF sampler: x1 from the reduced-state marginal, then x2 from
// the conditional, both tabulated on x in [-6,6] with 4001 points and linear
// interpolation. Deterministic for a fixed stream.
class QuadratureSampler {
public:
    QuadratureSampler(const DensityMatrix& rho, const HomodyneBasis& b);

    std::array<double, 2> draw(Rng& rng) const;

private:
    int dim_;                      // per-mode
    Matrix rotated_;               // R rho R^dag
    Eigen::MatrixXd psi_;          // hermite table on the master grid
    Eigen::VectorXd grid_;         // master x grid
    Eigen::VectorXd marginal_cdf_; // mode-1 marginal, cumulative trapezoid
    Eigen::MatrixXd pair_cum_;     // cumulative trapezoid of psi_l psi_n, (d*d) x G

    double invert_marginal(double u) const;
    double invert_conditional(const Eigen::MatrixXd& b_re, double u) const;
};

QuadratureBatch sample_quadratures(const DensityMatrix& rho, const HomodyneBasis& b,
                                   int n, std::uint64_t seed);

// 7x7 grid of LO phases, each equally spaced in [0, pi)
std::vector<HomodyneBasis> homodyne_basis_grid(int per_lo = 7);

// ---------------------------------------------------------------------------
// Temporal modes
// ---------------------------------------------------------------------------

// Discretized wave-packet Psi(t) on a uniform grid; unit L2 norm
// (sum Psi^2 dt = 1), sign fixed so the maximum-magnitude sample is positive.
struct Envelope {
    Eigen::VectorXd times;
    Eigen::VectorXd values;

    double dt() const;

    // normalizes and fixes the sign; throws on zero norm or non-uniform grid
    static Envelope from_values(Eigen::VectorXd times, Eigen::VectorXd values);
    // Psi(t) ~ step(t - t_start) exp(-gamma (t - t_start)/2)
    static Envelope exponential(const Eigen::VectorXd& times, double t_start, double gamma);
};

// sum Psi(t) x(t) dt; grids must match in size
double project_trace(const Eigen::VectorXd& trace, const Envelope& psi);

// Raw homodyne traces, one row per heralding event, with the event's LO basis.
struct TraceEnsemble {
    Eigen::VectorXd times;
    Eigen::MatrixXd x1; // rows = events
    Eigen::MatrixXd x2;
    std::vector<HomodyneBasis> bases; // per event
};

// Each trace is Psi_m(t) x_m + vacuum noise in the orthogonal complement
// (white noise of per-sample variance 1/(2 dt), its Psi component replaced by
// the signal quadrature); project_trace recovers x_m exactly.
TraceEnsemble simulate_traces(const DensityMatrix& rho, const Envelope& env1,
                              const Envelope& env2, std::span<const HomodyneBasis> bases,
                              int n_per_basis, std::uint64_t seed);

// Principal component of the vacuum-subtracted second-moment matrix of the
// selected mode's traces. Needs >= 100 traces; a leading-eigenvalue gap below
// 1% of the leading eigenvalue throws DiagnosticsError (no dominant mode).
Envelope extract_envelope_pca(const Eigen::MatrixXd& traces, const Eigen::VectorXd& times);
Envelope extract_envelope_pca(const TraceEnsemble& ensemble, int mode = 1);

} // namespace dualrail
