#pragma once

#include <Eigen/Dense>

#include <complex>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

#include "dualrail/errors.hpp"

namespace dualrail {

using Complex = std::complex<double>;
using Matrix  = Eigen::MatrixXcd;
using Vector  = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Truncated Fock space
// ---------------------------------------------------------------------------

// Photon-number truncation per mode; single-mode dimension n_max+1.
struct Cutoff {
    int n_max = 3;

    int dim() const { return n_max + 1; }
    int dim2() const { return dim() * dim(); }

    friend bool operator==(Cutoff a, Cutoff b) { return a.n_max == b.n_max; }
};

// Beamsplitter coefficients with |t|^2 + |r|^2 = 1. Heisenberg convention
// (unitary mode map with determinant 1):
//   a -> t a + r b,   b -> -conj(r) a + conj(t) b
struct BeamSplitterParams {
    Complex t{1.0, 0.0};
    Complex r{0.0, 0.0};

    static BeamSplitterParams balanced();
    // real t = sqrt(T), r = sqrt(1-T)
    static BeamSplitterParams from_transmittance(double transmittance);

    // parameters of the inverse unitary
    BeamSplitterParams inverted() const { return {std::conj(t), -r}; }

    bool is_unitary(double tol = 1e-12) const;
    void check(double tol = 1e-12) const; // throws std::invalid_argument
};

// Pure state over n_modes truncated oscillators. Basis order is row-major in
// the occupation tuple: mode 1 is the slowest index. Normalized on
// construction (zero input norm is an error).
class PureState {
public:
    PureState(Cutoff cutoff, int n_modes, Vector amplitudes);

    // |occ[0], occ[1], ...>
    static PureState basis_state(Cutoff cutoff, std::span<const int> occupation);
    static PureState basis_state(Cutoff cutoff, std::initializer_list<int> occupation);

    Cutoff cutoff() const { return cutoff_; }
    int modes() const { return n_modes_; }
    int mode_dim() const { return cutoff_.dim(); }
    Eigen::Index size() const { return amp_.size(); }
    const Vector& amplitudes() const { return amp_; }

    Eigen::Index index(std::span<const int> occupation) const;
    Complex amplitude(std::initializer_list<int> occupation) const;

private:
    Cutoff cutoff_;
    int n_modes_;
    Vector amp_;
};

// Two-mode mixed state on the truncated Fock basis |n1,n2>, n1 slow.
class DensityMatrix {
public:
    DensityMatrix(Cutoff cutoff, Matrix elements);

    static DensityMatrix from_pure(const PureState& psi); // psi must be two-mode
    static DensityMatrix vacuum(Cutoff cutoff);

    Cutoff cutoff() const { return cutoff_; }
    int mode_dim() const { return cutoff_.dim(); }
    Eigen::Index dim() const { return m_.rows(); }
    const Matrix& elements() const { return m_; }

    // <k,l| rho |m,n>
    Complex element(int k, int l, int m, int n) const;

    double trace_real() const { return m_.trace().real(); }

    // Hermitian to herm_tol, trace 1 +- trace_tol, min eigenvalue >= -psd_tol
    bool is_valid(double herm_tol = 1e-10, double trace_tol = 1e-10,
                  double psd_tol = 1e-9) const;
    void check_valid(double herm_tol = 1e-10, double trace_tol = 1e-10,
                     double psd_tol = 1e-9) const; // throws DiagnosticsError

private:
    Cutoff cutoff_;
    Matrix m_;
};

// ---------------------------------------------------------------------------
// Operators
// ---------------------------------------------------------------------------

// single-mode ladder: <n-1| a |n> = sqrt(n)
Matrix single_mode_annihilation(int dim);

// annihilation on the selected mode of the two-mode space, identity on the
// other; mode is 1 or 2
Matrix annihilation_matrix(Cutoff cutoff, int mode);

// two-mode beamsplitter unitary on |n1,n2>; exact exp of the number-conserving
// generator lifted from the 2x2 mode map
Matrix beamsplitter_unitary(Cutoff cutoff, const BeamSplitterParams& bs);

// modes are 1-based positions within the state (defaults: the only two modes)
PureState apply_beamsplitter(const PureState& psi, const BeamSplitterParams& bs,
                             int mode_a = 1, int mode_b = 2);
DensityMatrix apply_beamsplitter(const DensityMatrix& rho, const BeamSplitterParams& bs);

// amplitude of |n1,...> multiplied by exp(i sum_k phi_k n_k)
PureState phase_rotation(const PureState& psi, std::span<const double> phis);
PureState phase_rotation(const PureState& psi, double phi1, double phi2);
DensityMatrix phase_rotation(const DensityMatrix& rho, double phi1, double phi2);

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

double fidelity(const PureState& a, const PureState& b); // |<a|b>|^2
double fidelity(const PureState& psi, const DensityMatrix& rho);
double fidelity(const DensityMatrix& a, const DensityMatrix& b); // Uhlmann

double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

// transpose the indices of one mode; Hermitian output, not necessarily PSD
Matrix partial_transpose(const Matrix& rho, int mode_dim, int mode);
Matrix partial_transpose(const DensityMatrix& rho, int mode);

// reduced single-mode matrix (keep_mode is 1 or 2)
Matrix partial_trace(const DensityMatrix& rho, int keep_mode);

// project onto the span of the listed |n1,n2> states and rescale to trace 1;
// zero projected trace throws DiagnosticsError
DensityMatrix subspace_renormalize(const DensityMatrix& rho,
                                   std::span<const std::pair<int, int>> basis);

double total_photon_number(const PureState& psi);
double total_photon_number(const DensityMatrix& rho);

// 0.5 (A + A^dagger)
Matrix hermitize(const Matrix& a);

} // namespace dualrail
