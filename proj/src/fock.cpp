#include "dualrail/fock.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace dualrail {

namespace {

void check_cutoff(Cutoff c) {
    if (c.n_max < 1) throw std::invalid_argument("cutoff: n_max must be >= 1");
}

void check_same_cutoff(Cutoff a, Cutoff b) {
    if (!(a == b)) throw std::invalid_argument("cutoff mismatch");
}

} // namespace

// ---------------------------------------------------------------------------
// BeamSplitterParams
// ---------------------------------------------------------------------------

BeamSplitterParams BeamSplitterParams::balanced() {
    const double s = 1.0 / std::sqrt(2.0);
    return {Complex{s, 0.0}, Complex{s, 0.0}};
}

BeamSplitterParams BeamSplitterParams::from_transmittance(double transmittance) {
    if (transmittance < 0.0 || transmittance > 1.0)
        throw std::invalid_argument("beamsplitter transmittance must be in [0,1]");
    return {Complex{std::sqrt(transmittance), 0.0},
            Complex{std::sqrt(1.0 - transmittance), 0.0}};
}

bool BeamSplitterParams::is_unitary(double tol) const {
    return std::abs(std::norm(t) + std::norm(r) - 1.0) <= tol;
}

void BeamSplitterParams::check(double tol) const {
    if (!is_unitary(tol))
        throw std::invalid_argument("beamsplitter: |t|^2 + |r|^2 must be 1");
}

// ---------------------------------------------------------------------------
// PureState
// ---------------------------------------------------------------------------

PureState::PureState(Cutoff cutoff, int n_modes, Vector amplitudes)
    : cutoff_(cutoff), n_modes_(n_modes), amp_(std::move(amplitudes)) {
    check_cutoff(cutoff_);
    if (n_modes_ < 1) throw std::invalid_argument("state needs at least one mode");
    Eigen::Index expected = 1;
    for (int k = 0; k < n_modes_; ++k) expected *= cutoff_.dim();
    if (amp_.size() != expected)
        throw std::invalid_argument("amplitude vector size does not match cutoff/modes");
    const double nrm = amp_.norm();
    if (!(nrm > 0.0) || !std::isfinite(nrm))
        throw std::invalid_argument("state norm must be positive and finite");
    amp_ /= nrm;
}

PureState PureState::basis_state(Cutoff cutoff, std::span<const int> occupation) {
    check_cutoff(cutoff);
    const int d = cutoff.dim();
    Eigen::Index size = 1, idx = 0;
    for (int n : occupation) {
        if (n < 0 || n >= d) throw std::invalid_argument("occupation exceeds cutoff");
        idx = idx * d + n;
        size *= d;
    }
    Vector amp = Vector::Zero(size);
    amp(idx) = 1.0;
    return PureState(cutoff, static_cast<int>(occupation.size()), std::move(amp));
}

PureState PureState::basis_state(Cutoff cutoff, std::initializer_list<int> occupation) {
    return basis_state(cutoff, std::span<const int>(occupation.begin(), occupation.size()));
}

Eigen::Index PureState::index(std::span<const int> occupation) const {
    if (static_cast<int>(occupation.size()) != n_modes_)
        throw std::invalid_argument("occupation length != mode count");
    const int d = cutoff_.dim();
    Eigen::Index idx = 0;
    for (int n : occupation) {
        if (n < 0 || n >= d) throw std::invalid_argument("occupation exceeds cutoff");
        idx = idx * d + n;
    }
    return idx;
}

Complex PureState::amplitude(std::initializer_list<int> occupation) const {
    return amp_(index(std::span<const int>(occupation.begin(), occupation.size())));
}

// ---------------------------------------------------------------------------
// DensityMatrix
// ---------------------------------------------------------------------------

DensityMatrix::DensityMatrix(Cutoff cutoff, Matrix elements)
    : cutoff_(cutoff), m_(std::move(elements)) {
    check_cutoff(cutoff_);
    if (m_.rows() != cutoff_.dim2() || m_.cols() != cutoff_.dim2())
        throw std::invalid_argument("density matrix size does not match cutoff");
}

DensityMatrix DensityMatrix::from_pure(const PureState& psi) {
    if (psi.modes() != 2)
        throw std::invalid_argument("density matrix requires a two-mode state");
    const Vector& a = psi.amplitudes();
    return DensityMatrix(psi.cutoff(), a * a.adjoint());
}

DensityMatrix DensityMatrix::vacuum(Cutoff cutoff) {
    check_cutoff(cutoff);
    Matrix m = Matrix::Zero(cutoff.dim2(), cutoff.dim2());
    m(0, 0) = 1.0;
    return DensityMatrix(cutoff, std::move(m));
}

Complex DensityMatrix::element(int k, int l, int m, int n) const {
    const int d = cutoff_.dim();
    if (k < 0 || l < 0 || m < 0 || n < 0 || k >= d || l >= d || m >= d || n >= d)
        throw std::invalid_argument("fock index exceeds cutoff");
    return m_(k * d + l, m * d + n);
}

bool DensityMatrix::is_valid(double herm_tol, double trace_tol, double psd_tol) const {
    if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > herm_tol) return false;
    if (std::abs(m_.trace().real() - 1.0) > trace_tol) return false;
    if (std::abs(m_.trace().imag()) > trace_tol) return false;
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(m_));
    if (es.info() != Eigen::Success) return false;
    return es.eigenvalues().minCoeff() >= -psd_tol;
}

void DensityMatrix::check_valid(double herm_tol, double trace_tol, double psd_tol) const {
    if (!is_valid(herm_tol, trace_tol, psd_tol))
        throw DiagnosticsError("density matrix failed validity check "
                               "(hermiticity / trace / positivity)");
}

// ---------------------------------------------------------------------------
// Operators
// ---------------------------------------------------------------------------

Matrix single_mode_annihilation(int dim) {
    if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
    Matrix a = Matrix::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

Matrix annihilation_matrix(Cutoff cutoff, int mode) {
    check_cutoff(cutoff);
    if (mode != 1 && mode != 2) throw std::invalid_argument("mode must be 1 or 2");
    const int d = cutoff.dim();
    const Matrix a = single_mode_annihilation(d);
    const Matrix id = Matrix::Identity(d, d);
    Matrix out = Matrix::Zero(d * d, d * d);
    // kron(a, I) for mode 1, kron(I, a) for mode 2 (mode 1 is the slow index)
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            const Complex left = (mode == 1) ? a(i, j) : id(i, j);
            if (left == Complex{}) continue;
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l) {
                    const Complex right = (mode == 1) ? id(k, l) : a(k, l);
                    if (right != Complex{}) out(i * d + k, j * d + l) = left * right;
                }
        }
    return out;
}

Matrix beamsplitter_unitary(Cutoff cutoff, const BeamSplitterParams& bs) {
    check_cutoff(cutoff);
    bs.check();
    const int d = cutoff.dim();

    // 2x2 mode map M = [[t, r], [-conj(r), conj(t)]] = exp(iA), A Hermitian
    Eigen::Matrix2cd m;
    m << bs.t, bs.r, -std::conj(bs.r), std::conj(bs.t);
    Eigen::ComplexEigenSolver<Eigen::Matrix2cd> ces(m);
    if (ces.info() != Eigen::Success)
        throw DiagnosticsError("beamsplitter mode-map eigensolve failed");
    Eigen::Vector2cd lambda;
    lambda(0) = std::arg(ces.eigenvalues()(0));
    lambda(1) = std::arg(ces.eigenvalues()(1));
    const Eigen::Matrix2cd v = ces.eigenvectors();
    const Eigen::Matrix2cd a2 = v * lambda.asDiagonal() * v.adjoint();

    // lift: H = sum_jk A_jk a_j^dag a_k, then U = exp(iH)
    const Matrix a = single_mode_annihilation(d);
    const Matrix ad = a.adjoint();
    const Matrix id = Matrix::Identity(d, d);
    auto kron = [d](const Matrix& x, const Matrix& y) {
        Matrix k(d * d, d * d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) k.block(i * d, j * d, d, d) = x(i, j) * y;
        return k;
    };
    Matrix h = a2(0, 0) * kron(ad * a, id) + a2(0, 1) * kron(ad, a) +
               a2(1, 0) * kron(a, ad) + a2(1, 1) * kron(id, ad * a);

    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(h));
    if (es.info() != Eigen::Success)
        throw DiagnosticsError("beamsplitter generator eigensolve failed");
    Vector phases(es.eigenvalues().size());
    for (Eigen::Index i = 0; i < phases.size(); ++i)
        phases(i) = std::exp(Complex{0.0, es.eigenvalues()(i)});
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

PureState apply_beamsplitter(const PureState& psi, const BeamSplitterParams& bs,
                             int mode_a, int mode_b) {
    const int modes = psi.modes();
    if (mode_a < 1 || mode_b < 1 || mode_a > modes || mode_b > modes || mode_a == mode_b)
        throw std::invalid_argument("beamsplitter mode indices out of range");
    const int d = psi.mode_dim();
    const Matrix u = beamsplitter_unitary(psi.cutoff(), bs);

    // strides of the two acted-on modes; iterate spectator configurations
    Eigen::Index stride_a = 1, stride_b = 1;
    for (int k = mode_a; k < modes; ++k) stride_a *= d;
    for (int k = mode_b; k < modes; ++k) stride_b *= d;

    Vector out = psi.amplitudes();
    const Eigen::Index total = out.size();
    Vector block(d * d), mixed(d * d);
    std::vector<Eigen::Index> bases;
    for (Eigen::Index idx = 0; idx < total; ++idx) {
        const int na = static_cast<int>((idx / stride_a) % d);
        const int nb = static_cast<int>((idx / stride_b) % d);
        if (na != 0 || nb != 0) continue;
        bases.push_back(idx);
    }
    for (Eigen::Index base : bases) {
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                block(i * d + j) = out(base + i * stride_a + j * stride_b);
        mixed.noalias() = u * block;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                out(base + i * stride_a + j * stride_b) = mixed(i * d + j);
    }
    return PureState(psi.cutoff(), modes, std::move(out));
}

DensityMatrix apply_beamsplitter(const DensityMatrix& rho, const BeamSplitterParams& bs) {
    const Matrix u = beamsplitter_unitary(rho.cutoff(), bs);
    return DensityMatrix(rho.cutoff(), u * rho.elements() * u.adjoint());
}

PureState phase_rotation(const PureState& psi, std::span<const double> phis) {
    if (static_cast<int>(phis.size()) != psi.modes())
        throw std::invalid_argument("one phase per mode required");
    const int d = psi.mode_dim();
    Vector out = psi.amplitudes();
    for (Eigen::Index idx = 0; idx < out.size(); ++idx) {
        double phase = 0.0;
        Eigen::Index rest = idx;
        for (int k = psi.modes() - 1; k >= 0; --k) {
            phase += phis[static_cast<std::size_t>(k)] * static_cast<double>(rest % d);
            rest /= d;
        }
        out(idx) *= std::exp(Complex{0.0, phase});
    }
    return PureState(psi.cutoff(), psi.modes(), std::move(out));
}

PureState phase_rotation(const PureState& psi, double phi1, double phi2) {
    const double phis[2] = {phi1, phi2};
    return phase_rotation(psi, std::span<const double>(phis, 2));
}

DensityMatrix phase_rotation(const DensityMatrix& rho, double phi1, double phi2) {
    const int d = rho.mode_dim();
    Vector diag(rho.dim());
    for (int n1 = 0; n1 < d; ++n1)
        for (int n2 = 0; n2 < d; ++n2)
            diag(n1 * d + n2) = std::exp(Complex{0.0, phi1 * n1 + phi2 * n2});
    return DensityMatrix(rho.cutoff(),
                         diag.asDiagonal() * rho.elements() * diag.conjugate().asDiagonal());
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

double fidelity(const PureState& a, const PureState& b) {
    check_same_cutoff(a.cutoff(), b.cutoff());
    if (a.modes() != b.modes()) throw std::invalid_argument("mode count mismatch");
    return std::norm(a.amplitudes().dot(b.amplitudes()));
}

double fidelity(const PureState& psi, const DensityMatrix& rho) {
    check_same_cutoff(psi.cutoff(), rho.cutoff());
    if (psi.modes() != 2) throw std::invalid_argument("two-mode state required");
    return (psi.amplitudes().adjoint() * rho.elements() * psi.amplitudes())(0).real();
}

namespace {

Matrix sqrt_psd(const Matrix& h, double tol = 1e-12) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(h));
    if (es.info() != Eigen::Success) throw DiagnosticsError("sqrt_psd eigensolve failed");
    Eigen::VectorXd d = es.eigenvalues();
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = d(i) > tol ? std::sqrt(d(i)) : 0.0;
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
}

} // namespace

double fidelity(const DensityMatrix& a, const DensityMatrix& b) {
    check_same_cutoff(a.cutoff(), b.cutoff());
    // Uhlmann: (tr sqrt(sqrt(a) b sqrt(a)))^2
    const Matrix sa = sqrt_psd(a.elements());
    const double t = sqrt_psd(sa * b.elements() * sa).trace().real();
    return t * t;
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
    check_same_cutoff(a.cutoff(), b.cutoff());
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(a.elements() - b.elements()));
    if (es.info() != Eigen::Success)
        throw DiagnosticsError("trace_distance eigensolve failed");
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

Matrix partial_transpose(const Matrix& rho, int mode_dim, int mode) {
    if (mode != 1 && mode != 2) throw std::invalid_argument("mode must be 1 or 2");
    const int d = mode_dim;
    if (rho.rows() != d * d || rho.cols() != d * d)
        throw std::invalid_argument("matrix size does not match mode dimension");
    Matrix out(d * d, d * d);
    for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l)
            for (int m = 0; m < d; ++m)
                for (int n = 0; n < d; ++n) {
                    // T_1 swaps k<->m, T_2 swaps l<->n
                    if (mode == 1)
                        out(m * d + l, k * d + n) = rho(k * d + l, m * d + n);
                    else
                        out(k * d + n, m * d + l) = rho(k * d + l, m * d + n);
                }
    return out;
}

Matrix partial_transpose(const DensityMatrix& rho, int mode) {
    return partial_transpose(rho.elements(), rho.mode_dim(), mode);
}

Matrix partial_trace(const DensityMatrix& rho, int keep_mode) {
    if (keep_mode != 1 && keep_mode != 2)
        throw std::invalid_argument("mode must be 1 or 2");
    const int d = rho.mode_dim();
    Matrix out = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            Complex sum{};
            for (int s = 0; s < d; ++s)
                sum += (keep_mode == 1) ? rho.elements()(i * d + s, j * d + s)
                                        : rho.elements()(s * d + i, s * d + j);
            out(i, j) = sum;
        }
    return out;
}

DensityMatrix subspace_renormalize(const DensityMatrix& rho,
                                   std::span<const std::pair<int, int>> basis) {
    if (basis.empty()) throw std::invalid_argument("basis set must be nonempty");
    const int d = rho.mode_dim();
    Matrix out = Matrix::Zero(rho.dim(), rho.dim());
    for (const auto& [k, l] : basis) {
        if (k < 0 || l < 0 || k >= d || l >= d)
            throw std::invalid_argument("basis state exceeds cutoff");
        for (const auto& [m, n] : basis)
            out(k * d + l, m * d + n) = rho.elements()(k * d + l, m * d + n);
    }
    const double tr = out.trace().real();
    if (!(tr > 0.0))
        throw DiagnosticsError("subspace projection has zero trace (degenerate input)");
    return DensityMatrix(rho.cutoff(), out / tr);
}

double total_photon_number(const PureState& psi) {
    const int d = psi.mode_dim();
    double total = 0.0;
    for (Eigen::Index idx = 0; idx < psi.size(); ++idx) {
        Eigen::Index rest = idx;
        int n = 0;
        for (int k = 0; k < psi.modes(); ++k) {
            n += static_cast<int>(rest % d);
            rest /= d;
        }
        total += n * std::norm(psi.amplitudes()(idx));
    }
    return total;
}

double total_photon_number(const DensityMatrix& rho) {
    const int d = rho.mode_dim();
    double total = 0.0;
    for (int n1 = 0; n1 < d; ++n1)
        for (int n2 = 0; n2 < d; ++n2)
            total += (n1 + n2) * rho.elements()(n1 * d + n2, n1 * d + n2).real();
    return total;
}

Matrix hermitize(const Matrix& a) { return 0.5 * (a + a.adjoint()); }

} // namespace dualrail
