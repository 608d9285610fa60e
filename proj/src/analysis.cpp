#include "dualrail/analysis.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dualrail {

// ---------------------------------------------------------------------------
// Entanglement
// ---------------------------------------------------------------------------

double log_negativity_subspace(const DensityMatrix& rho) {
    static constexpr std::pair<int, int> kSubspace[] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    const DensityMatrix sub = subspace_renormalize(rho, kSubspace);
    const Matrix pt = hermitize(partial_transpose(sub, 2));
    Eigen::SelfAdjointEigenSolver<Matrix> es(pt);
    if (es.info() != Eigen::Success)
        throw DiagnosticsError("partial transpose eigensolve failed");
    double trace_norm = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const double ev = es.eigenvalues()(i);
        trace_norm += std::abs(ev) > 1e-12 ? std::abs(ev) : 0.0;
    }
    return std::log2(trace_norm);
}

// ---------------------------------------------------------------------------
// Wigner function
// ---------------------------------------------------------------------------

namespace {

// associated Laguerre L_m^{(k)}(z)
double laguerre(int m, int k, double z) {
    if (m == 0) return 1.0;
    double lm2 = 1.0;
    double lm1 = 1.0 + k - z;
    for (int j = 2; j <= m; ++j) {
        const double lj = ((2.0 * j - 1.0 + k - z) * lm1 - (j - 1.0 + k) * lm2) / j;
        lm2 = lm1;
        lm1 = lj;
    }
    return lm1;
}

} // namespace

Matrix wigner_kernel(int dim, double x, double p) {
    // K = D(2 alpha) Parity, alpha = (x + i p)/sqrt(2):
    // K_{nm} = (-1)^m sqrt(m!/n!) (2 alpha)^{n-m} e^{-2|alpha|^2} L_m^{(n-m)}(4|alpha|^2)
    // for n >= m, Hermitian completion for n < m.
    const Complex alpha{x / std::sqrt(2.0), p / std::sqrt(2.0)};
    const double a2 = std::norm(alpha);
    const double gauss = std::exp(-2.0 * a2);
    Matrix k(dim, dim);
    for (int n = 0; n < dim; ++n)
        for (int m = 0; m <= n; ++m) {
            double ratio = 1.0; // sqrt(m!/n!)
            for (int j = m + 1; j <= n; ++j) ratio /= std::sqrt(static_cast<double>(j));
            const Complex val = ((m % 2 == 0) ? 1.0 : -1.0) * ratio *
                                std::pow(2.0 * alpha, n - m) * gauss *
                                laguerre(m, n - m, 4.0 * a2);
            k(n, m) = val;
            k(m, n) = std::conj(val); // K is Hermitian
        }
    return k;
}

double wigner_at(const DensityMatrix& rho, double x1, double p1, double x2, double p2) {
    const int d = rho.mode_dim();
    const Matrix k1 = wigner_kernel(d, x1, p1);
    const Matrix k2 = wigner_kernel(d, x2, p2);
    Complex acc{};
    for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l)
            for (int m = 0; m < d; ++m)
                for (int n = 0; n < d; ++n)
                    acc += rho.elements()(k * d + l, m * d + n) * k1(m, k) * k2(n, l);
    return acc.real() / (kPi * kPi);
}

double wigner_origin(const DensityMatrix& rho) { return wigner_at(rho, 0, 0, 0, 0); }

namespace {

// columns indexed by phase-space point, rows by the (k,m) pair of mode
// indices: V[(k,m), pt] = K_pt(m, k)
Matrix kernel_stack(int d, const Eigen::VectorXd& xs, const Eigen::VectorXd& ps) {
    Matrix v(static_cast<Eigen::Index>(d) * d, xs.size() * ps.size());
    Eigen::Index pt = 0;
    for (Eigen::Index i = 0; i < xs.size(); ++i)
        for (Eigen::Index j = 0; j < ps.size(); ++j, ++pt) {
            const Matrix k = wigner_kernel(d, xs(i), ps(j));
            for (int kk = 0; kk < d; ++kk)
                for (int mm = 0; mm < d; ++mm) v(kk * d + mm, pt) = k(mm, kk);
        }
    return v;
}

// rho reshuffled so W = V1^T rho_tilde V2: rho_tilde[(k,m),(l,n)] = rho[(k,l),(m,n)]
Matrix reshuffle(const Matrix& rho, int d) {
    Matrix out(static_cast<Eigen::Index>(d) * d, static_cast<Eigen::Index>(d) * d);
    for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l)
            for (int m = 0; m < d; ++m)
                for (int n = 0; n < d; ++n)
                    out(k * d + m, l * d + n) = rho(k * d + l, m * d + n);
    return out;
}

} // namespace

double Wigner4D::at(int i1, int j1, int i2, int j2) const {
    const auto np = static_cast<Eigen::Index>(ps.size());
    const Eigen::Index pts = xs.size() * np;
    const Eigen::Index a = i1 * np + j1;
    const Eigen::Index b = i2 * np + j2;
    return w[static_cast<std::size_t>(a * pts + b)];
}

Wigner4D wigner(const DensityMatrix& rho, const Eigen::VectorXd& xs,
                const Eigen::VectorXd& ps) {
    if (xs.size() < 1 || ps.size() < 1) throw std::invalid_argument("empty wigner grid");
    const int d = rho.mode_dim();
    const Matrix stack = kernel_stack(d, xs, ps);
    const Matrix shuffled = reshuffle(rho.elements(), d);
    const Eigen::Index pts = xs.size() * ps.size();

    Wigner4D out;
    out.xs = xs;
    out.ps = ps;
    out.w.resize(static_cast<std::size_t>(pts) * pts);

    const Matrix left = stack.transpose() * shuffled; // pts x d^2
    const double scale = 1.0 / (kPi * kPi);
    constexpr Eigen::Index chunk = 256;
    for (Eigen::Index start = 0; start < pts; start += chunk) {
        const Eigen::Index rows = std::min(chunk, pts - start);
        const Eigen::MatrixXd block =
            (left.middleRows(start, rows) * stack).real() * scale;
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < pts; ++c)
                out.w[static_cast<std::size_t>((start + r) * pts + c)] = block(r, c);
    }
    return out;
}

WignerSection wigner_cross_section(const DensityMatrix& rho, const Eigen::VectorXd& xs,
                                   const Eigen::VectorXd& ps) {
    const int d = rho.mode_dim();
    const Matrix shuffled = reshuffle(rho.elements(), d);
    WignerSection section;
    section.xs = xs;
    section.ps = ps;
    section.w.resize(xs.size(), ps.size());
    for (Eigen::Index i = 0; i < xs.size(); ++i)
        for (Eigen::Index j = 0; j < ps.size(); ++j) {
            const Matrix k = wigner_kernel(d, xs(i), ps(j));
            Vector v(static_cast<Eigen::Index>(d) * d);
            for (int kk = 0; kk < d; ++kk)
                for (int mm = 0; mm < d; ++mm) v(kk * d + mm) = k(mm, kk);
            section.w(i, j) = (v.transpose() * shuffled * v)(0).real() / (kPi * kPi);
        }
    return section;
}

// ---------------------------------------------------------------------------
// Estimators
// ---------------------------------------------------------------------------

AmplitudeEstimate estimate_amplitudes(const DensityMatrix& rho, const LossParams& losses) {
    losses.check();
    if (losses.l1 >= 1.0 || losses.l2 >= 1.0)
        throw std::invalid_argument("amplitude estimation needs losses < 1");
    const double d01 = rho.element(0, 1, 0, 1).real();
    const double d10 = rho.element(1, 0, 1, 0).real();
    if (d01 < 0.0 || d10 < 0.0)
        throw std::invalid_argument("one-photon diagonals must be nonnegative");
    AmplitudeEstimate est;
    est.alpha_raw = std::sqrt(d01 / (1.0 - losses.l2));
    est.beta_raw = std::sqrt(d10 / (1.0 - losses.l1));
    const double norm = std::hypot(est.alpha_raw, est.beta_raw);
    if (!(norm > 0.0))
        throw DiagnosticsError("both one-photon diagonals are zero");
    est.alpha = est.alpha_raw / norm;
    est.beta = est.beta_raw / norm;
    return est;
}

double estimate_dephasing(const DensityMatrix& rho) {
    const double d01 = rho.element(0, 1, 0, 1).real();
    const double d10 = rho.element(1, 0, 1, 0).real();
    if (!(d01 > 0.0) || !(d10 > 0.0))
        throw std::invalid_argument("dephasing estimation needs positive one-photon diagonals");
    double ratio = std::abs(rho.element(0, 1, 1, 0)) / std::sqrt(d01 * d10);
    if (ratio > 1.0 + 1e-6)
        throw DiagnosticsError("off-diagonal exceeds the diagonal bound (unphysical input)");
    if (ratio <= 0.0) return std::numeric_limits<double>::infinity();
    ratio = std::min(ratio, 1.0);
    return std::sqrt(-2.0 * std::log(ratio));
}

double fit_phase_rotation_phases(std::span<const std::pair<double, double>> dtau_phase) {
    if (dtau_phase.size() < 3)
        throw std::invalid_argument("phase fit needs at least 3 points");
    std::vector<std::pair<double, double>> pts(dtau_phase.begin(), dtau_phase.end());
    std::sort(pts.begin(), pts.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    // nearest-multiple-of-2pi continuation
    std::vector<double> unwrapped(pts.size());
    unwrapped[0] = pts[0].second;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double shift =
            std::round((unwrapped[i - 1] - pts[i].second) / (2.0 * kPi)) * 2.0 * kPi;
        unwrapped[i] = pts[i].second + shift;
        if (std::abs(unwrapped[i] - unwrapped[i - 1]) >= kPi - 1e-9)
            throw DiagnosticsError("phase unwrap ambiguous (gap >= pi); "
                                   "sample dtau more densely");
    }

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const auto n = static_cast<double>(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        sx += pts[i].first;
        sy += unwrapped[i];
        sxx += pts[i].first * pts[i].first;
        sxy += pts[i].first * unwrapped[i];
    }
    const double denom = n * sxx - sx * sx;
    if (!(std::abs(denom) > 0.0))
        throw std::invalid_argument("phase fit needs distinct dtau values");
    const double slope = (n * sxy - sx * sy) / denom;
    return slope / (2.0 * kPi);
}

double fit_phase_rotation(std::span<const std::pair<double, DensityMatrix>> series) {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(series.size());
    for (const auto& [dtau, rho] : series)
        pts.emplace_back(dtau, std::arg(rho.element(1, 0, 0, 1)));
    return fit_phase_rotation_phases(pts);
}

DecayModel fit_exponential_decay(std::span<const std::pair<double, double>> points) {
    if (points.size() < 2)
        throw std::invalid_argument("decay fit needs at least 2 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [t, fraction] : points) {
        if (!(fraction > 0.0) || fraction > 1.0)
            throw std::invalid_argument("fractions must be in (0,1]");
        const double y = std::log(fraction);
        sx += t;
        sy += y;
        sxx += t * t;
        sxy += t * y;
    }
    const auto n = static_cast<double>(points.size());
    const double denom = n * sxx - sx * sx;
    if (!(std::abs(denom) > 0.0))
        throw std::invalid_argument("decay fit needs distinct times");
    const double slope = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / n;
    if (!(slope < 0.0))
        throw DiagnosticsError("decay fit found a nonnegative rate (no decay in data)");
    return {std::exp(intercept), -1.0 / slope};
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

AnalysisReport analyze_state(const DensityMatrix& rho,
                             const std::optional<LossParams>& losses) {
    AnalysisReport report;
    report.log_negativity_raw = log_negativity_subspace(rho);
    report.log_negativity.value = std::max(report.log_negativity_raw, 0.0);
    report.wigner_origin.value = wigner_origin(rho);
    report.one_photon_weight =
        rho.element(0, 1, 0, 1).real() + rho.element(1, 0, 1, 0).real();
    report.vacuum_weight = rho.element(0, 0, 0, 0).real();
    report.off_diagonal_phase = std::arg(rho.element(1, 0, 0, 1));
    report.off_diagonal_abs = std::abs(rho.element(0, 1, 1, 0));
    if (rho.element(0, 1, 0, 1).real() > 0.0 && rho.element(1, 0, 1, 0).real() > 0.0)
        report.dephasing_sigma = estimate_dephasing(rho);
    if (losses) report.amplitudes = estimate_amplitudes(rho, *losses);
    return report;
}

} // namespace dualrail
