#include "dualrail/homodyne.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace dualrail {

namespace {

constexpr double kSamplerLo = -6.0;
constexpr double kSamplerHi = 6.0;
constexpr int kSamplerPoints = 4001;

double wrap_2pi(double phi) {
    double w = std::fmod(phi, 2.0 * kPi);
    if (w < 0.0) w += 2.0 * kPi;
    return w;
}

// real coefficient matrix of the conditional pdf over mode 2:
// B_{l,n} = Re sum_{k,m} v_k v_m rho_{(k,l),(m,n)}
Eigen::MatrixXd conditional_coefficients(const Matrix& rho, int d, const Eigen::VectorXd& v) {
    Matrix b = Matrix::Zero(d, d);
    for (int k = 0; k < d; ++k)
        for (int m = 0; m < d; ++m) {
            const double w = v(k) * v(m);
            if (w != 0.0) b += w * rho.block(k * d, m * d, d, d);
        }
    return b.real();
}

} // namespace

HomodyneBasis HomodyneBasis::wrapped(double p1, double p2) {
    return {wrap_2pi(p1), wrap_2pi(p2)};
}

QuadratureGrid QuadratureGrid::uniform(double lo, double hi, int n) {
    if (n < 2 || !(hi > lo)) throw std::invalid_argument("bad quadrature grid");
    Eigen::VectorXd xs = Eigen::VectorXd::LinSpaced(n, lo, hi);
    return {xs, xs};
}

Eigen::VectorXd hermite_functions(int n_max, double x) {
    // psi_0 = pi^{-1/4} exp(-x^2/2); psi_n = x sqrt(2/n) psi_{n-1}
    //                                        - sqrt((n-1)/n) psi_{n-2}
    Eigen::VectorXd psi(n_max + 1);
    psi(0) = std::pow(kPi, -0.25) * std::exp(-0.5 * x * x);
    if (n_max >= 1) psi(1) = std::sqrt(2.0) * x * psi(0);
    for (int n = 2; n <= n_max; ++n)
        psi(n) = x * std::sqrt(2.0 / n) * psi(n - 1) -
                 std::sqrt((n - 1.0) / n) * psi(n - 2);
    return psi;
}

Eigen::MatrixXd hermite_table(int n_max, const Eigen::VectorXd& xs) {
    Eigen::MatrixXd t(n_max + 1, xs.size());
    for (Eigen::Index g = 0; g < xs.size(); ++g) t.col(g) = hermite_functions(n_max, xs(g));
    return t;
}

Eigen::MatrixXd quadrature_pdf(const DensityMatrix& rho, const HomodyneBasis& b,
                               const QuadratureGrid& grid) {
    if (grid.x1.size() < 2 || grid.x2.size() < 2)
        throw std::invalid_argument("quadrature grid needs at least two points per axis");
    if (grid.x1.minCoeff() > -5.0 || grid.x1.maxCoeff() < 5.0 ||
        grid.x2.minCoeff() > -5.0 || grid.x2.maxCoeff() < 5.0)
        throw std::invalid_argument("quadrature grid must span [-5,5] on both axes");

    const int d = rho.mode_dim();
    const Matrix rotated = phase_rotation(rho, b.phi1, b.phi2).elements();
    const Eigen::MatrixXd t1 = hermite_table(d - 1, grid.x1);
    const Eigen::MatrixXd t2 = hermite_table(d - 1, grid.x2);

    Eigen::MatrixXd p(grid.x1.size(), grid.x2.size());
    for (Eigen::Index i = 0; i < grid.x1.size(); ++i) {
        const Eigen::MatrixXd bmat = conditional_coefficients(rotated, d, t1.col(i));
        p.row(i) = ((bmat * t2).cwiseProduct(t2)).colwise().sum();
    }

    // trapezoid normalization check
    auto weights = [](const Eigen::VectorXd& xs) {
        Eigen::VectorXd w = Eigen::VectorXd::Zero(xs.size());
        for (Eigen::Index i = 0; i + 1 < xs.size(); ++i) {
            const double h = 0.5 * (xs(i + 1) - xs(i));
            w(i) += h;
            w(i + 1) += h;
        }
        return w;
    };
    const double total = weights(grid.x1).transpose() * p * weights(grid.x2);
    if (std::abs(total - 1.0) > 1e-6)
        throw DiagnosticsError("quadrature pdf does not normalize on the grid "
                               "(grid too coarse or too narrow): integral = " +
                               std::to_string(total));
    return p;
}

double quadrature_pdf_at(const DensityMatrix& rho, const HomodyneBasis& b,
                         double x1, double x2) {
    const int d = rho.mode_dim();
    const Matrix rotated = phase_rotation(rho, b.phi1, b.phi2).elements();
    const Eigen::VectorXd v1 = hermite_functions(d - 1, x1);
    const Eigen::VectorXd v2 = hermite_functions(d - 1, x2);
    const Eigen::MatrixXd bmat = conditional_coefficients(rotated, d, v1);
    return v2.transpose() * bmat * v2;
}

// ---------------------------------------------------------------------------
// QuadratureSampler
// ---------------------------------------------------------------------------

QuadratureSampler::QuadratureSampler(const DensityMatrix& rho, const HomodyneBasis& b)
    : dim_(rho.mode_dim()) {
    rotated_ = phase_rotation(rho, b.phi1, b.phi2).elements();
    grid_ = Eigen::VectorXd::LinSpaced(kSamplerPoints, kSamplerLo, kSamplerHi);
    psi_ = hermite_table(dim_ - 1, grid_);
    const double h = grid_(1) - grid_(0);

    // marginal of x1 from the reduced mode-1 matrix
    Eigen::MatrixXd red1 = Eigen::MatrixXd::Zero(dim_, dim_);
    for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) {
            Complex sum{};
            for (int s = 0; s < dim_; ++s) sum += rotated_(i * dim_ + s, j * dim_ + s);
            red1(i, j) = sum.real();
        }
    Eigen::VectorXd marg = ((red1 * psi_).cwiseProduct(psi_)).colwise().sum();
    marginal_cdf_.resize(kSamplerPoints);
    marginal_cdf_(0) = 0.0;
    for (int g = 1; g < kSamplerPoints; ++g) {
        const double seg = 0.5 * h * (std::max(marg(g - 1), 0.0) + std::max(marg(g), 0.0));
        marginal_cdf_(g) = marginal_cdf_(g - 1) + seg;
    }

    // cumulative trapezoid of psi_l psi_n pairs, for lazy conditional CDFs
    pair_cum_.resize(dim_ * dim_, kSamplerPoints);
    for (int l = 0; l < dim_; ++l)
        for (int n = 0; n < dim_; ++n) {
            const int row = l * dim_ + n;
            pair_cum_(row, 0) = 0.0;
            for (int g = 1; g < kSamplerPoints; ++g) {
                const double f0 = psi_(l, g - 1) * psi_(n, g - 1);
                const double f1 = psi_(l, g) * psi_(n, g);
                pair_cum_(row, g) = pair_cum_(row, g - 1) + 0.5 * h * (f0 + f1);
            }
        }
}

double QuadratureSampler::invert_marginal(double u) const {
    const double target = u * marginal_cdf_(kSamplerPoints - 1);
    int lo = 0, hi = kSamplerPoints - 1;
    while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        (marginal_cdf_(mid) <= target ? lo : hi) = mid;
    }
    const double c0 = marginal_cdf_(lo), c1 = marginal_cdf_(hi);
    const double frac = (c1 > c0) ? (target - c0) / (c1 - c0) : 0.5;
    return grid_(lo) + frac * (grid_(hi) - grid_(lo));
}

double QuadratureSampler::invert_conditional(const Eigen::MatrixXd& b_re, double u) const {
    const Eigen::Map<const Eigen::VectorXd> coeff(b_re.data(),
                                                  static_cast<Eigen::Index>(dim_) * dim_);
    // b_re is symmetric so the (l,n) vs (n,l) storage order does not matter
    auto cdf = [&](int g) { return std::max(coeff.dot(pair_cum_.col(g)), 0.0); };
    const double target = u * cdf(kSamplerPoints - 1);
    int lo = 0, hi = kSamplerPoints - 1;
    while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        (cdf(mid) <= target ? lo : hi) = mid;
    }
    const double c0 = cdf(lo), c1 = cdf(hi);
    const double frac = (c1 > c0) ? (target - c0) / (c1 - c0) : 0.5;
    return grid_(lo) + frac * (grid_(hi) - grid_(lo));
}

std::array<double, 2> QuadratureSampler::draw(Rng& rng) const {
    const double x1 = invert_marginal(rng.next_double());
    const Eigen::VectorXd v1 = hermite_functions(dim_ - 1, x1);
    const Eigen::MatrixXd b = conditional_coefficients(rotated_, dim_, v1);
    const double x2 = invert_conditional(b, rng.next_double());
    return {x1, x2};
}

QuadratureBatch sample_quadratures(const DensityMatrix& rho, const HomodyneBasis& b,
                                   int n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample count must be >= 1");
    QuadratureSampler sampler(rho, b);
    Rng rng(seed);
    QuadratureBatch batch;
    batch.basis = b;
    batch.samples.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) batch.samples.push_back(sampler.draw(rng));
    return batch;
}

std::vector<HomodyneBasis> homodyne_basis_grid(int per_lo) {
    if (per_lo < 1) throw std::invalid_argument("need at least one phase per LO");
    std::vector<HomodyneBasis> bases;
    bases.reserve(static_cast<std::size_t>(per_lo) * per_lo);
    for (int i = 0; i < per_lo; ++i)
        for (int j = 0; j < per_lo; ++j)
            bases.push_back({kPi * i / per_lo, kPi * j / per_lo});
    return bases;
}

// ---------------------------------------------------------------------------
// Envelopes and traces
// ---------------------------------------------------------------------------

double Envelope::dt() const { return times(1) - times(0); }

Envelope Envelope::from_values(Eigen::VectorXd times, Eigen::VectorXd values) {
    if (times.size() != values.size() || times.size() < 2)
        throw std::invalid_argument("envelope needs matching time/value grids");
    const double step = times(1) - times(0);
    if (!(step > 0.0)) throw std::invalid_argument("envelope time grid must increase");
    for (Eigen::Index i = 1; i + 1 < times.size(); ++i)
        if (std::abs((times(i + 1) - times(i)) - step) > 1e-9 * step)
            throw std::invalid_argument("envelope time grid must be uniform");

    const double norm2 = values.squaredNorm() * step;
    if (!(norm2 > 0.0)) throw std::invalid_argument("envelope must have positive norm");
    values /= std::sqrt(norm2);

    Eigen::Index peak = 0;
    values.cwiseAbs().maxCoeff(&peak);
    if (values(peak) < 0.0) values = -values;
    return {std::move(times), std::move(values)};
}

Envelope Envelope::exponential(const Eigen::VectorXd& times, double t_start, double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
    Eigen::VectorXd v(times.size());
    for (Eigen::Index i = 0; i < times.size(); ++i)
        v(i) = times(i) >= t_start ? std::exp(-0.5 * gamma * (times(i) - t_start)) : 0.0;
    return from_values(times, std::move(v));
}

double project_trace(const Eigen::VectorXd& trace, const Envelope& psi) {
    if (trace.size() != psi.values.size())
        throw std::invalid_argument("trace/envelope grid mismatch");
    return psi.values.dot(trace) * psi.dt();
}

TraceEnsemble simulate_traces(const DensityMatrix& rho, const Envelope& env1,
                              const Envelope& env2, std::span<const HomodyneBasis> bases,
                              int n_per_basis, std::uint64_t seed) {
    if (bases.empty()) throw std::invalid_argument("need at least one basis");
    if (n_per_basis < 1) throw std::invalid_argument("need at least one event per basis");
    if (env1.times.size() != env2.times.size() ||
        (env1.times - env2.times).cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument("per-mode envelopes must share the time grid");

    const Eigen::Index len = env1.times.size();
    const double dt = env1.dt();
    const double noise_sd = std::sqrt(0.5 / dt); // vacuum variance per discrete mode

    const Eigen::Index n_events = static_cast<Eigen::Index>(bases.size()) * n_per_basis;
    TraceEnsemble ens;
    ens.times = env1.times;
    ens.x1.resize(n_events, len);
    ens.x2.resize(n_events, len);
    ens.bases.reserve(static_cast<std::size_t>(n_events));

    Eigen::Index row = 0;
    for (std::size_t bi = 0; bi < bases.size(); ++bi) {
        const QuadratureSampler sampler(rho, bases[bi]);
        for (int ev = 0; ev < n_per_basis; ++ev, ++row) {
            Rng rng(Rng::derive(seed, "traces", bi, static_cast<std::uint64_t>(ev)));
            const auto [x1, x2] = sampler.draw(rng);
            for (int mode = 0; mode < 2; ++mode) {
                const Envelope& env = mode == 0 ? env1 : env2;
                Eigen::VectorXd w(len);
                for (Eigen::Index k = 0; k < len; ++k) w(k) = noise_sd * rng.next_gauss();
                const double overlap = env.values.dot(w) * dt;
                w += (((mode == 0) ? x1 : x2) - overlap) * env.values;
                (mode == 0 ? ens.x1 : ens.x2).row(row) = w;
            }
            ens.bases.push_back(bases[bi]);
        }
    }
    return ens;
}

Envelope extract_envelope_pca(const Eigen::MatrixXd& traces, const Eigen::VectorXd& times) {
    if (traces.rows() < 100)
        throw std::invalid_argument("envelope extraction needs at least 100 traces");
    if (traces.cols() != times.size())
        throw std::invalid_argument("trace/grid length mismatch");
    const double dt = times(1) - times(0);

    Eigen::MatrixXd second = (traces.transpose() * traces) / static_cast<double>(traces.rows());
    second -= Eigen::MatrixXd::Identity(times.size(), times.size()) * (0.5 / dt);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(second);
    if (es.info() != Eigen::Success) throw DiagnosticsError("PCA eigensolve failed");
    const Eigen::Index last = es.eigenvalues().size() - 1;
    const double lead = es.eigenvalues()(last);
    const double next = es.eigenvalues()(last - 1);
    // pure vacuum noise fills a Marchenko-Pastur bulk whose (subtracted) upper
    // edge is sigma^2 [(1+sqrt(T/N))^2 - 1]; a real mode must stand above it
    const double aspect = std::sqrt(static_cast<double>(times.size()) / traces.rows());
    const double noise_edge = (0.5 / dt) * ((1.0 + aspect) * (1.0 + aspect) - 1.0);
    if (!(lead > 1.2 * noise_edge) || (lead - next) < 0.01 * lead)
        throw DiagnosticsError("no dominant temporal mode (leading eigenvalue "
                               "degenerate or within the vacuum noise bulk)");

    return Envelope::from_values(times, es.eigenvectors().col(last) / std::sqrt(dt));
}

Envelope extract_envelope_pca(const TraceEnsemble& ensemble, int mode) {
    if (mode != 1 && mode != 2) throw std::invalid_argument("mode must be 1 or 2");
    return extract_envelope_pca(mode == 1 ? ensemble.x1 : ensemble.x2, ensemble.times);
}

} // namespace dualrail
