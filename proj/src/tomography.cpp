#include "dualrail/tomography.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <set>
#include <stdexcept>

namespace dualrail {

void TomographyPlan::check() const {
    if (bases.empty()) throw std::invalid_argument("tomography plan needs bases");
    if (cutoff.n_max < 1) throw std::invalid_argument("cutoff: n_max must be >= 1");
    if (samples_per_basis < 1) throw std::invalid_argument("samples_per_basis must be >= 1");
    if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
    if (!(convergence_tol > 0.0)) throw std::invalid_argument("convergence_tol must be > 0");
}

Vector povm_vector(double x1, double x2, const HomodyneBasis& b, Cutoff cutoff) {
    if (!std::isfinite(x1) || !std::isfinite(x2))
        throw std::invalid_argument("quadrature values must be finite");
    const int d = cutoff.dim();
    const Eigen::VectorXd p1 = hermite_functions(d - 1, x1);
    const Eigen::VectorXd p2 = hermite_functions(d - 1, x2);
    Vector u(static_cast<Eigen::Index>(d) * d);
    for (int k = 0; k < d; ++k) {
        const Complex e1 = std::exp(Complex{0.0, -b.phi1 * k}) * p1(k);
        for (int l = 0; l < d; ++l)
            u(k * d + l) = e1 * std::exp(Complex{0.0, -b.phi2 * l}) * p2(l);
    }
    return u;
}

Matrix povm_element(double x1, double x2, const HomodyneBasis& b, Cutoff cutoff) {
    const Vector u = povm_vector(x1, x2, b, cutoff);
    return u * u.adjoint();
}

namespace {

double trace_norm_hermitian(const Matrix& h) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    if (es.info() != Eigen::Success)
        throw DiagnosticsError("trace norm eigensolve failed");
    return es.eigenvalues().cwiseAbs().sum();
}

} // namespace

MleResult mle_reconstruct(std::span<const QuadratureBatch> data, const TomographyPlan& plan,
                          const DensityMatrix* warm_start) {
    plan.check();
    if (data.empty()) throw std::invalid_argument("tomography data is empty");

    std::set<std::pair<double, double>> distinct;
    Eigen::Index n_total = 0;
    for (const auto& batch : data) {
        distinct.insert({batch.basis.phi1, batch.basis.phi2});
        n_total += static_cast<Eigen::Index>(batch.samples.size());
    }
    if (distinct.size() < 2)
        throw std::invalid_argument("tomography needs at least 2 distinct bases");
    if (n_total == 0) throw std::invalid_argument("tomography data is empty");

    const Eigen::Index dim = plan.cutoff.dim2();
    MleDiagnostics diag;
    if (n_total < 10 * dim * dim)
        diag.warnings.push_back("fewer than 10 x dim^2 samples; reconstruction may be noisy");

    // stack the rank-one POVM factors as columns
    Matrix factors(dim, n_total);
    Eigen::Index col = 0;
    for (const auto& batch : data)
        for (const auto& s : batch.samples)
            factors.col(col++) = povm_vector(s[0], s[1], batch.basis, plan.cutoff);

    Matrix rho = Matrix::Identity(dim, dim) / static_cast<double>(dim);
    if (warm_start != nullptr) {
        if (!(warm_start->cutoff() == plan.cutoff))
            throw std::invalid_argument("warm start cutoff mismatch");
        rho = warm_start->elements();
        // keep strictly positive support so no probability can start at zero
        rho = 0.99 * rho + 0.01 * Matrix::Identity(dim, dim) / static_cast<double>(dim);
    }

    const double inv_n = 1.0 / static_cast<double>(n_total);
    bool diluted = false;

    auto log_likelihood = [&](const Matrix& state) {
        const Matrix state_factors = state * factors;
        Eigen::ArrayXd probs =
            (factors.conjugate().cwiseProduct(state_factors)).colwise().sum().real().transpose();
        probs = probs.max(1e-300);
        return probs.log().sum() * inv_n;
    };

    // one RrhoR step; returns the update trace norm
    auto em_step = [&](const Matrix& state, Matrix& next, double& ll) {
        const Matrix state_factors = state * factors;
        Eigen::ArrayXd probs =
            (factors.conjugate().cwiseProduct(state_factors)).colwise().sum().real().transpose();
        probs = probs.max(1e-300);
        ll = probs.log().sum() * inv_n;

        // R = (1/N) sum_k Pi_k / p_k
        const Vector weights = (inv_n / probs).cast<Complex>().matrix();
        Matrix r_op = hermitize((factors * weights.asDiagonal()) * factors.adjoint());
        if (diluted) r_op = 0.5 * (Matrix::Identity(dim, dim) + r_op);

        next = hermitize(r_op * state * r_op);
        next /= next.trace().real();
        return trace_norm_hermitian(next - state);
    };

    auto project_state = [&](Matrix state) {
        // Hermitian, PSD, unit trace after an extrapolated step
        Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(state));
        Eigen::VectorXd evs = es.eigenvalues().cwiseMax(0.0);
        state = es.eigenvectors() * evs.asDiagonal() * es.eigenvectors().adjoint();
        return Matrix(state / state.trace().real());
    };

    // RrhoR fixed-point iteration with squared-extrapolation acceleration:
    // every extrapolated candidate must not lose likelihood against the plain
    // double step, so the accepted trajectory stays monotone and each iterate
    // stays a valid state.
    double prev_ll = -std::numeric_limits<double>::infinity();
    while (diag.iterations < plan.max_iterations && !diag.converged) {
        Matrix step1, step2;
        double ll0 = 0.0, ll1 = 0.0;

        double update = em_step(rho, step1, ll0);
        ++diag.iterations;
        diag.log_likelihood.push_back(ll0);
        diag.final_update_norm = update;
        if (ll0 + 1e-9 < prev_ll && !diluted) {
            // RrhoR overshoot: keep the previous iterate, damp from now on
            diluted = true;
            continue;
        }
        prev_ll = std::max(prev_ll, ll0);
        if (update < plan.convergence_tol) {
            diag.converged = true;
            rho = step1;
            break;
        }

        update = em_step(step1, step2, ll1);
        ++diag.iterations;
        diag.log_likelihood.push_back(ll1);
        diag.final_update_norm = update;
        prev_ll = std::max(prev_ll, ll1);
        if (update < plan.convergence_tol) {
            diag.converged = true;
            rho = step2;
            break;
        }

        const Matrix dir = step1 - rho;
        const Matrix curv = (step2 - step1) - dir;
        const double curv_norm = curv.norm();
        if (curv_norm < 1e-14) {
            rho = step2;
            continue;
        }
        const double alpha = -dir.norm() / curv_norm;
        const Matrix candidate =
            project_state(rho - 2.0 * alpha * dir + alpha * alpha * curv);
        if (log_likelihood(candidate) >= ll1) {
            rho = candidate;
        } else {
            rho = step2;
        }
    }
    if (!diag.converged) {
        diag.warnings.push_back("not converged after " +
                                std::to_string(diag.iterations) + " iterations");
    }

    return {DensityMatrix(plan.cutoff, std::move(rho)), std::move(diag)};
}

BootstrapResult bootstrap(std::span<const QuadratureBatch> data, const TomographyPlan& plan,
                          int resamples, std::uint64_t seed, const MetricFn& metrics,
                          const DensityMatrix* warm_start) {
    if (resamples < 50)
        throw std::invalid_argument("bootstrap needs at least 50 resamples");

    std::map<std::string, std::vector<double>> values;
    for (int r = 0; r < resamples; ++r) {
        std::vector<QuadratureBatch> resampled(data.begin(), data.end());
        for (std::size_t bi = 0; bi < resampled.size(); ++bi) {
            const auto& src = data[bi].samples;
            Rng rng(Rng::derive(seed, "bootstrap", static_cast<std::uint64_t>(r), bi));
            auto& dst = resampled[bi].samples;
            for (std::size_t k = 0; k < dst.size(); ++k)
                dst[k] = src[rng.next_u64() % src.size()];
        }
        const MleResult fit = mle_reconstruct(resampled, plan, warm_start);
        for (const auto& [name, value] : metrics(fit.rho)) values[name].push_back(value);
    }

    BootstrapResult out;
    out.resamples = resamples;
    for (const auto& [name, vs] : values) {
        double mean = 0.0;
        for (double v : vs) mean += v;
        mean /= static_cast<double>(vs.size());
        double var = 0.0;
        for (double v : vs) var += (v - mean) * (v - mean);
        var = vs.size() > 1 ? var / static_cast<double>(vs.size() - 1) : 0.0;
        out.means[name] = mean;
        out.std_errors[name] = std::sqrt(var);
    }
    return out;
}

} // namespace dualrail
