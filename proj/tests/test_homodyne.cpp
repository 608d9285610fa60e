#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "dualrail/homodyne.hpp"
#include "test_helpers.hpp"

using namespace dualrail;
using namespace dualrail::testing;

namespace {

// two-sample Kolmogorov-Smirnov p-value (asymptotic), test-side oracle
double ks_two_sample_p(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / a.size() -
                                 static_cast<double>(j) / b.size()));
    }
    const double ne = static_cast<double>(a.size()) * b.size() / (a.size() + b.size());
    const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
    double p = 0.0;
    for (int k = 1; k <= 100; ++k)
        p += 2.0 * ((k % 2 == 1) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
    return std::clamp(p, 0.0, 1.0);
}

double trapz(const Eigen::VectorXd& xs, const Eigen::VectorXd& f) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i + 1 < xs.size(); ++i)
        acc += 0.5 * (xs(i + 1) - xs(i)) * (f(i) + f(i + 1));
    return acc;
}

} // namespace

TEST_SUITE_BEGIN("homodyne");

TEST_CASE("hermite functions: ground and first excited state") {
    const Eigen::VectorXd psi0 = hermite_functions(3, 0.0);
    CHECK(psi0(0) == doctest::Approx(std::pow(kPi, -0.25)).epsilon(1e-14));
    CHECK(psi0(1) == doctest::Approx(0.0));
    // orthonormality on a fine grid
    const Eigen::VectorXd xs = Eigen::VectorXd::LinSpaced(4001, -6.0, 6.0);
    const Eigen::MatrixXd t = hermite_table(3, xs);
    for (int m = 0; m <= 3; ++m)
        for (int n = 0; n <= 3; ++n) {
            const double overlap = trapz(xs, t.row(m).cwiseProduct(t.row(n)).transpose());
            CHECK(overlap == doctest::Approx(m == n ? 1.0 : 0.0).epsilon(1e-8));
        }
}

TEST_CASE("quadrature pdf values") {
    const Cutoff c{3};
    const QuadratureGrid grid = QuadratureGrid::uniform(-6.0, 6.0, 241);
    SUBCASE("vacuum is the isotropic Gaussian, 1/pi at the origin") {
        const DensityMatrix vac = DensityMatrix::vacuum(c);
        const Eigen::MatrixXd p = quadrature_pdf(vac, {0.3, 1.2}, grid);
        for (Eigen::Index i = 0; i < grid.x1.size(); i += 24)
            for (Eigen::Index j = 0; j < grid.x2.size(); j += 24) {
                const double expected =
                    std::exp(-grid.x1(i) * grid.x1(i) - grid.x2(j) * grid.x2(j)) / kPi;
                CHECK(p(i, j) == doctest::Approx(expected).epsilon(1e-10));
            }
        CHECK(quadrature_pdf_at(vac, {0, 0}, 0, 0) == doctest::Approx(1.0 / kPi).epsilon(1e-12));
    }
    SUBCASE("single photon marginal: 2 x^2 e^{-x^2}/sqrt(pi)") {
        const DensityMatrix one =
            DensityMatrix::from_pure(PureState::basis_state(c, {1, 0}));
        const Eigen::MatrixXd p = quadrature_pdf(one, {0.0, 0.0}, grid);
        // integrate out x2 and compare pointwise
        for (Eigen::Index i = 0; i < grid.x1.size(); i += 10) {
            const double marginal = trapz(grid.x2, p.row(i).transpose());
            const double x = grid.x1(i);
            const double expected = 2.0 * x * x * std::exp(-x * x) / std::sqrt(kPi);
            CHECK(marginal == doctest::Approx(expected).epsilon(1e-8));
        }
        const double p1 = 2.0 * std::exp(-1.0) / std::sqrt(kPi);
        CHECK(p1 == doctest::Approx(0.41510749).epsilon(1e-7));
    }
    SUBCASE("marginal equals the reduced-state pdf pointwise") {
        Rng rng(21);
        const DensityMatrix rho = random_density(c, 3, rng);
        const HomodyneBasis b{0.4, 1.9};
        const Eigen::MatrixXd p = quadrature_pdf(rho, b, grid);
        const Matrix red = partial_trace(phase_rotation(rho, b.phi1, b.phi2), 1);
        const Eigen::MatrixXd t = hermite_table(c.n_max, grid.x1);
        for (Eigen::Index i = 0; i < grid.x1.size(); i += 16) {
            const double marginal = trapz(grid.x2, p.row(i).transpose());
            const double direct =
                (t.col(i).transpose() * red.real() * t.col(i))(0);
            CHECK(marginal == doctest::Approx(direct).epsilon(1e-8));
        }
    }
    SUBCASE("fixed-total-N states depend only on the LO phase difference") {
        const DensityMatrix bell = DensityMatrix::from_pure(bell_state(c));
        const QuadratureGrid small = QuadratureGrid::uniform(-5.5, 5.5, 45);
        const Eigen::MatrixXd p0 = quadrature_pdf(bell, {0.7, 0.1}, small);
        const Eigen::MatrixXd p1 = quadrature_pdf(bell, {0.7 + 1.3, 0.1 + 1.3}, small);
        CHECK((p0 - p1).cwiseAbs().maxCoeff() < 1e-10);
    }
    SUBCASE("two peaks at equal phases, ring at 90 degrees") {
        const DensityMatrix bell = DensityMatrix::from_pure(bell_state(c));
        // delta phi = 0: density vanishes on the antidiagonal, peaks on the diagonal
        CHECK(quadrature_pdf_at(bell, {0, 0}, 0.0, 0.0) < 1e-12);
        CHECK(quadrature_pdf_at(bell, {0, 0}, 0.8, -0.8) < 1e-12);
        CHECK(quadrature_pdf_at(bell, {0, 0}, 0.7, 0.7) > 0.05);
        // delta phi = pi/2: rotationally symmetric ring, zero at the origin
        const HomodyneBasis ring{kPi / 2.0, 0.0};
        CHECK(quadrature_pdf_at(bell, ring, 0.0, 0.0) < 1e-12);
        const double r0 = quadrature_pdf_at(bell, ring, 1.0, 0.0);
        CHECK(quadrature_pdf_at(bell, ring, 0.0, 1.0) == doctest::Approx(r0).epsilon(1e-10));
        CHECK(quadrature_pdf_at(bell, ring, -1.0, 0.0) == doctest::Approx(r0).epsilon(1e-10));
        CHECK(quadrature_pdf_at(bell, ring, std::sqrt(0.5), std::sqrt(0.5)) ==
              doctest::Approx(r0).epsilon(1e-10));
    }
    SUBCASE("grid diagnostics") {
        const DensityMatrix vac = DensityMatrix::vacuum(c);
        CHECK_THROWS_AS(quadrature_pdf(vac, {0, 0}, QuadratureGrid::uniform(-3, 3, 101)),
                        std::invalid_argument);
        CHECK_THROWS_AS(quadrature_pdf(vac, {0, 0}, QuadratureGrid::uniform(-6, 6, 7)),
                        DiagnosticsError);
    }
}

TEST_CASE("quadrature sampling moments") {
    const Cutoff c{3};
    SUBCASE("vacuum variance 1/2") {
        const auto batch =
            sample_quadratures(DensityMatrix::vacuum(c), {0.2, 0.9}, 100000, 7);
        double m1 = 0, m2 = 0;
        for (const auto& s : batch.samples) {
            m1 += s[0];
            m2 += s[0] * s[0];
        }
        m1 /= batch.samples.size();
        m2 /= batch.samples.size();
        CHECK(std::abs(m2 - m1 * m1 - 0.5) < 0.01);
    }
    SUBCASE("single photon second moment 3/2") {
        const DensityMatrix one =
            DensityMatrix::from_pure(PureState::basis_state(c, {1, 0}));
        const auto batch = sample_quadratures(one, {0.0, 0.0}, 100000, 8);
        double m2 = 0;
        for (const auto& s : batch.samples) m2 += s[0] * s[0];
        m2 /= batch.samples.size();
        CHECK(std::abs(m2 - 1.5) < 0.02);
    }
    SUBCASE("Bell-state correlation at equal LO phases") {
        const DensityMatrix bell = DensityMatrix::from_pure(bell_state(c));
        // oracle: integrate x1 x2 against the joint pdf on a grid
        const QuadratureGrid grid = QuadratureGrid::uniform(-6, 6, 241);
        const Eigen::MatrixXd p = quadrature_pdf(bell, {0, 0}, grid);
        double cov = 0, var1 = 0, var2 = 0;
        for (Eigen::Index i = 0; i + 1 < grid.x1.size(); ++i)
            for (Eigen::Index j = 0; j + 1 < grid.x2.size(); ++j) {
                const double h2 = (grid.x1(i + 1) - grid.x1(i)) * (grid.x2(j + 1) - grid.x2(j));
                const double pm = 0.25 * (p(i, j) + p(i + 1, j) + p(i, j + 1) + p(i + 1, j + 1));
                const double x = 0.5 * (grid.x1(i) + grid.x1(i + 1));
                const double y = 0.5 * (grid.x2(j) + grid.x2(j + 1));
                cov += x * y * pm * h2;
                var1 += x * x * pm * h2;
                var2 += y * y * pm * h2;
            }
        const double corr_oracle = cov / std::sqrt(var1 * var2);
        CHECK(corr_oracle == doctest::Approx(0.5).epsilon(2e-3));

        const auto batch = sample_quadratures(bell, {0, 0}, 100000, 9);
        double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
        for (const auto& s : batch.samples) {
            sx += s[0];
            sy += s[1];
            sxx += s[0] * s[0];
            syy += s[1] * s[1];
            sxy += s[0] * s[1];
        }
        const double n = static_cast<double>(batch.samples.size());
        const double corr = (sxy / n - sx * sy / n / n) /
                            std::sqrt((sxx / n - sx * sx / n / n) * (syy / n - sy * sy / n / n));
        CHECK(std::abs(corr - corr_oracle) < 0.02);
    }
    SUBCASE("deterministic for a fixed seed") {
        const DensityMatrix bell = DensityMatrix::from_pure(bell_state(c));
        const auto a = sample_quadratures(bell, {0.5, 0.25}, 64, 1234);
        const auto b = sample_quadratures(bell, {0.5, 0.25}, 64, 1234);
        const auto other = sample_quadratures(bell, {0.5, 0.25}, 64, 1235);
        for (std::size_t i = 0; i < a.samples.size(); ++i) {
            CHECK(a.samples[i][0] == b.samples[i][0]);
            CHECK(a.samples[i][1] == b.samples[i][1]);
        }
        CHECK(a.samples[0][0] != other.samples[0][0]);
    }
}

TEST_CASE("sampling error shrinks at the Monte Carlo rate") {
    const Cutoff c{2};
    const DensityMatrix one = DensityMatrix::from_pure(PureState::basis_state(c, {1, 0}));
    const double truth = 1.5; // <x^2> for n = 1
    auto rms_error = [&](int n, std::uint64_t seed_base) {
        double acc = 0.0;
        constexpr int kReps = 24;
        for (int rep = 0; rep < kReps; ++rep) {
            const auto batch =
                sample_quadratures(one, {0, 0}, n, Rng::derive(seed_base, "mc", rep));
            double m2 = 0;
            for (const auto& s : batch.samples) m2 += s[0] * s[0];
            m2 /= n;
            acc += (m2 - truth) * (m2 - truth);
        }
        return std::sqrt(acc / kReps);
    };
    const double e_small = rms_error(500, 1);
    const double e_large = rms_error(8000, 2);
    const double ratio = e_small / e_large; // expect sqrt(16) = 4
    CHECK(ratio > 2.0);
    CHECK(ratio < 8.0);
}

TEST_CASE("basis grid") {
    const auto bases = homodyne_basis_grid();
    CHECK(bases.size() == 49);
    for (const auto& b : bases) {
        CHECK(b.phi1 >= 0.0);
        CHECK(b.phi1 < kPi);
        CHECK(b.phi2 >= 0.0);
        CHECK(b.phi2 < kPi);
    }
    const HomodyneBasis w = HomodyneBasis::wrapped(-kPi / 2.0, 5.0 * kPi);
    CHECK(w.phi1 == doctest::Approx(1.5 * kPi));
    CHECK(w.phi2 == doctest::Approx(kPi));
}

TEST_CASE("envelopes and trace projection") {
    const Eigen::VectorXd times = Eigen::VectorXd::LinSpaced(101, -100e-9, 900e-9);
    const Envelope env = Envelope::exponential(times, 40e-9, 15e6);
    SUBCASE("unit norm and positive peak") {
        CHECK(env.values.squaredNorm() * env.dt() == doctest::Approx(1.0).epsilon(1e-12));
        Eigen::Index peak;
        env.values.cwiseAbs().maxCoeff(&peak);
        CHECK(env.values(peak) > 0.0);
        CHECK(project_trace(env.values, env) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("orthogonal trace projects to zero, projection is linear") {
        Rng rng(5);
        Eigen::VectorXd u(times.size()), v(times.size());
        for (Eigen::Index i = 0; i < times.size(); ++i) {
            u(i) = rng.next_gauss();
            v(i) = rng.next_gauss();
        }
        const Eigen::VectorXd orth = u - env.values * (env.values.dot(u) * env.dt());
        CHECK(std::abs(project_trace(orth, env)) < 1e-9 * u.norm());
        const double a = 1.7, b = -0.4;
        CHECK(project_trace(a * u + b * v, env) ==
              doctest::Approx(a * project_trace(u, env) + b * project_trace(v, env))
                  .epsilon(1e-10));
        Eigen::VectorXd wrong(times.size() + 1);
        wrong.setZero();
        CHECK_THROWS_AS(project_trace(wrong, env), std::invalid_argument);
    }
    SUBCASE("sign fix flips a negative-peak input") {
        const Envelope flipped = Envelope::from_values(times, -env.values);
        CHECK(max_abs_diff(Matrix(flipped.values.cast<Complex>()),
                           Matrix(env.values.cast<Complex>())) < 1e-15);
    }
}

TEST_CASE("simulated traces") {
    const Cutoff c{2};
    const Eigen::VectorXd times = Eigen::VectorXd::LinSpaced(101, -100e-9, 900e-9);
    const Envelope env = Envelope::exponential(times, 40e-9, 15e6);
    const DensityMatrix one = DensityMatrix::from_pure(PureState::basis_state(c, {1, 0}));
    const HomodyneBasis basis{0, 0};

    SUBCASE("vacuum level in the dead region before the envelope") {
        const TraceEnsemble ens =
            simulate_traces(one, env, env, std::span(&basis, 1), 2000, 42);
        double var = 0.0;
        int count = 0;
        for (Eigen::Index r = 0; r < ens.x1.rows(); ++r)
            for (Eigen::Index t = 0; t < 10; ++t) { // region where the envelope is zero
                var += ens.x1(r, t) * ens.x1(r, t);
                ++count;
            }
        var /= count;
        const double expected = 0.5 / env.dt();
        CHECK(std::abs(var - expected) / expected < 0.05);
    }
    SUBCASE("projection recovers the quadrature distribution (KS)") {
        const TraceEnsemble ens =
            simulate_traces(one, env, env, std::span(&basis, 1), 3000, 43);
        std::vector<double> projected;
        for (Eigen::Index r = 0; r < ens.x1.rows(); ++r)
            projected.push_back(project_trace(ens.x1.row(r).transpose(), env));
        const auto direct = sample_quadratures(one, basis, 3000, 99);
        std::vector<double> reference;
        for (const auto& s : direct.samples) reference.push_back(s[0]);
        CHECK(ks_two_sample_p(projected, reference) > 0.01);
    }
}

TEST_CASE("temporal-mode extraction by PCA") {
    const Cutoff c{2};
    const Eigen::VectorXd times = Eigen::VectorXd::LinSpaced(101, -100e-9, 900e-9);
    const DensityMatrix one = DensityMatrix::from_pure(PureState::basis_state(c, {1, 0}));
    const HomodyneBasis basis{0, 0};

    SUBCASE("round trip overlap at 3000 traces") {
        const Envelope truth = Envelope::exponential(times, 40e-9, 15e6);
        const TraceEnsemble ens =
            simulate_traces(one, truth, truth, std::span(&basis, 1), 3000, 50);
        const Envelope est = extract_envelope_pca(ens, 1);
        const double overlap = std::abs(est.values.dot(truth.values) * est.dt());
        CHECK(overlap >= 0.99);
    }
    SUBCASE("pure vacuum has no dominant mode") {
        const DensityMatrix vac = DensityMatrix::vacuum(c);
        const Envelope env = Envelope::exponential(times, 40e-9, 15e6);
        const TraceEnsemble ens =
            simulate_traces(vac, env, env, std::span(&basis, 1), 500, 51);
        CHECK_THROWS_AS(extract_envelope_pca(ens, 1), DiagnosticsError);
    }
    SUBCASE("too few traces is a precondition error") {
        const Envelope env = Envelope::exponential(times, 40e-9, 15e6);
        const TraceEnsemble ens =
            simulate_traces(one, env, env, std::span(&basis, 1), 99, 52);
        CHECK_THROWS_AS(extract_envelope_pca(ens, 1), std::invalid_argument);
    }
    SUBCASE("delayed envelopes come back delayed (cross-correlation peak)") {
        const Envelope base = Envelope::exponential(times, 40e-9, 15e6);
        const Envelope delayed = Envelope::exponential(times, 240e-9, 15e6);
        const TraceEnsemble e0 =
            simulate_traces(one, base, base, std::span(&basis, 1), 3000, 53);
        const TraceEnsemble e1 =
            simulate_traces(one, delayed, delayed, std::span(&basis, 1), 3000, 54);
        const Envelope psi0 = extract_envelope_pca(e0, 1);
        const Envelope psi1 = extract_envelope_pca(e1, 1);
        // cross-correlation argmax over lags
        int best_lag = 0;
        double best = -1.0;
        for (int lag = 0; lag < 60; ++lag) {
            double acc = 0.0;
            for (Eigen::Index t = 0; t + lag < times.size(); ++t)
                acc += psi0.values(t) * psi1.values(t + lag);
            if (acc > best) {
                best = acc;
                best_lag = lag;
            }
        }
        const int expected_lag = 20; // 200 ns / 10 ns
        CHECK(std::abs(best_lag - expected_lag) <= 1);
    }
}

TEST_SUITE_END();
