// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include "dualrail/analysis.hpp"
#include "dualrail/config.hpp"
#include "dualrail/io.hpp"
#include "dualrail/pipeline.hpp"
#include "dualrail/tomography.hpp"

using namespace dualrail;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s  (%s)\n", pass ? "PASS" : "FAIL", id, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<QuadratureBatch> measure_state(const DensityMatrix& rho,
                                           const std::vector<HomodyneBasis>& bases,
                                           int n_per_basis, std::uint64_t seed) {
    std::vector<QuadratureBatch> data;
    data.reserve(bases.size());
    for (std::size_t b = 0; b < bases.size(); ++b)
        data.push_back(
            sample_quadratures(rho, bases[b], n_per_basis, Rng::derive(seed, "measure", b)));
    return data;
}

std::string file_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

// 1. Heralded-state exactness
void criterion_1() {
    const auto t0 = std::chrono::steady_clock::now();
    SourceParams p;
    p.q1 = p.q2 = 0.1;
    const PureState bell = dual_rail_state(p.cutoff, 1 / std::sqrt(2.0), 1 / std::sqrt(2.0), 0.0);
    const double f1 = fidelity(herald_single_click(p).state, bell);
    p.q1 = p.q2 = 0.01;
    const double f2 = fidelity(herald_single_click(p).state, bell);
    const double dt = seconds_since(t0);
    std::ostringstream detail;
    detail << "F(q=0.1) = " << f1 << ", F(q=0.01) = " << f2 << ", " << dt << " s";
    report(1, "heralded-state exactness", f1 > 0.99 && f2 > 0.9999 && dt < 1.0, detail.str());
}

// 2. Negativity oracle
void criterion_2() {
    const Cutoff c{2};
    const DensityMatrix bell = DensityMatrix::from_pure(
        dual_rail_state(c, 1 / std::sqrt(2.0), 1 / std::sqrt(2.0), 0.0));
    bool pass = std::abs(log_negativity_subspace(bell) - 1.0) <= 1e-9;

    double worst_sep = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        const int d = c.dim();
        Matrix m = Matrix::Zero(c.dim2(), c.dim2());
        double total = 0.0;
        for (int i = 0; i < 3; ++i) {
            const double w = rng.next_double() + 0.1;
            Vector a(d), b(d);
            for (int k = 0; k < d; ++k) {
                a(k) = Complex{rng.next_gauss(), rng.next_gauss()};
                b(k) = Complex{rng.next_gauss(), rng.next_gauss()};
            }
            a.normalize();
            b.normalize();
            Vector prod(c.dim2());
            for (int s = 0; s < d; ++s)
                for (int t = 0; t < d; ++t) prod(s * d + t) = a(s) * b(t);
            m += w * (prod * prod.adjoint());
            total += w;
        }
        worst_sep = std::max(worst_sep,
                             std::abs(log_negativity_subspace(DensityMatrix(c, m / total))));
    }
    pass = pass && worst_sep <= 1e-9;

    const double l = 0.5;
    const double closed_form = std::log2(1.0 - l + std::sqrt(l * l + (1 - l) * (1 - l)));
    const double lossy = log_negativity_subspace(loss_channel(bell, {l, l}));
    pass = pass && std::abs(lossy - closed_form) <= 1e-9;

    std::ostringstream detail;
    detail << "E(ideal) = " << log_negativity_subspace(bell) << ", max |E(sep)| = " << worst_sep
           << ", E(L=0.5) = " << lossy << " vs " << closed_form;
    report(2, "negativity oracle", pass, detail.str());
}

// 3. Paper negativity series, calibrated
void criterion_3() {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg = ExperimentConfig::from_text("seed = 1\n");
    const fs::path dir = fs::temp_directory_path() / "dualrail_acceptance" / "paper";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ostringstream sink;
    const pipeline::CalibrationResult cal = pipeline::reproduce_paper(cfg, dir, sink);
    const double targets[5] = {0.386, 0.333, 0.265, 0.209, 0.150};
    bool pass = true;
    std::ostringstream detail;
    detail << "eta0 = " << cal.eta0 << ", sigma = " << cal.sigma;
    for (int i = 2; i < 5; ++i) {
        const double diff = cal.series[i] - targets[i];
        pass = pass && std::abs(diff) <= 0.08;
        detail << ", d" << i * 100 << " = " << diff;
    }
    const double dt = seconds_since(t0);
    detail << ", " << dt << " s";
    report(3, "paper negativity series within 0.08", pass && dt < 10.0, detail.str());
}

// 4. Tomography round trip at the paper budget, 5 seeds
void criterion_4() {
    const auto t0 = std::chrono::steady_clock::now();
    const Cutoff c{3};
    DensityMatrix truth = DensityMatrix::from_pure(
        dual_rail_state(c, 1 / std::sqrt(2.0), 1 / std::sqrt(2.0), 0.0));
    truth = mix_fake_counts(truth, {10.0 / 410.0});
    truth = loss_channel(truth, {0.25, 0.30});
    truth = dephasing_channel(truth, {0.46});
    const double e_true = log_negativity_subspace(truth);

    TomographyPlan plan;
    plan.cutoff = c;
    bool pass = true;
    std::ostringstream detail;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto data = measure_state(truth, plan.bases, plan.samples_per_basis, seed);
        const MleResult fit = mle_reconstruct(data, plan);
        const double dist = trace_distance(fit.rho, truth);
        const double de = std::abs(log_negativity_subspace(fit.rho) - e_true);
        pass = pass && dist <= 0.05 && de <= 0.03;
        detail << "seed " << seed << ": d = " << dist << ", |dE| = " << de << "; ";
    }
    const double dt = seconds_since(t0);
    detail << dt << " s";
    report(4, "tomography round trip (49x3000, 5 seeds)", pass && dt < 600.0, detail.str());
}

// 5. Wigner negativity and marginal consistency
void criterion_5() {
    const Cutoff c{2};
    const DensityMatrix bell = DensityMatrix::from_pure(
        dual_rail_state(c, 1 / std::sqrt(2.0), 1 / std::sqrt(2.0), 0.0));
    const DensityMatrix one = DensityMatrix::from_pure(PureState::basis_state(c, {1, 0}));
    bool pass = std::abs(wigner_origin(bell) + 1.0 / (kPi * kPi)) <= 1e-6 &&
                std::abs(wigner_origin(one) + 1.0 / (kPi * kPi)) <= 1e-6;

    // sign flip: bisection on the loss
    double lo = 0.3, hi = 0.7;
    for (int it = 0; it < 40; ++it) {
        const double mid = 0.5 * (lo + hi);
        (wigner_origin(loss_channel(bell, {mid, mid})) < 0.0 ? lo : hi) = mid;
    }
    const double flip = 0.5 * (lo + hi);
    pass = pass && std::abs(flip - 0.5) <= 0.01;

    // marginal vs quadrature pdf (Simpson over three axes)
    const DensityMatrix small = DensityMatrix::from_pure(
        dual_rail_state(Cutoff{1}, 1 / std::sqrt(2.0), 1 / std::sqrt(2.0), 0.0));
    const int g = 41;
    const Eigen::VectorXd xs = Eigen::VectorXd::LinSpaced(g, -4.0, 4.0);
    const Wigner4D w4 = wigner(small, xs, xs);
    Eigen::VectorXd simpson(g);
    const double h = xs(1) - xs(0);
    for (int i = 0; i < g; ++i)
        simpson(i) =
            (i == 0 || i == g - 1) ? h / 3.0 : ((i % 2 == 1) ? 4.0 * h / 3.0 : 2.0 * h / 3.0);
    const QuadratureGrid grid = QuadratureGrid::uniform(-6, 6, 241);
    const Eigen::MatrixXd pdf = quadrature_pdf(small, {0, 0}, grid);
    double worst = 0.0;
    for (int i1 = 0; i1 < g; i1 += 5) {
        double marginal = 0.0;
        for (int j1 = 0; j1 < g; ++j1)
            for (int i2 = 0; i2 < g; ++i2)
                for (int j2 = 0; j2 < g; ++j2)
                    marginal += simpson(j1) * simpson(i2) * simpson(j2) * w4.at(i1, j1, i2, j2);
        Eigen::Index nearest = 0;
        (grid.x1.array() - xs(i1)).abs().minCoeff(&nearest);
        double pdf_marginal = 0.0;
        for (Eigen::Index j = 0; j + 1 < grid.x2.size(); ++j)
            pdf_marginal += 0.5 * (grid.x2(j + 1) - grid.x2(j)) *
                            (pdf(nearest, j) + pdf(nearest, j + 1));
        worst = std::max(worst, std::abs(marginal - pdf_marginal));
    }
    pass = pass && worst <= 1e-3;

    std::ostringstream detail;
    detail << "W0(bell) = " << wigner_origin(bell) << ", flip at L = " << flip
           << ", worst marginal gap = " << worst;
    report(5, "wigner negativity, sign flip, marginals", pass, detail.str());
}

// 6. Phase pipeline
void criterion_6() {
    const auto t0 = std::chrono::steady_clock::now();
    const Cutoff c{3};
    const double theta = 0.35;
    const double omega = 2.0 * kPi * 300e3;
    DensityMatrix base = DensityMatrix::from_pure(
        dual_rail_state(c, 1 / std::sqrt(2.0), 1 / std::sqrt(2.0), theta));
    base = mix_fake_counts(base, {10.0 / 410.0});
    base = loss_channel(base, {0.2, 0.2});

    // noiseless channel series
    std::vector<std::pair<double, DensityMatrix>> series;
    for (int k = 0; k <= 4; ++k) {
        const double dtau = k * 100e-9;
        series.emplace_back(dtau, detuning_rotation(base, {dtau, 0.0, omega}));
    }
    const double f_noiseless = fit_phase_rotation(series);
    bool pass = std::abs(f_noiseless - 300e3) <= 1e3;

    // simultaneous release leaves the phase at theta
    const DensityMatrix sim = detuning_rotation(base, {400e-9, 400e-9, omega});
    const double phase_sim = std::arg(sim.element(1, 0, 0, 1));
    pass = pass && std::abs(phase_sim - theta) <= 0.02;

    // sampled-tomography pipeline
    TomographyPlan plan;
    plan.cutoff = c;
    plan.samples_per_basis = 1000;
    std::vector<std::pair<double, DensityMatrix>> sampled;
    double phase0 = 0.0;
    for (int k = 0; k <= 4; ++k) {
        const double dtau = k * 100e-9;
        const DensityMatrix rotated = detuning_rotation(base, {dtau, 0.0, omega});
        const auto data =
            measure_state(rotated, plan.bases, plan.samples_per_basis, 600 + k);
        const MleResult fit = mle_reconstruct(data, plan);
        if (k == 0) phase0 = std::arg(fit.rho.element(1, 0, 0, 1));
        sampled.emplace_back(dtau, fit.rho);
    }
    const double f_sampled = fit_phase_rotation(sampled);
    pass = pass && std::abs(f_sampled - 300e3) <= 30e3;

    const double dt = seconds_since(t0);
    std::ostringstream detail;
    detail << "f_noiseless = " << f_noiseless / 1e3 << " kHz, f_sampled = " << f_sampled / 1e3
           << " kHz, phase(dtau=0) - theta = " << phase_sim - theta << " (sampled "
           << phase0 - theta << "), " << dt << " s";
    report(6, "phase pipeline at 300 kHz", pass, detail.str());
}

// 7. Estimator inverse pairs
void criterion_7() {
    const auto t0 = std::chrono::steady_clock::now();
    const Cutoff c{3};
    DensityMatrix base = DensityMatrix::from_pure(
        dual_rail_state(c, 1 / std::sqrt(2.0), 1 / std::sqrt(2.0), 0.0));
    base = loss_channel(base, {0.2, 0.25});

    bool pass = true;
    std::ostringstream detail;
    TomographyPlan plan;
    plan.cutoff = c;
    plan.samples_per_basis = 1000;
    for (double deg : {10.0, 20.0, 30.0, 40.0}) {
        const double sigma = deg * kPi / 180.0;
        const DensityMatrix dephased = dephasing_channel(base, {sigma});
        const double noiseless = estimate_dephasing(dephased);
        pass = pass && std::abs(noiseless - sigma) <= 1e-6;

        const auto data = measure_state(dephased, plan.bases, plan.samples_per_basis,
                                        900 + static_cast<std::uint64_t>(deg));
        const MleResult fit = mle_reconstruct(data, plan);
        const double sampled = estimate_dephasing(fit.rho);
        const double err_deg = std::abs(sampled - sigma) * 180.0 / kPi;
        pass = pass && err_deg <= 2.0;
        detail << deg << " deg: sampled err " << err_deg << " deg; ";
    }

    const DecayModel truth{0.83, 1.42e-6};
    std::vector<std::pair<double, double>> pts;
    for (int k = 0; k <= 4; ++k)
        pts.emplace_back(k * 100e-9, truth.efficiency_at(k * 100e-9));
    const DecayModel fit = fit_exponential_decay(pts);
    pass = pass && std::abs(fit.eta0 - truth.eta0) <= 1e-9 &&
           std::abs(fit.tau - truth.tau) / truth.tau <= 1e-9;

    const double dt = seconds_since(t0);
    detail << "decay fit (" << fit.eta0 << ", " << fit.tau * 1e6 << " us), " << dt << " s";
    report(7, "estimator inverse pairs", pass, detail.str());
}

// 8. Envelope extraction
void criterion_8() {
    const Cutoff c{2};
    const Eigen::VectorXd times = Eigen::VectorXd::LinSpaced(101, -100e-9, 900e-9);
    const DensityMatrix one = DensityMatrix::from_pure(PureState::basis_state(c, {1, 0}));
    const HomodyneBasis basis{0, 0};
    bool pass = true;
    std::ostringstream detail;

    Envelope reference = Envelope::exponential(times, 40e-9, 15e6);
    std::vector<Envelope> extracted;
    for (int k = 0; k <= 4; ++k) {
        const double delay = k * 100e-9;
        const Envelope truth = Envelope::exponential(times, 40e-9 + delay, 15e6);
        const TraceEnsemble ens = simulate_traces(one, truth, truth,
                                                  std::span(&basis, 1), 3000, 7000 + k);
        const Envelope est = extract_envelope_pca(ens, 1);
        const double overlap = std::abs(est.values.dot(truth.values) * est.dt());
        pass = pass && overlap >= 0.99;
        extracted.push_back(est);
        if (k == 0) detail << "overlap(0ns) = " << overlap << "; ";
    }
    for (int k = 1; k <= 4; ++k) {
        int best_lag = 0;
        double best = -1.0;
        for (int lag = 0; lag < 80; ++lag) {
            double acc = 0.0;
            for (Eigen::Index t = 0; t + lag < times.size(); ++t)
                acc += extracted[0].values(t) * extracted[static_cast<std::size_t>(k)].values(t + lag);
            if (acc > best) {
                best = acc;
                best_lag = lag;
            }
        }
        pass = pass && std::abs(best_lag - 10 * k) <= 1;
        detail << "lag(" << k * 100 << "ns) = " << best_lag * 10 << "ns; ";
    }
    report(8, "temporal-mode extraction and shifts", pass, detail.str());
}

// 9. Determinism
void criterion_9() {
    ExperimentConfig cfg = ExperimentConfig::from_text(R"(
        seed = 99
        cutoff = 2
        phases_per_lo = 3
        samples_per_basis = 200
        sigma_rad = 0.3
        t1_ns = 100
        t2_ns = 0
    )");
    const fs::path base = fs::temp_directory_path() / "dualrail_acceptance";
    const fs::path a = base / "det_a";
    const fs::path b = base / "det_b";
    const fs::path c = base / "det_c";
    for (const auto& dir : {a, b, c}) {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    cfg.threads = 1;
    pipeline::run_pipeline(cfg, a);
    pipeline::run_pipeline(cfg, b);
    cfg.threads = 4;
    pipeline::run_pipeline(cfg, c);

    bool pass = true;
    for (const char* name : {"state_heralded.dm", "state_stored.dm", "samples.qs",
                             "state_reconstructed.dm", "report.txt"}) {
        pass = pass && file_bytes(a / name) == file_bytes(b / name);
        pass = pass && file_bytes(a / name) == file_bytes(c / name);
    }
    report(9, "byte-identical runs across repeats and worker counts", pass,
           pass ? "all pipeline data files identical" : "files differ");
}

} // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    if (failures > 0) {
        std::printf("%d criterion(s) FAILED\n", failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
