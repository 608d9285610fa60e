#include "dualrail/config.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "dualrail/io.hpp"
#include "dualrail/rng.hpp"

namespace dualrail {

Eigen::VectorXd EnvelopeConfig::times() const {
    check();
    Eigen::VectorXd t(n_points);
    for (int i = 0; i < n_points; ++i) t(i) = t_min + i * dt;
    return t;
}

void EnvelopeConfig::check() const {
    if (!(gamma > 0.0)) throw ConfigError("envelope gamma must be positive");
    if (!(dt > 0.0)) throw ConfigError("trace dt must be positive");
    if (n_points < 2) throw ConfigError("trace grid needs at least 2 points");
}

namespace {

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "seed", "cutoff", "q1", "q2", "theta_rad", "bs_transmittance",
        "l_fake", "fake_rate_cps", "herald_rate_cps",
        "eta0_1", "tau1_us", "eta0_2", "tau2_us",
        "sigma_rad", "detuning_khz", "t1_ns", "t2_ns",
        "phases_per_lo", "samples_per_basis",
        "mle_max_iterations", "mle_convergence_tol",
        "envelope_gamma_per_us", "envelope_t0_ns",
        "trace_t_min_ns", "trace_dt_ns", "trace_points",
        "threads"};
    return keys;
}

} // namespace

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str());
}

ExperimentConfig ExperimentConfig::from_text(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto trim = [](std::string& s) {
            const auto a = s.find_first_not_of(" \t");
            const auto b = s.find_last_not_of(" \t");
            s = (a == std::string::npos) ? "" : s.substr(a, b - a + 1);
        };
        trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected 'key = value'");
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 1);
        trim(key);
        trim(val);
        if (!known_keys().count(key))
            throw ConfigError("unknown config key '" + key + "'");
        if (kv.count(key)) throw ConfigError("duplicate config key '" + key + "'");
        if (val.empty()) throw ConfigError("empty value for config key '" + key + "'");
        kv[key] = val;
    }

    auto number = [&kv](const std::string& key) {
        const std::string& tok = kv.at(key);
        try {
            std::size_t used = 0;
            const double v = std::stod(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("malformed number for config key '" + key + "'");
        }
    };

    ExperimentConfig cfg;
    if (!kv.count("seed")) throw ConfigError("config key 'seed' is mandatory");
    {
        const std::string& tok = kv.at("seed");
        try {
            std::size_t used = 0;
            cfg.seed = std::stoull(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ConfigError("malformed seed value");
        }
    }

    if (kv.count("cutoff")) {
        cfg.source.cutoff = Cutoff{static_cast<int>(number("cutoff"))};
        cfg.plan.cutoff = cfg.source.cutoff;
    }
    if (kv.count("q1")) cfg.source.q1 = number("q1");
    if (kv.count("q2")) cfg.source.q2 = number("q2");
    if (kv.count("theta_rad")) cfg.source.theta = number("theta_rad");
    if (kv.count("bs_transmittance"))
        cfg.source.bs = BeamSplitterParams::from_transmittance(number("bs_transmittance"));

    const bool has_rates = kv.count("fake_rate_cps") || kv.count("herald_rate_cps");
    if (kv.count("l_fake") && has_rates)
        throw ConfigError("give either l_fake or fake/herald rates, not both");
    if (kv.count("l_fake")) cfg.fake = FakeCountParams{number("l_fake")};
    if (has_rates) {
        if (!kv.count("fake_rate_cps") || !kv.count("herald_rate_cps"))
            throw ConfigError("fake_rate_cps and herald_rate_cps go together");
        cfg.fake = FakeCountParams::from_rates(number("fake_rate_cps"),
                                               number("herald_rate_cps"));
    }

    if (kv.count("eta0_1")) cfg.decay1.eta0 = number("eta0_1");
    if (kv.count("tau1_us")) cfg.decay1.tau = number("tau1_us") * 1e-6;
    if (kv.count("eta0_2")) cfg.decay2.eta0 = number("eta0_2");
    if (kv.count("tau2_us")) cfg.decay2.tau = number("tau2_us") * 1e-6;
    if (kv.count("sigma_rad")) cfg.dephasing.sigma = number("sigma_rad");
    if (kv.count("detuning_khz"))
        cfg.release.delta_omega = 2.0 * kPi * number("detuning_khz") * 1e3;
    if (kv.count("t1_ns")) cfg.release.t1 = number("t1_ns") * 1e-9;
    if (kv.count("t2_ns")) cfg.release.t2 = number("t2_ns") * 1e-9;

    if (kv.count("phases_per_lo"))
        cfg.plan.bases = homodyne_basis_grid(static_cast<int>(number("phases_per_lo")));
    if (kv.count("samples_per_basis"))
        cfg.plan.samples_per_basis = static_cast<int>(number("samples_per_basis"));
    if (kv.count("mle_max_iterations"))
        cfg.plan.max_iterations = static_cast<int>(number("mle_max_iterations"));
    if (kv.count("mle_convergence_tol"))
        cfg.plan.convergence_tol = number("mle_convergence_tol");

    if (kv.count("envelope_gamma_per_us")) cfg.envelope.gamma = number("envelope_gamma_per_us") * 1e6;
    if (kv.count("envelope_t0_ns")) cfg.envelope.t_start = number("envelope_t0_ns") * 1e-9;
    if (kv.count("trace_t_min_ns")) cfg.envelope.t_min = number("trace_t_min_ns") * 1e-9;
    if (kv.count("trace_dt_ns")) cfg.envelope.dt = number("trace_dt_ns") * 1e-9;
    if (kv.count("trace_points")) cfg.envelope.n_points = static_cast<int>(number("trace_points"));
    if (kv.count("threads")) cfg.threads = static_cast<int>(number("threads"));

    cfg.check();
    return cfg;
}

void ExperimentConfig::check() const {
    try {
        source.check();
        fake.check();
        decay1.check();
        decay2.check();
        dephasing.check();
        release.check();
        plan.check();
        envelope.check();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (threads < 1) throw ConfigError("threads must be >= 1");
}

std::string ExperimentConfig::canonical_text() const {
    std::ostringstream out;
    const auto f = io::format_double;
    out << "seed = " << seed << '\n'
        << "cutoff = " << source.cutoff.n_max << '\n'
        << "q1 = " << f(source.q1) << '\n'
        << "q2 = " << f(source.q2) << '\n'
        << "theta_rad = " << f(source.theta) << '\n'
        << "bs_t_re = " << f(source.bs.t.real()) << '\n'
        << "bs_t_im = " << f(source.bs.t.imag()) << '\n'
        << "bs_r_re = " << f(source.bs.r.real()) << '\n'
        << "bs_r_im = " << f(source.bs.r.imag()) << '\n'
        << "l_fake = " << f(fake.l_fake) << '\n'
        << "eta0_1 = " << f(decay1.eta0) << '\n'
        << "tau1 = " << f(decay1.tau) << '\n'
        << "eta0_2 = " << f(decay2.eta0) << '\n'
        << "tau2 = " << f(decay2.tau) << '\n'
        << "sigma_rad = " << f(dephasing.sigma) << '\n'
        << "delta_omega = " << f(release.delta_omega) << '\n'
        << "t1 = " << f(release.t1) << '\n'
        << "t2 = " << f(release.t2) << '\n'
        << "samples_per_basis = " << plan.samples_per_basis << '\n'
        << "mle_max_iterations = " << plan.max_iterations << '\n'
        << "mle_convergence_tol = " << f(plan.convergence_tol) << '\n'
        << "envelope_gamma = " << f(envelope.gamma) << '\n'
        << "envelope_t_start = " << f(envelope.t_start) << '\n'
        << "trace_t_min = " << f(envelope.t_min) << '\n'
        << "trace_dt = " << f(envelope.dt) << '\n'
        << "trace_points = " << envelope.n_points << '\n';
    out << "bases =";
    for (const auto& b : plan.bases) out << ' ' << f(b.phi1) << ',' << f(b.phi2);
    out << '\n';
    return out.str();
}

std::uint64_t ExperimentConfig::config_hash() const {
    const std::string text = canonical_text();
    return fnv1a64(text.data(), text.size());
}

LossParams ExperimentConfig::losses_at_release() const {
    return {1.0 - decay1.efficiency_at(release.t1), 1.0 - decay2.efficiency_at(release.t2)};
}

} // namespace dualrail
