#include "dualrail/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dualrail/rng.hpp"

namespace dualrail::io {

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// lines, stripped of trailing \r, comment/blank lines removed
std::vector<std::string> data_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        lines.push_back(line);
    }
    return lines;
}

double parse_double(const std::string& tok, const std::filesystem::path& path) {
    try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("malformed number '" + tok + "' in " + path.string());
    }
}

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> toks;
    std::istringstream in(line);
    std::string t;
    while (in >> t) toks.push_back(t);
    return toks;
}

void expect_header(const std::string& text, const std::string& kind,
                   const std::filesystem::path& path) {
    const std::string want = "# dualrail " + kind + " v1";
    if (text.rfind(want, 0) != 0)
        throw ConfigError("file " + path.string() + " is not a '" + kind + "' file");
}

} // namespace

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void atomic_write_text(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write file: " + tmp.string());
        out << content;
        if (!out.good()) throw ConfigError("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::uint64_t hash_file(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    return fnv1a64(text.data(), text.size());
}

// ---------------------------------------------------------------------------
// density matrix
// ---------------------------------------------------------------------------

void write_density_matrix(const std::filesystem::path& path, const DensityMatrix& rho) {
    std::ostringstream out;
    out << "# dualrail density-matrix v1\n";
    out << "# basis row-major in (n1,n2), mode 1 slow; rows: k l m n re im\n";
    out << "cutoff " << rho.cutoff().n_max << "\n";
    const int d = rho.mode_dim();
    for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l)
            for (int m = 0; m < d; ++m)
                for (int n = 0; n < d; ++n) {
                    const Complex v = rho.element(k, l, m, n);
                    out << k << ' ' << l << ' ' << m << ' ' << n << ' '
                        << format_double(v.real()) << ' ' << format_double(v.imag())
                        << '\n';
                }
    atomic_write_text(path, out.str());
}

DensityMatrix read_density_matrix(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    expect_header(text, "density-matrix", path);
    const auto lines = data_lines(text);
    if (lines.empty() || split_ws(lines[0]).size() != 2 || split_ws(lines[0])[0] != "cutoff")
        throw ConfigError("missing cutoff line in " + path.string());
    const int n_max = static_cast<int>(parse_double(split_ws(lines[0])[1], path));
    Cutoff cutoff{n_max};
    const int d = cutoff.dim();
    Matrix m = Matrix::Zero(cutoff.dim2(), cutoff.dim2());
    const std::size_t expected = static_cast<std::size_t>(cutoff.dim2()) * cutoff.dim2();
    if (lines.size() - 1 != expected)
        throw ConfigError("wrong element count in " + path.string());
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto toks = split_ws(lines[i]);
        if (toks.size() != 6) throw ConfigError("malformed row in " + path.string());
        const int k = static_cast<int>(parse_double(toks[0], path));
        const int l = static_cast<int>(parse_double(toks[1], path));
        const int mm = static_cast<int>(parse_double(toks[2], path));
        const int n = static_cast<int>(parse_double(toks[3], path));
        if (k < 0 || l < 0 || mm < 0 || n < 0 || k >= d || l >= d || mm >= d || n >= d)
            throw ConfigError("index out of range in " + path.string());
        m(k * d + l, mm * d + n) = {parse_double(toks[4], path), parse_double(toks[5], path)};
    }
    return DensityMatrix(cutoff, std::move(m));
}

// ---------------------------------------------------------------------------
// quadrature samples
// ---------------------------------------------------------------------------

void write_batches(const std::filesystem::path& path,
                   std::span<const QuadratureBatch> batches) {
    std::ostringstream out;
    out << "# dualrail samples v1\n";
    out << "# columns: phi1 phi2 x1 x2\n";
    for (const auto& batch : batches)
        for (const auto& s : batch.samples)
            out << format_double(batch.basis.phi1) << ' ' << format_double(batch.basis.phi2)
                << ' ' << format_double(s[0]) << ' ' << format_double(s[1]) << '\n';
    atomic_write_text(path, out.str());
}

std::vector<QuadratureBatch> read_batches(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    expect_header(text, "samples", path);
    std::vector<QuadratureBatch> batches;
    for (const auto& line : data_lines(text)) {
        const auto toks = split_ws(line);
        if (toks.size() != 4) throw ConfigError("malformed sample row in " + path.string());
        const double phi1 = parse_double(toks[0], path);
        const double phi2 = parse_double(toks[1], path);
        if (batches.empty() || batches.back().basis.phi1 != phi1 ||
            batches.back().basis.phi2 != phi2) {
            QuadratureBatch b;
            b.basis = {phi1, phi2};
            batches.push_back(std::move(b));
        }
        batches.back().samples.push_back({parse_double(toks[2], path), parse_double(toks[3], path)});
    }
    if (batches.empty()) throw ConfigError("no samples in " + path.string());
    return batches;
}

// ---------------------------------------------------------------------------
// envelopes and traces
// ---------------------------------------------------------------------------

void write_envelope(const std::filesystem::path& path, const Envelope& env) {
    std::ostringstream out;
    out << "# dualrail envelope v1\n";
    out << "# columns: t value\n";
    for (Eigen::Index i = 0; i < env.times.size(); ++i)
        out << format_double(env.times(i)) << ' ' << format_double(env.values(i)) << '\n';
    atomic_write_text(path, out.str());
}

Envelope read_envelope(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    expect_header(text, "envelope", path);
    std::vector<double> ts, vs;
    for (const auto& line : data_lines(text)) {
        const auto toks = split_ws(line);
        if (toks.size() != 2) throw ConfigError("malformed envelope row in " + path.string());
        ts.push_back(parse_double(toks[0], path));
        vs.push_back(parse_double(toks[1], path));
    }
    Eigen::VectorXd t = Eigen::Map<Eigen::VectorXd>(ts.data(), static_cast<Eigen::Index>(ts.size()));
    Eigen::VectorXd v = Eigen::Map<Eigen::VectorXd>(vs.data(), static_cast<Eigen::Index>(vs.size()));
    if (t.size() < 2) throw ConfigError("envelope needs at least two samples: " + path.string());
    // validate instead of renormalizing so the round trip stays bit exact
    const double norm2 = v.squaredNorm() * (t(1) - t(0));
    if (std::abs(norm2 - 1.0) > 1e-9)
        throw ConfigError("envelope in " + path.string() + " is not unit normalized");
    return {std::move(t), std::move(v)};
}

void write_traces(const std::filesystem::path& path, const TraceEnsemble& ens) {
    std::ostringstream out;
    out << "# dualrail traces v1\n";
    out << "# columns: mode phi1 phi2 x(t_0) x(t_1) ...\n";
    out << "grid";
    for (Eigen::Index i = 0; i < ens.times.size(); ++i) out << ' ' << format_double(ens.times(i));
    out << '\n';
    for (Eigen::Index row = 0; row < ens.x1.rows(); ++row) {
        const auto& b = ens.bases[static_cast<std::size_t>(row)];
        for (int mode = 1; mode <= 2; ++mode) {
            out << mode << ' ' << format_double(b.phi1) << ' ' << format_double(b.phi2);
            const auto& m = mode == 1 ? ens.x1 : ens.x2;
            for (Eigen::Index c = 0; c < m.cols(); ++c) out << ' ' << format_double(m(row, c));
            out << '\n';
        }
    }
    atomic_write_text(path, out.str());
}

TraceEnsemble read_traces(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    expect_header(text, "traces", path);
    const auto lines = data_lines(text);
    if (lines.empty()) throw ConfigError("empty traces file: " + path.string());
    const auto grid_toks = split_ws(lines[0]);
    if (grid_toks.size() < 3 || grid_toks[0] != "grid")
        throw ConfigError("missing grid line in " + path.string());
    TraceEnsemble ens;
    ens.times.resize(static_cast<Eigen::Index>(grid_toks.size()) - 1);
    for (std::size_t i = 1; i < grid_toks.size(); ++i)
        ens.times(static_cast<Eigen::Index>(i - 1)) = parse_double(grid_toks[i], path);
    const Eigen::Index len = ens.times.size();
    if ((lines.size() - 1) % 2 != 0)
        throw ConfigError("traces file must hold two rows per event: " + path.string());
    const Eigen::Index events = static_cast<Eigen::Index>((lines.size() - 1) / 2);
    ens.x1.resize(events, len);
    ens.x2.resize(events, len);
    ens.bases.resize(static_cast<std::size_t>(events));
    for (Eigen::Index ev = 0; ev < events; ++ev) {
        for (int mode = 1; mode <= 2; ++mode) {
            const auto toks = split_ws(lines[1 + static_cast<std::size_t>(ev) * 2 +
                                             static_cast<std::size_t>(mode - 1)]);
            if (static_cast<Eigen::Index>(toks.size()) != len + 3 ||
                toks[0] != std::to_string(mode))
                throw ConfigError("malformed trace row in " + path.string());
            ens.bases[static_cast<std::size_t>(ev)] = {parse_double(toks[1], path),
                                                       parse_double(toks[2], path)};
            auto& m = mode == 1 ? ens.x1 : ens.x2;
            for (Eigen::Index c = 0; c < len; ++c)
                m(ev, c) = parse_double(toks[static_cast<std::size_t>(c) + 3], path);
        }
    }
    return ens;
}

// ---------------------------------------------------------------------------
// reports
// ---------------------------------------------------------------------------

void write_report(const std::filesystem::path& path, const AnalysisReport& report,
                  const std::map<std::string, double>& extra) {
    std::ostringstream out;
    out << "# dualrail report v1\n";
    auto kv = [&out](const std::string& key, double v) {
        out << key << " = " << format_double(v) << '\n';
    };
    kv("log_negativity", report.log_negativity.value);
    if (report.log_negativity.error > 0.0)
        kv("log_negativity_err", report.log_negativity.error);
    kv("log_negativity_raw", report.log_negativity_raw);
    kv("wigner_origin", report.wigner_origin.value);
    if (report.wigner_origin.error > 0.0) kv("wigner_origin_err", report.wigner_origin.error);
    kv("one_photon_weight", report.one_photon_weight);
    kv("vacuum_weight", report.vacuum_weight);
    if (report.dephasing_sigma) kv("dephasing_sigma_rad", *report.dephasing_sigma);
    kv("off_diagonal_phase_rad", report.off_diagonal_phase);
    kv("off_diagonal_abs", report.off_diagonal_abs);
    if (report.amplitudes) {
        kv("alpha", report.amplitudes->alpha);
        kv("beta", report.amplitudes->beta);
        kv("alpha_raw", report.amplitudes->alpha_raw);
        kv("beta_raw", report.amplitudes->beta_raw);
    }
    if (report.rotation_frequency_hz) kv("rotation_frequency_hz", *report.rotation_frequency_hz);
    for (const auto& [key, v] : extra) kv(key, v);
    atomic_write_text(path, out.str());
}

std::map<std::string, double> read_key_values(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    std::map<std::string, double> out;
    for (const auto& line : data_lines(text)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 1);
        const auto trim = [](std::string& s) {
            const auto a = s.find_first_not_of(" \t");
            const auto b = s.find_last_not_of(" \t");
            s = (a == std::string::npos) ? "" : s.substr(a, b - a + 1);
        };
        trim(key);
        trim(val);
        if (!key.empty()) out[key] = parse_double(val, path);
    }
    return out;
}

} // namespace dualrail::io
