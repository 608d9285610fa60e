#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dualrail/analysis.hpp"
#include "dualrail/fock.hpp"
#include "dualrail/homodyne.hpp"

namespace dualrail::io {

// Text formats, 17 significant digits, bit-exact round trip. Writes are
// atomic (temp file + rename). Basis order is row-major in (n1, n2), mode 1
// slow, matching the in-memory layout.

// "<k> <l> <m> <n> <re> <im>" rows for <k,l|rho|m,n>
void write_density_matrix(const std::filesystem::path& path, const DensityMatrix& rho);
DensityMatrix read_density_matrix(const std::filesystem::path& path);

// "<phi1> <phi2> <x1> <x2>" rows, grouped by basis
void write_batches(const std::filesystem::path& path, std::span<const QuadratureBatch> batches);
std::vector<QuadratureBatch> read_batches(const std::filesystem::path& path);

// "<t> <value>" rows
void write_envelope(const std::filesystem::path& path, const Envelope& env);
Envelope read_envelope(const std::filesystem::path& path);

// "<mode> <phi1> <phi2> <x(t_0)> <x(t_1)> ..." rows, two per event
void write_traces(const std::filesystem::path& path, const TraceEnsemble& ens);
TraceEnsemble read_traces(const std::filesystem::path& path);

// "key = value" lines
void write_report(const std::filesystem::path& path, const AnalysisReport& report,
                  const std::map<std::string, double>& extra = {});
std::map<std::string, double> read_key_values(const std::filesystem::path& path);

void atomic_write_text(const std::filesystem::path& path, const std::string& content);
std::string format_double(double v); // %.17g
std::uint64_t hash_file(const std::filesystem::path& path);

} // namespace dualrail::io
