#pragma once

#include <stdexcept>
#include <string>

namespace dualrail {

// Bad configuration or malformed input files. CLI exit status 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical diagnostics failure at run time (degenerate input, failed
// normalization check, herald impossible, ambiguous PCA mode, ...).
// CLI exit status 3.
struct DiagnosticsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace dualrail
