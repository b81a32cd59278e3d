#pragma once

#include <stdexcept>
#include <string>

namespace rain {

// Shape/precondition violations on module contracts.
struct contract_error : std::logic_error {
    using std::logic_error::logic_error;
};

// Invalid user-facing input (CLI flags, config keys, malformed requests).
struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem / serialization failures, including corrupt file formats.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A required artifact (dataset, checkpoint) is absent.
struct missing_prerequisite : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite values, divergence, degenerate geometry.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace rain
