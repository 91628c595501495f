#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace erarag {

using NodeId = std::uint64_t;

enum class ProviderKind { mock, remote };

// Invalid flag/parameter combinations supplied by the caller.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed data handed to an operation (dimension mismatch, empty input, ...).
struct InputError : std::runtime_error {
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Embedding/summarization backend failure (transport, HTTP status, bad payload).
struct ProviderError : std::runtime_error {
    explicit ProviderError(const std::string& msg, int attempts = 1)
        : std::runtime_error(msg), attempts_made(attempts) {}
    int attempts_made;
};

// Snapshot file is not in the expected format or version.
struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// Snapshot parsed but violates a structural invariant; names the violation.
struct IntegrityError : std::runtime_error {
    explicit IntegrityError(const std::string& msg) : std::runtime_error(msg) {}
};

// Misuse of an API (e.g. recording costs with no phase open).
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace erarag
