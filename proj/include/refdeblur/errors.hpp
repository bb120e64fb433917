#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace refdeblur {

/// Base of every error the library throws. `code()` is a stable,
/// machine-readable tag used by the CLI's one-line error reports.
class Error : public std::runtime_error {
public:
    Error(std::string_view code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    [[nodiscard]] const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

/// Input too small for the requested operation (1x1 downscale, K too deep, ...).
class DegenerateSizeError : public Error {
public:
    explicit DegenerateSizeError(const std::string& what) : Error("degenerate_size", what) {}
};

/// Caller broke a documented precondition (shape mismatch, bad index, ...).
class ContractViolation : public Error {
public:
    explicit ContractViolation(const std::string& what) : Error("contract_violation", what) {}
};

/// Missing or shape-inconsistent weights for a consumer.
class WeightError : public Error {
public:
    explicit WeightError(const std::string& what) : Error("weight_error", what) {}
};

/// Malformed or unreadable serialized data (weight bundles, dumps, images).
class LoadError : public Error {
public:
    explicit LoadError(const std::string& what) : Error("load_error", what) {}
};

/// Dataset layout problems found while scanning.
class IngestionError : public Error {
public:
    explicit IngestionError(const std::string& what) : Error("ingestion_error", what) {}
};

namespace detail {

inline void require(bool ok, const std::string& what) {
    if (!ok) throw ContractViolation(what);
}

}  // namespace detail

}  // namespace refdeblur
