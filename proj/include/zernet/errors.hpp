#pragma once

#include <stdexcept>
#include <string>

namespace zernet {

// All library failures derive from Error. code() is a stable machine-readable
// class string; the CLI prints it verbatim in its one-line error reports, so
// values must not change between releases.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

// Argument outside its mathematical domain (radius, order, angle, size).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error("domain", what) {}
};

// Tensor or matrix dimensions do not match what an operation requires.
class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& what) : Error("shape", what) {}
};

// Malformed text input. line() is 1-based within the offending file.
class ParseError : public Error {
public:
    ParseError(const std::string& what, long line)
        : Error("parse", what + " (line " + std::to_string(line) + ")"), line_(line) {}
    long line() const noexcept { return line_; }

private:
    long line_;
};

// Least-squares system with numerical rank below the requested basis size.
class RankDeficiencyError : public Error {
public:
    RankDeficiencyError(const std::string& what, int rank)
        : Error("rank_deficient", what), rank_(rank) {}
    int rank() const noexcept { return rank_; }

private:
    int rank_;
};

// Geodesic patch with too few raw neighbors to be usable.
class SparsePatchError : public Error {
public:
    SparsePatchError(const std::string& what, int vertex)
        : Error("sparse_patch", what), vertex_(vertex) {}
    int vertex() const noexcept { return vertex_; }

private:
    int vertex_;
};

// Too many per-vertex operations failed for the batch result to be usable.
class AggregateFailureError : public Error {
public:
    AggregateFailureError(const std::string& what, int failed)
        : Error("aggregate_failure", what), failed_(failed) {}
    int failed() const noexcept { return failed_; }

private:
    int failed_;
};

// Operation invoked out of order (e.g. backward before forward).
class StateError : public Error {
public:
    explicit StateError(const std::string& what) : Error("state", what) {}
};

// Filesystem-level failure: missing file, unwritable path, refusal to
// overwrite without --force.
class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error("io", what) {}
};

// Recognized container with wrong magic, version, or field values.
class FormatError : public Error {
public:
    explicit FormatError(const std::string& what) : Error("format", what) {}
};

// Stored data fails its integrity check (truncation, hash mismatch).
class CorruptionError : public Error {
public:
    explicit CorruptionError(const std::string& what) : Error("corrupt", what) {}
};

// Bad configuration: unknown key, unparsable value, inconsistent settings.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error("config", what) {}
};

// Training produced a non-finite loss.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, int epoch)
        : Error("divergence", what), epoch_(epoch) {}
    int epoch() const noexcept { return epoch_; }

private:
    int epoch_;
};

}  // namespace zernet
