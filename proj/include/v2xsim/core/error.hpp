#pragma once

#include <stdexcept>
#include <string>

namespace v2x {

// Invalid scenario/model configuration detected before or during a run.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed external input (trace CSV, config file, weight file).
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Tensor/layer dimension mismatch.
struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

// Out-of-range query against a trace or log.
struct QueryError : std::runtime_error {
    explicit QueryError(const std::string& what) : std::runtime_error(what) {}
};

// Training produced a non-finite loss.
struct TrainingDiverged : std::runtime_error {
    explicit TrainingDiverged(const std::string& what) : std::runtime_error(what) {}
};

} // namespace v2x
