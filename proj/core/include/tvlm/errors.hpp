#pragma once

#include <stdexcept>
#include <string>

namespace tvlm {

// Shape mismatches between tensors; the message names both shapes.
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid argument values (negative timestamps, bad axes, bad config).
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An operation produced a NaN or infinity; names the offending op.
struct NonFiniteError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Backward called on a value that is not a recorded scalar loss over parameters.
struct StructuralError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Two forward runs of a supposedly deterministic function disagreed.
struct DeterminismError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-ASCII input to the tokenizer; names the byte offset.
struct EncodingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A time token that none of the parser rules match.
struct TimeParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Annotation or template invariant violations; lists field paths.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Versioned artifact with an unexpected schema value.
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Metric called on an input it defines no value for (e.g. empty query set).
struct EmptyInputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace tvlm
