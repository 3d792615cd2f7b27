#pragma once

#include <stdexcept>
#include <string>

namespace transgraph {

// Base class for all pipeline errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// --- gateway ---

// Network or HTTP failure that survived the retry budget.
struct TransportError : Error {
    using Error::Error;
};

// Backend produced no usable text after retries (empty response, or a
// scripted mock with no entry for the request).
struct BackendRefusal : Error {
    using Error::Error;
};

// Structured-output parsing failed after all repair retries. Carries the
// last raw response for diagnostics.
struct StructureError : Error {
    StructureError(const std::string& msg, std::string raw)
        : Error(msg), raw_text(std::move(raw)) {}
    std::string raw_text;
};

// --- chunking ---

struct EmptyDocument : Error {
    using Error::Error;
};

// Chunk proposal omits or duplicates a sentence it was required to cover.
struct CoverageError : Error {
    using Error::Error;
};

// --- graph ---

// Relation text could not be mapped to the label schema.
struct UnknownLabel : Error {
    using Error::Error;
};

struct ChunkCountMismatch : Error {
    using Error::Error;
};

// --- translation ---

struct TranslationError : Error {
    TranslationError(const std::string& msg, int chunk)
        : Error(msg), chunk_id(chunk) {}
    int chunk_id;
};

// --- metrics ---

struct EmptyReference : Error {
    using Error::Error;
};

struct NoTerms : Error {
    using Error::Error;
};

struct PartitionMismatch : Error {
    using Error::Error;
};

struct ParseError : Error {
    using Error::Error;
};

struct UnknownDocument : Error {
    using Error::Error;
};

// --- cohesion annotation grammar ---

// Unbalanced bracket/angle syntax in an annotated text.
struct MalformedSpan : Error {
    using Error::Error;
};

// Unknown attribute key, or a disallowed value combination.
struct InvalidAttribute : Error {
    using Error::Error;
};

struct MissingEvalAttrs : Error {
    using Error::Error;
};

struct EmptySpanList : Error {
    using Error::Error;
};

struct ParseFailure : Error {
    using Error::Error;
};

// --- collections / runs ---

struct ManifestError : Error {
    using Error::Error;
};

struct DuplicateId : Error {
    using Error::Error;
};

struct CollectionMismatch : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace transgraph
