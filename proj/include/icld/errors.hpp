#pragma once

#include <stdexcept>
#include <string>

namespace icld {

// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input file (bad JSON, bad JSONL line, bad config).
class ParseError : public Error { public: using Error::Error; };

// An invariant of a loaded object is violated; the message names the
// first violated invariant.
class ValidationError : public Error { public: using Error::Error; };

// Requested sample size exceeds the available population.
class SizeError : public Error { public: using Error::Error; };

// The (filtered) demonstration pool has fewer than k eligible items.
class PoolTooSmallError : public Error { public: using Error::Error; };

// Label flipping on a schema with fewer than two labels.
class DegenerateSchemaError : public Error { public: using Error::Error; };

// A few-shot prompt was requested without a matching demonstration set.
class MissingDemosError : public Error { public: using Error::Error; };

// A template placeholder cannot be resolved, or {label} is missing.
class TemplateError : public Error { public: using Error::Error; };

// Embedding input is empty after trimming.
class EmptyTextError : public Error { public: using Error::Error; };

// Remote embedding provider failure; message carries the attempt count.
class ProviderError : public Error { public: using Error::Error; };

class DimMismatchError : public Error { public: using Error::Error; };

// Transport-level model-call failure after retries were exhausted.
class TransportError : public Error { public: using Error::Error; };

// HTTP 429 from the model endpoint after retries were exhausted.
class RateLimitError : public Error { public: using Error::Error; };

// Two runs passed to the ledger builder do not cover the same instances.
class MismatchedRunsError : public Error { public: using Error::Error; };

// Transition breakdown over an empty ISIF-both subset.
class EmptySubsetError : public Error { public: using Error::Error; };

class EmptyInputError : public Error { public: using Error::Error; };

// A cell referenced by an aggregation is absent or incomplete.
class IncompleteCellError : public Error { public: using Error::Error; };

class BackendUnavailableError : public Error { public: using Error::Error; };

class IoError : public Error { public: using Error::Error; };

class ConfigError : public Error { public: using Error::Error; };

}  // namespace icld
