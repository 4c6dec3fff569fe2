#pragma once

#include <stdexcept>
#include <string>

namespace valz {

// Base class for everything thrown by the library.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid value for a domain-typed argument (n = 0, non-prime, m not dividing m', ...).
struct DomainError : Error {
    explicit DomainError(const std::string& what) : Error(what) {}
};

// API misuse: empty input lists, missing required members.
struct UsageError : Error {
    explicit UsageError(const std::string& what) : Error(what) {}
};

// A query walked past the prefix of a chain that has no repeating cycle.
struct DepthExceeded : Error {
    explicit DepthExceeded(const std::string& what) : Error(what) {}
};

// A documented side condition does not hold (caller must rescale first).
struct PreconditionError : Error {
    explicit PreconditionError(const std::string& what) : Error(what) {}
};

// Configured caps (DNF size, subset enumeration, 64-bit moduli) exceeded.
struct ResourceLimit : Error {
    explicit ResourceLimit(const std::string& what) : Error(what) {}
};

// Input is outside the implemented fragment (e.g. value quantifiers over a
// prefix-only chain, symbolic value parameters in elimination mode).
struct Unsupported : Error {
    explicit Unsupported(const std::string& what) : Error(what) {}
};

// Text input rejected; carries a byte offset into the input.
struct ParseError : Error {
    size_t position;
    ParseError(const std::string& what, size_t pos)
        : Error(what + " (at position " + std::to_string(pos) + ")"), position(pos) {}
};

// Well-formed text with a sort violation (group variable in a value slot etc.).
struct SortError : Error {
    explicit SortError(const std::string& what) : Error(what) {}
};

// An internal invariant failed; indicates a bug, not bad input.
struct InternalError : Error {
    explicit InternalError(const std::string& what) : Error(what) {}
};

} // namespace valz
