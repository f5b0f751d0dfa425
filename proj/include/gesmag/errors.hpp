#pragma once

#include <stdexcept>
#include <string>

namespace gesmag {

// Circle marks reaching code that only understands ADMGs/MAGs, or a graph of the wrong kind.
struct InvalidGraphKind : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Arguments outside an operation's domain: overlapping sets, cycles, unknown vertices.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

struct DegenerateData : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InsufficientSample : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A PAG whose representative graph is not a MAG, or does not map back to the same PAG.
struct InvalidMec : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace gesmag
