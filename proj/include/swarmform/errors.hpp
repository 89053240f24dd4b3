#pragma once

#include <stdexcept>
#include <string>

namespace swarmform {

// Base of every failure this library raises. The what() string carries the
// diagnostic; the subclass names the violated contract.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Incidence column without exactly one +1 and one -1.
struct MalformedIncidence : Error { using Error::Error; };

// Underlying undirected graph is not connected.
struct DisconnectedGraph : Error { using Error::Error; };

// Desired displacements are inconsistent around some cycle.
struct UnrealizableDisplacements : Error { using Error::Error; };

// Vector/matrix sizes do not match the formation spec.
struct DimensionMismatch : Error { using Error::Error; };

// An argument that must be strictly positive is not.
struct NonpositiveInput : Error { using Error::Error; };

// An agent view lacks (or duplicates) a message for an incident edge.
struct MissingNeighborMessage : Error { using Error::Error; };

// A linear solve that should be positive definite failed numerically.
struct SingularSystem : Error { using Error::Error; };

// Integration produced a non-finite state component.
struct UnstableStep : Error { using Error::Error; };

// Input file is not syntactically valid.
struct ParseError : Error { using Error::Error; };

// Input file is well-formed but violates a model invariant.
struct ValidationError : Error { using Error::Error; };

}  // namespace swarmform
