#pragma once

#include <stdexcept>
#include <string>

namespace lqproj {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Vector or basis dimensions inconsistent with the ambient space.
class DimensionMismatch : public Error {
public:
    explicit DimensionMismatch(const std::string& msg) : Error(msg) {}
};

// Supplied basis vectors are not linearly independent (after column
// normalization the smallest singular value falls below the threshold).
class DegenerateBasis : public Error {
public:
    explicit DegenerateBasis(const std::string& msg) : Error(msg) {}
};

// Inner solve hit its iteration cap with the first-order residual still
// above tolerance.
class SolverDivergence : public Error {
public:
    explicit SolverDivergence(const std::string& msg) : Error(msg) {}
};

// Brute-force reference solver only handles subspaces of rank <= 3.
class OracleRankTooHigh : public Error {
public:
    explicit OracleRankTooHigh(const std::string& msg) : Error(msg) {}
};

// Regularity ratio is undefined: the point lies in both subspaces.
class PointInIntersection : public Error {
public:
    explicit PointInIntersection(const std::string& msg) : Error(msg) {}
};

// Too few usable positive entries to fit a linear convergence rate.
class InsufficientDecay : public Error {
public:
    explicit InsufficientDecay(const std::string& msg) : Error(msg) {}
};

// Alternating driver hit its iteration cap while still far from its limit.
class NonConvergence : public Error {
public:
    explicit NonConvergence(const std::string& msg) : Error(msg) {}
};

// Experiment configuration is missing fields, ill-typed, or self-inconsistent.
class ConfigParseError : public Error {
public:
    explicit ConfigParseError(const std::string& msg) : Error(msg) {}
};

// A quantity that is nonnegative in exact arithmetic came out negative by
// more than the floating-point slack allows.
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& msg) : Error(msg) {}
};

} // namespace lqproj
