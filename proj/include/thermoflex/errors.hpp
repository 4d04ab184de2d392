#pragma once

#include <stdexcept>
#include <string>

namespace thermoflex {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid or inconsistent physical/user parameters.
class ParameterError : public Error {
public:
    using Error::Error;
};

// Invalid run configuration (tick size, scenario layout, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Malformed input file (CSV, JSON).
class ParseError : public Error {
public:
    using Error::Error;
};

// Control rate outside the admissible set; the jump process would stop
// being a Markov chain.
class ControlSaturationError : public Error {
public:
    using Error::Error;
};

// No controllable mass at the comfort-band boundary.
class SingularStateError : public Error {
public:
    using Error::Error;
};

// Observer gain selection failed (degenerate determinant sensitivity).
class GainSelectionError : public Error {
public:
    using Error::Error;
};

// Numerical optimizer did not converge.
class SolverError : public Error {
public:
    using Error::Error;
};

}  // namespace thermoflex
