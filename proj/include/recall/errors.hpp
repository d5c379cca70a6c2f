#pragma once

#include <stdexcept>
#include <string>

namespace recall {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

// A stratum was given no sample (n_s = 0) where an estimate needs one.
class EmptySampleError : public Error {
public:
    using Error::Error;
};

// Recall estimate is 0/0: no relevant documents were sampled anywhere.
class UndefinedEstimateError : public Error {
public:
    using Error::Error;
};

class NoRelevantSampledError : public Error {
public:
    using Error::Error;
};

// Successor ratio requested at a point with zero probability.
class UndefinedSupportError : public Error {
public:
    using Error::Error;
};

class StratifiedInputError : public Error {
public:
    using Error::Error;
};

class InfeasibleAllocationError : public Error {
public:
    using Error::Error;
};

class UnknownScenarioError : public Error {
public:
    using Error::Error;
};

class MissingMethodError : public Error {
public:
    using Error::Error;
};

class ScenarioSamplingError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + message), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace recall
