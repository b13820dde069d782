#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace monocard {

/// Root of all toolkit exceptions.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnresolvedColumn : public Error {
public:
    using Error::Error;
};

class UnsupportedFeature : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(what + " (at offset " + std::to_string(offset) + ")"), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

class RuleNotApplicable : public Error {
public:
    using Error::Error;
};

class NoApplicableRule : public Error {
public:
    using Error::Error;
};

class MalformedPlan : public Error {
public:
    MalformedPlan(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    /// 1-based line (text plans) or row (tabular plans); 0 when not tied to a line.
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class MissingEstimate : public Error {
public:
    using Error::Error;
};

class StatementError : public Error {
public:
    StatementError(const std::string& what, std::size_t index)
        : Error("statement " + std::to_string(index) + ": " + what), index_(index) {}
    std::size_t index() const { return index_; }

private:
    std::size_t index_;
};

class EvalError : public Error {
public:
    using Error::Error;
};

class StaleStats : public Error {
public:
    using Error::Error;
};

class NotReproducible : public Error {
public:
    using Error::Error;
};

class AdapterUnavailable : public Error {
public:
    using Error::Error;
};

/// The target rejected a statement or EXPLAIN (syntax, unsupported feature, ...).
class TargetError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace monocard
