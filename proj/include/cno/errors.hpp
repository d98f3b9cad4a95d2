#pragma once

#include <stdexcept>
#include <string>

namespace cno {

// Typed failures. The CLI maps each family onto a process exit code.

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class BudgetInfeasible : public Error {
public:
    BudgetInfeasible(const std::string& what, double best_achieved)
        : Error(what), best_achieved_(best_achieved) {}
    double best_achieved() const noexcept { return best_achieved_; }

private:
    double best_achieved_;
};

/// A closed-form budget exceeded the representable integer range.
/// The offending quantity is kept in natural-log space.
class BudgetOverflow : public Error {
public:
    BudgetOverflow(const std::string& what, double log_value)
        : Error(what), log_value_(log_value) {}
    double log_value() const noexcept { return log_value_; }

private:
    double log_value_;
};

class PackingInfeasible : public Error {
public:
    PackingInfeasible(const std::string& what, std::size_t achieved)
        : Error(what), achieved_(achieved) {}
    std::size_t achieved() const noexcept { return achieved_; }

private:
    std::size_t achieved_;
};

class OracleDiverged : public Error {
public:
    OracleDiverged(const std::string& what, std::size_t step)
        : Error(what), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

class IntegrityError : public Error {
public:
    using Error::Error;
};

class Unsupported : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& field_path, const std::string& what)
        : Error(field_path + ": " + what), field_path_(field_path) {}
    const std::string& field_path() const noexcept { return field_path_; }

private:
    std::string field_path_;
};

}  // namespace cno
