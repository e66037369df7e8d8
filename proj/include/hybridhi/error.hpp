#pragma once

#include <stdexcept>
#include <string>

namespace hybridhi {

// Exception families map onto CLI exit codes: config 2, data 3, training 4.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const noexcept { return 1; }
};

class ConfigError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 2; }
};

class DataError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

class TrainingError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 4; }
};

// Raised by the fleet loader; carries the offending file and 1-based row
// (0 when the problem is not tied to a row).
class LoadError : public DataError {
public:
    LoadError(std::string unit, std::size_t row, const std::string& what)
        : DataError(format(unit, row, what)), unit_(std::move(unit)), row_(row) {}

    const std::string& unit() const noexcept { return unit_; }
    std::size_t row() const noexcept { return row_; }

private:
    static std::string format(const std::string& unit, std::size_t row, const std::string& what) {
        std::string msg = what;
        if (!unit.empty()) msg += " (unit " + unit;
        if (!unit.empty() && row > 0) msg += ", row " + std::to_string(row);
        if (!unit.empty()) msg += ")";
        return msg;
    }

    std::string unit_;
    std::size_t row_;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

}  // namespace hybridhi
