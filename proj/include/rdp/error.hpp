#pragma once

#include <stdexcept>
#include <string>

namespace rdp {

/// Base for every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters or unknown names supplied by the caller.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A precondition of an operation was violated (programming error on the caller side).
class ContractViolation : public Error {
public:
    using Error::Error;
};

/// Table construction produced nothing usable or failed self-verification.
class BuildError : public Error {
public:
    using Error::Error;
};

/// A table file could not be read. `field()` names the header field or section that failed.
class LoadError : public Error {
public:
    LoadError(std::string field, const std::string& what)
        : Error("load error [" + field + "]: " + what), field_(std::move(field)), detail_(what) {}

    const std::string& field() const noexcept { return field_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string field_;
    std::string detail_;
};

} // namespace rdp
