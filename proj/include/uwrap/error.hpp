#pragma once

#include <stdexcept>
#include <string>

namespace uwrap {

// Error categories; the CLI maps each to an exit code.
enum class ErrorKind {
    Config,    // usage / configuration problems
    Io,        // unreadable or unwritable files
    Parse,     // malformed input rows
    Schema,    // structurally valid input that does not match the expected schema
    Domain,    // numeric precondition violated (n = 0, empty input)
    Input,     // caller passed inconsistent arguments
    Lookup,    // unknown key / event id
    Training,  // a model cannot be fitted on the given data
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline Error config_error(const std::string& m) { return {ErrorKind::Config, m}; }
inline Error io_error(const std::string& m) { return {ErrorKind::Io, m}; }
inline Error parse_error(const std::string& m) { return {ErrorKind::Parse, m}; }
inline Error schema_error(const std::string& m) { return {ErrorKind::Schema, m}; }
inline Error domain_error(const std::string& m) { return {ErrorKind::Domain, m}; }
inline Error input_error(const std::string& m) { return {ErrorKind::Input, m}; }
inline Error lookup_error(const std::string& m) { return {ErrorKind::Lookup, m}; }
inline Error training_error(const std::string& m) { return {ErrorKind::Training, m}; }

}  // namespace uwrap
