#pragma once

#include <stdexcept>
#include <string>

namespace nnmt {

/// Base class for all library errors.
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Violated mathematical precondition (m outside (0,n), gamma <= 0, beta > 1, ...).
class domain_error : public error {
public:
    explicit domain_error(const std::string& msg) : error(msg) {}
};

/// Invalid user-supplied data (malformed file, mixed dimensions, degenerate group, ...).
class data_error : public error {
public:
    explicit data_error(const std::string& msg) : error(msg) {}
};

} // namespace nnmt
