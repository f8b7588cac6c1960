#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace uavnet {

// Error categories map onto CLI exit codes:
// validation/config -> 2, numerical -> 3, I/O -> 4.

class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

class config_error : public validation_error {
public:
    explicit config_error(const std::string& msg) : validation_error(msg) {}
};

class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Fixed-point solver gave up; carries the reward iterates seen so far.
class iteration_limit_error : public numerical_error {
public:
    iteration_limit_error(const std::string& msg, std::vector<double> trace)
        : numerical_error(msg), iterate_trace(std::move(trace)) {}

    std::vector<double> iterate_trace;
};

class infeasible_error : public numerical_error {
public:
    explicit infeasible_error(const std::string& msg) : numerical_error(msg) {}
};

class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace uavnet
