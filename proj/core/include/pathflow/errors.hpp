#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pathflow {

// Invalid arguments are reported with std::invalid_argument.

class simulation_diverged : public std::runtime_error {
public:
    simulation_diverged(std::size_t index, const std::string& what)
        : std::runtime_error(what + " at index " + std::to_string(index)), index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

class too_large : public std::length_error {
public:
    using std::length_error::length_error;
};

class unsupported_capability : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class estimation_failed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Level grid would exceed the configured budget.
class grid_exhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace pathflow
