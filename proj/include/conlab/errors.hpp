#pragma once

#include <stdexcept>
#include <string>

namespace conlab {

// Malformed input, bad arguments, or a contract violation (e.g. a pattern
// source yielding a graph outside its declared model). CLI exit code 2.
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

// A guard against work growing past a configured cap (model enumeration,
// partition search, subset sweeps). CLI exit code 3.
class resource_error : public std::runtime_error {
public:
    explicit resource_error(const std::string& what) : std::runtime_error(what) {}
};

// A limit probe exhausted its round budget before reaching its tolerance.
// CLI exit code 4.
class convergence_error : public std::runtime_error {
public:
    explicit convergence_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace conlab
