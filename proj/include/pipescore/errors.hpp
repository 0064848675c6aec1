#pragma once

#include <stdexcept>
#include <string>

namespace pipescore {

// Bad inputs: manifests, sidecars, run configs, parameter ranges. Maps to CLI exit 1.
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Failures while processing accepted inputs: undecodable audio, missing
// coverage, undefined statistics. Maps to CLI exit 2.
class DataError : public std::runtime_error {
public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pipescore
