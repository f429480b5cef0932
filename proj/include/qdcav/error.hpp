#pragma once

#include <stdexcept>
#include <string>

namespace qdcav {

// Invalid user input: parameters, configuration files, CLI arguments.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A numerical pathology the caller cannot fix by retrying: a singular
// steady-state system, a Hamiltonian that breaks excitation conservation,
// a density matrix that is not positive within tolerance.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Reading or writing an output file failed.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qdcav
