#ifndef LASSOPV_ERROR_HPP
#define LASSOPV_ERROR_HPP

#include <stdexcept>
#include <string>

namespace lassopv {

// Computation or invalid-input failure. Maps to CLI exit code 1.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// File-system or parse failure. Maps to CLI exit code 2.
struct IoError : Error {
  explicit IoError(const std::string& what) : Error(what) {}
};

}  // namespace lassopv

#endif
