#ifndef LOADPAT_ERROR_HPP
#define LOADPAT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace loadpat {

/// Malformed input, violated precondition or unreadable file.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Non-finite values or a diverged fit.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw DataError(message);
}

}  // namespace loadpat

#endif  // LOADPAT_ERROR_HPP
