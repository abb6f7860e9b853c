#pragma once

#include <stdexcept>
#include <string>

namespace splitclust {

/// Malformed or uninterpretable input data (graph files, label files).
class data_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user-facing configuration: unknown keys, invalid flag combinations.
class usage_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical routine failed to meet its contract (e.g. eigensolver did not
/// converge within its iteration cap). Carries iteration diagnostics when the
/// failing routine is iterative.
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& what, long iterations = -1)
      : std::runtime_error(what), iterations_(iterations) {}

  long iterations() const noexcept { return iterations_; }

 private:
  long iterations_;
};

}  // namespace splitclust
