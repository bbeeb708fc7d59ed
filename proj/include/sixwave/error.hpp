#pragma once

#include <stdexcept>
#include <string>

namespace sixwave {

/// Broad failure classes; the CLI maps them onto exit codes.
enum class ErrorKind {
  Usage,     ///< bad arguments or configuration
  Regime,    ///< data outside the small-data ball a theorem needs
  Numeric,   ///< non-finite values, overflow, degenerate input
  Ordering,  ///< a monotone-iteration ordering failed
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace sixwave
