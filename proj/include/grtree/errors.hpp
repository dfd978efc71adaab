#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace grtree {

// Invalid configuration, model, or argument values. CLI maps this to exit code 2.
using ConfigError = std::invalid_argument;

// A configured resource cap (individuals, series terms as memory proxy) was hit.
// CLI maps this to exit code 3.
class ResourceCapError : public std::runtime_error {
 public:
  explicit ResourceCapError(const std::string& what) : std::runtime_error(what) {}
};

// An internal invariant failed; indicates a bug, never bad user input.
// CLI maps this to exit code 4.
class InternalError : public std::logic_error {
 public:
  explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

// A series evaluation hit its hard term cap before the tail bound closed.
// Carries the partial sum so callers can report how far it got.
class SeriesError : public std::runtime_error {
 public:
  SeriesError(const std::string& what, double partial_sum, std::uint64_t terms)
      : std::runtime_error(what), partial_sum(partial_sum), terms(terms) {}
  double partial_sum;
  std::uint64_t terms;
};

}  // namespace grtree
