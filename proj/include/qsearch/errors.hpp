#pragma once

#include <stdexcept>
#include <string>

namespace qsearch {

// Domain violations (bad probabilities, symbols, ranges) are reported as
// std::domain_error; this type marks work that exceeds a configured budget.
class ResourceError : public std::runtime_error {
 public:
  explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qsearch
