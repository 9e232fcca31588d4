#pragma once

#include <stdexcept>
#include <string>

namespace pacauction {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Parallel vectors (plan, rates, bids...) of different lengths.
class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Mechanism operation attempted without a regularity certificate, or a
// certificate that failed.
class RegularityError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Exact plan search would exceed its enumeration budget.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require_domain(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

inline void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionMismatch(std::string(what) + ": sizes " + std::to_string(a) +
                            " and " + std::to_string(b) + " differ");
  }
}

}  // namespace detail
}  // namespace pacauction
