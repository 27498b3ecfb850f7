#pragma once

#include <cstddef>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace cosetwalk {

// Raised when a caller violates a documented precondition.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when an interning table would grow past its state budget.
class BudgetExceeded : public std::runtime_error {
 public:
  explicit BudgetExceeded(std::size_t budget)
      : std::runtime_error("interning budget of " + std::to_string(budget) +
                           " states exceeded (set COSETWALK_BUDGET to raise it)"),
        budget_(budget) {}

  std::size_t budget() const noexcept { return budget_; }

 private:
  std::size_t budget_;
};

// A Radon-Nikodym ratio whose denominator is statistically indistinguishable from 0.
class DegenerateRatio : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kDefaultBudget = 50'000'000;

// Interning budget: COSETWALK_BUDGET if set to a positive integer, else 5e7.
inline std::size_t interning_budget() {
  if (const char* env = std::getenv("COSETWALK_BUDGET")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return kDefaultBudget;
}

}  // namespace cosetwalk
