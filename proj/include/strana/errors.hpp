#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace strana {

// Engine error categories. The CLI maps these to exit codes: schema and
// invalid-input problems exit 2, exhausted budgets exit 3.
enum class ErrorCategory {
  kInvalidInput,
  kConditioning,
  kBudget,
  kGrid,
  kRegularity,
  kSchema,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, std::string message)
      : std::runtime_error(std::move(message)), category_(category) {}

  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

struct InvalidInputError : Error {
  explicit InvalidInputError(std::string message)
      : Error(ErrorCategory::kInvalidInput, std::move(message)) {}
};

// Conditioning on a zero-probability type.
struct ConditioningError : Error {
  explicit ConditioningError(std::string message)
      : Error(ErrorCategory::kConditioning, std::move(message)) {}
};

struct BudgetError : Error {
  BudgetError(std::string message, double computed_count)
      : Error(ErrorCategory::kBudget, std::move(message)), count(computed_count) {}
  double count = 0.0;
};

// A catalog constructor was asked for grids that do not support the
// requested construction. Constructors fail loudly instead of snapping.
struct GridError : Error {
  explicit GridError(std::string message)
      : Error(ErrorCategory::kGrid, std::move(message)) {}
};

struct RegularityError : Error {
  explicit RegularityError(std::string message)
      : Error(ErrorCategory::kRegularity, std::move(message)) {}
};

struct SchemaError : Error {
  SchemaError(std::string path, std::string message)
      : Error(ErrorCategory::kSchema, path + ": " + message), path(std::move(path)) {}
  std::string path;
};

}  // namespace strana
