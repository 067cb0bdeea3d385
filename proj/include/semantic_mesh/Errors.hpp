#pragma once

#include <stdexcept>
#include <string>

namespace semantic_mesh {

// Base for every error thrown by the library. The `kind()` string is stable and
// is what the CLI prints as the machine-parseable error tag.
class Error : public std::runtime_error
{
 public:
  Error(std::string kind, const std::string& what) : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

struct ConfigError : Error
{
  explicit ConfigError(const std::string& what) : Error("config", what) {}
};

struct InputError : Error
{
  explicit InputError(const std::string& what) : Error("input", what) {}
};

struct DegenerateSimplexError : Error
{
  explicit DegenerateSimplexError(const std::string& what) : Error("degenerate_simplex", what) {}
};

struct InconsistentCertaintyError : Error
{
  explicit InconsistentCertaintyError(const std::string& what) : Error("inconsistent_certainty", what) {}
};

struct DomainError : Error
{
  explicit DomainError(const std::string& what) : Error("domain", what) {}
};

struct InsufficientDataError : Error
{
  explicit InsufficientDataError(const std::string& what) : Error("insufficient_data", what) {}
};

struct DegenerateDataError : Error
{
  explicit DegenerateDataError(const std::string& what) : Error("degenerate_data", what) {}
};

struct FormatError : Error
{
  explicit FormatError(const std::string& what) : Error("format", what) {}
};

struct EvaluationError : Error
{
  explicit EvaluationError(const std::string& what) : Error("evaluation", what) {}
};

}  // namespace semantic_mesh
