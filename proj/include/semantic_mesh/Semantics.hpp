#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace semantic_mesh {

//! Ordered terrain class names; the index of a name is its class index.
class ClassCatalog
{
 public:
  ClassCatalog() = default;
  //! Throws ConfigError on an empty list or duplicate names.
  explicit ClassCatalog(std::vector<std::string> names);

  std::size_t size() const { return names_.size(); }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<std::size_t> indexOf(const std::string& name) const;

  bool operator==(const ClassCatalog&) const = default;

 private:
  std::vector<std::string> names_;
};

enum class UpdateMode
{
  Soft,  // alpha_j += theta_j
  Hard,  // alpha_j += 1{argmax theta = j}
};

std::string toString(UpdateMode mode);
UpdateMode parseUpdateMode(const std::string& text);

//! Tolerance on |sum(theta) - 1| accepted by dirichletUpdate.
inline constexpr double kScoreSumTolerance = 1e-6;

//! Index of the largest score; ties go to the lowest index.
std::size_t argmaxClass(std::span<const double> scores);

//! Adds one measurement to alpha in place. Throws InputError on negative alpha or unnormalised scores.
void dirichletUpdate(std::span<double> alpha, std::span<const double> scores, UpdateMode mode);

//! Adds every measurement (each of length alpha.size()) to a copy of alpha.
std::vector<double> dirichletUpdate(std::span<const double> alpha, const std::vector<std::vector<double>>& measurements,
                                    UpdateMode mode);

/*!
 * Posterior predictive alpha_i / sum_j alpha_j. Returns nullopt when alpha is
 * all zero: nothing has been observed, which is not the same as a uniform
 * belief.
 */
std::optional<std::vector<double>> classPredictive(std::span<const double> alpha);

//! Dirichlet density at theta (log-space evaluation). Throws DomainError for alpha_j <= 0.
double dirichletPdf(std::span<const double> theta, std::span<const double> alpha);
double dirichletLogPdf(std::span<const double> theta, std::span<const double> alpha);

}  // namespace semantic_mesh
