#include "semantic_mesh/Semantics.hpp"

#include "semantic_mesh/Errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace semantic_mesh {

ClassCatalog::ClassCatalog(std::vector<std::string> names) : names_(std::move(names))
{
  if (names_.empty()) throw ConfigError("class catalog is empty");
  std::unordered_set<std::string> seen;
  for (const auto& n : names_) {
    if (n.empty()) throw ConfigError("class catalog contains an empty name");
    if (!seen.insert(n).second) throw ConfigError("duplicate class name '" + n + "'");
  }
}

std::optional<std::size_t> ClassCatalog::indexOf(const std::string& name) const
{
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

std::string toString(UpdateMode mode)
{
  return mode == UpdateMode::Soft ? "soft" : "hard";
}

UpdateMode parseUpdateMode(const std::string& text)
{
  if (text == "soft") return UpdateMode::Soft;
  if (text == "hard") return UpdateMode::Hard;
  throw ConfigError("unknown update mode '" + text + "' (expected soft or hard)");
}

std::size_t argmaxClass(std::span<const double> scores)
{
  return static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

void dirichletUpdate(std::span<double> alpha, std::span<const double> scores, UpdateMode mode)
{
  if (scores.size() != alpha.size()) throw InputError("score vector length does not match alpha");
  double sum = 0.0;
  for (double s : scores) {
    if (!std::isfinite(s) || s < 0.0) throw InputError("class scores must be finite and non-negative");
    sum += s;
  }
  if (std::abs(sum - 1.0) > kScoreSumTolerance) {
    std::ostringstream msg;
    msg << "class scores sum to " << sum << ", expected 1";
    throw InputError(msg.str());
  }
  for (double a : alpha) {
    if (!(a >= 0.0)) throw InputError("Dirichlet parameters must be non-negative");
  }
  if (mode == UpdateMode::Hard) {
    alpha[argmaxClass(scores)] += 1.0;
  } else {
    for (std::size_t j = 0; j < alpha.size(); ++j) alpha[j] += scores[j];
  }
}

std::vector<double> dirichletUpdate(std::span<const double> alpha, const std::vector<std::vector<double>>& measurements,
                                    UpdateMode mode)
{
  std::vector<double> out(alpha.begin(), alpha.end());
  for (const auto& theta : measurements) dirichletUpdate(out, theta, mode);
  return out;
}

std::optional<std::vector<double>> classPredictive(std::span<const double> alpha)
{
  double total = 0.0;
  for (double a : alpha) {
    if (!(a >= 0.0)) throw InputError("Dirichlet parameters must be non-negative");
    total += a;
  }
  if (total <= 0.0) return std::nullopt;
  std::vector<double> p(alpha.size());
  for (std::size_t j = 0; j < alpha.size(); ++j) p[j] = alpha[j] / total;
  return p;
}

double dirichletLogPdf(std::span<const double> theta, std::span<const double> alpha)
{
  if (theta.size() != alpha.size() || alpha.empty()) throw InputError("theta and alpha lengths differ");
  double alphaSum = 0.0;
  double logNorm = 0.0;
  for (double a : alpha) {
    if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("Dirichlet parameters must be strictly positive");
    alphaSum += a;
    logNorm -= std::lgamma(a);
  }
  logNorm += std::lgamma(alphaSum);

  double thetaSum = 0.0;
  double logKernel = 0.0;
  for (std::size_t j = 0; j < theta.size(); ++j) {
    if (theta[j] < 0.0 || theta[j] > 1.0) return -std::numeric_limits<double>::infinity();
    thetaSum += theta[j];
    if (alpha[j] == 1.0) continue;
    if (theta[j] == 0.0) {
      return alpha[j] > 1.0 ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
    }
    logKernel += (alpha[j] - 1.0) * std::log(theta[j]);
  }
  if (std::abs(thetaSum - 1.0) > 1e-9) return -std::numeric_limits<double>::infinity();
  return logNorm + logKernel;
}

double dirichletPdf(std::span<const double> theta, std::span<const double> alpha)
{
  return std::exp(dirichletLogPdf(theta, alpha));
}

}  // namespace semantic_mesh
