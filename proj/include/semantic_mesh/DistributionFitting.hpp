#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace semantic_mesh {

enum class DistributionFamily
{
  Gaussian,
  Weibull,
  LogNormal,
};

std::string toString(DistributionFamily family);

/*!
 * Maximum-likelihood fit of one family. Parameters:
 *   Gaussian:  first = mean,          second = standard deviation
 *   Weibull:   first = shape k,       second = scale lambda
 *   LogNormal: first = mean of log x, second = std. dev. of log x
 */
struct FamilyFit
{
  DistributionFamily family = DistributionFamily::Gaussian;
  bool applicable = false;
  double first = 0.0;
  double second = 0.0;
  double ks = 1.0;  // Kolmogorov-Smirnov statistic, smaller is better

  double cdf(double x) const;
};

struct FitReport
{
  DistributionFamily best = DistributionFamily::Gaussian;
  std::vector<FamilyFit> fits;  // Gaussian, Weibull, LogNormal in that order

  const FamilyFit& fit(DistributionFamily family) const;
};

inline constexpr std::size_t kMinFitSamples = 30;

FamilyFit fitGaussian(std::span<const double> samples);
FamilyFit fitLogNormal(std::span<const double> samples);
FamilyFit fitWeibull(std::span<const double> samples);

/*!
 * sup_x |F_n(x) - F(x)| for a continuous F, evaluated on both sides of every
 * jump of the empirical CDF. `sorted` must be ascending.
 */
double ksStatistic(std::span<const double> sorted, const std::function<double(double)>& cdf);

/*!
 * Fits all three families and selects the one with the smallest KS statistic.
 * Weibull and log-normal are reported as inapplicable when a sample is <= 0.
 * Throws InsufficientDataError below kMinFitSamples samples and
 * DegenerateDataError when all samples are equal.
 */
FitReport fitAndSelect(std::span<const double> samples);

}  // namespace semantic_mesh
