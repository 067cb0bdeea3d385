#include "semantic_mesh/DistributionFitting.hpp"

#include "semantic_mesh/Errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace semantic_mesh {

namespace {

struct MeanStd
{
  double mean = 0.0;
  double stddev = 0.0;
};

// Maximum-likelihood (population) standard deviation.
MeanStd meanStd(std::span<const double> x)
{
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / n)};
}

double normalCdf(double z)
{
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

bool allPositive(std::span<const double> x)
{
  return std::all_of(x.begin(), x.end(), [](double v) { return v > 0.0; });
}

}  // namespace

std::string toString(DistributionFamily family)
{
  switch (family) {
    case DistributionFamily::Gaussian:
      return "gaussian";
    case DistributionFamily::Weibull:
      return "weibull";
    case DistributionFamily::LogNormal:
      return "lognormal";
  }
  return "unknown";
}

double FamilyFit::cdf(double x) const
{
  switch (family) {
    case DistributionFamily::Gaussian:
      return normalCdf((x - first) / second);
    case DistributionFamily::Weibull:
      return x <= 0.0 ? 0.0 : -std::expm1(-std::pow(x / second, first));
    case DistributionFamily::LogNormal:
      return x <= 0.0 ? 0.0 : normalCdf((std::log(x) - first) / second);
  }
  return 0.0;
}

const FamilyFit& FitReport::fit(DistributionFamily family) const
{
  for (const auto& f : fits) {
    if (f.family == family) return f;
  }
  throw InputError("family missing from fit report");
}

FamilyFit fitGaussian(std::span<const double> samples)
{
  const MeanStd ms = meanStd(samples);
  FamilyFit fit;
  fit.family = DistributionFamily::Gaussian;
  fit.applicable = ms.stddev > 0.0;
  fit.first = ms.mean;
  fit.second = ms.stddev;
  return fit;
}

FamilyFit fitLogNormal(std::span<const double> samples)
{
  FamilyFit fit;
  fit.family = DistributionFamily::LogNormal;
  if (!allPositive(samples)) return fit;
  std::vector<double> logs(samples.size());
  std::transform(samples.begin(), samples.end(), logs.begin(), [](double v) { return std::log(v); });
  const MeanStd ms = meanStd(logs);
  fit.applicable = ms.stddev > 0.0;
  fit.first = ms.mean;
  fit.second = ms.stddev;
  return fit;
}

FamilyFit fitWeibull(std::span<const double> samples)
{
  FamilyFit fit;
  fit.family = DistributionFamily::Weibull;
  if (!allPositive(samples)) return fit;

  // Work on x / max(x) so x^k stays bounded; the shape is scale-free.
  const double xmax = *std::max_element(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  std::vector<double> logs(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) logs[i] = std::log(samples[i] / xmax);
  const double meanLog = std::accumulate(logs.begin(), logs.end(), 0.0) / n;
  const MeanStd logStats = meanStd(logs);
  if (!(logStats.stddev > 0.0)) return fit;

  // Profile-likelihood equation for the shape k:
  //   g(k) = sum x^k ln x / sum x^k - 1/k - mean(ln x) = 0, increasing in k.
  auto g = [&](double k, double* derivative) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (double l : logs) {
      const double w = std::exp(k * l);
      s0 += w;
      s1 += w * l;
      s2 += w * l * l;
    }
    if (derivative) *derivative = s2 / s0 - (s1 / s0) * (s1 / s0) + 1.0 / (k * k);
    return s1 / s0 - 1.0 / k - meanLog;
  };

  double lo = 1e-3, hi = 1.0;
  while (g(hi, nullptr) < 0.0 && hi < 1e4) hi *= 2.0;
  double k = std::clamp(1.2825 / logStats.stddev, lo, hi);
  for (int iter = 0; iter < 200; ++iter) {
    double dg = 0.0;
    const double value = g(k, &dg);
    if (value > 0.0) hi = k; else lo = k;
    double next = k - value / dg;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - k) <= 1e-13 * k) {
      k = next;
      break;
    }
    k = next;
  }

  double sumPow = 0.0;
  for (double l : logs) sumPow += std::exp(k * l);
  fit.applicable = true;
  fit.first = k;
  fit.second = xmax * std::pow(sumPow / n, 1.0 / k);
  return fit;
}

double ksStatistic(std::span<const double> sorted, const std::function<double(double)>& cdf)
{
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return std::clamp(d, 0.0, 1.0);
}

FitReport fitAndSelect(std::span<const double> samples)
{
  if (samples.size() < kMinFitSamples) {
    throw InsufficientDataError("distribution fitting needs at least " + std::to_string(kMinFitSamples) +
                                " samples, got " + std::to_string(samples.size()));
  }
  for (double v : samples) {
    if (!std::isfinite(v)) throw InputError("samples must be finite");
  }
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() == sorted.back()) throw DegenerateDataError("all samples are equal; no spread to fit");

  FitReport report;
  report.fits = {fitGaussian(sorted), fitWeibull(sorted), fitLogNormal(sorted)};
  double bestKs = 2.0;
  for (auto& fit : report.fits) {
    if (!fit.applicable) continue;
    fit.ks = ksStatistic(sorted, [&fit](double x) { return fit.cdf(x); });
    if (fit.ks < bestKs) {
      bestKs = fit.ks;
      report.best = fit.family;
    }
  }
  return report;
}

}  // namespace semantic_mesh
