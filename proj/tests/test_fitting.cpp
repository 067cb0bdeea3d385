#include "semantic_mesh/DistributionFitting.hpp"
#include "semantic_mesh/Errors.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace semantic_mesh;

namespace {

std::vector<double> gaussianSamples(std::size_t n, double mu, double sigma, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(mu, sigma);
  std::vector<double> out(n);
  for (double& x : out) x = d(rng);
  return out;
}

}  // namespace

TEST_CASE("family recovery")
{
  const auto gauss = gaussianSamples(10000, 0.5, 0.05, 1);
  const FitReport g = fitAndSelect(gauss);
  CHECK((g.best == DistributionFamily::Gaussian));
  CHECK(std::abs(g.fit(DistributionFamily::Gaussian).first - 0.5) < 0.002);
  CHECK(std::abs(g.fit(DistributionFamily::Gaussian).second - 0.05) < 0.002);

  std::mt19937_64 rng(2);
  std::lognormal_distribution<double> ln(std::log(0.4), 0.35);
  std::vector<double> logn(10000);
  for (double& x : logn) x = ln(rng);
  const FitReport l = fitAndSelect(logn);
  CHECK((l.best == DistributionFamily::LogNormal));
  CHECK(l.fit(DistributionFamily::LogNormal).first == doctest::Approx(std::log(0.4)).epsilon(0.02));

  std::weibull_distribution<double> wb(2.5, 0.6);
  std::vector<double> weib(10000);
  for (double& x : weib) x = wb(rng);
  const FitReport w = fitAndSelect(weib);
  CHECK((w.best == DistributionFamily::Weibull));
  CHECK(w.fit(DistributionFamily::Weibull).first == doctest::Approx(2.5).epsilon(0.05));
  CHECK(w.fit(DistributionFamily::Weibull).second == doctest::Approx(0.6).epsilon(0.02));
}

TEST_CASE("fitting errors and applicability")
{
  CHECK_THROWS_AS(fitAndSelect(gaussianSamples(29, 0.5, 0.05, 3)), InsufficientDataError);
  CHECK_THROWS_AS(fitAndSelect(std::vector<double>(100, 0.4)), DegenerateDataError);

  auto shifted = gaussianSamples(500, 0.0, 1.0, 4);
  const FitReport r = fitAndSelect(shifted);
  CHECK_FALSE(r.fit(DistributionFamily::LogNormal).applicable);
  CHECK_FALSE(r.fit(DistributionFamily::Weibull).applicable);
  CHECK((r.best == DistributionFamily::Gaussian));
  for (const auto& f : r.fits) {
    if (f.applicable) CHECK((f.ks >= 0.0 && f.ks <= 1.0));
  }
}

TEST_CASE("Gaussian fit is scale consistent")
{
  const auto s = gaussianSamples(1000, 0.45, 0.07, 5);
  std::vector<double> scaled(s);
  const double c = 3.7;
  for (double& x : scaled) x *= c;
  const FamilyFit a = fitGaussian(s);
  const FamilyFit b = fitGaussian(scaled);
  CHECK(std::abs(b.first - c * a.first) < 1e-9);
  CHECK(std::abs(b.second - c * a.second) < 1e-9);
}

TEST_CASE("KS statistic bounds")
{
  // A continuous CDF through every midpoint of the ECDF steps attains the
  // smallest possible distance 1/(2n).
  const std::size_t n = 20;
  std::vector<double> sorted(n);
  for (std::size_t i = 0; i < n; ++i) sorted[i] = static_cast<double>(i + 1);
  auto midpointCdf = [&](double x) {
    if (x <= 0.5) return 0.0;
    if (x >= n + 0.5) return 1.0;
    // Linear through (i, (i - 0.5) / n).
    return std::clamp((x - 0.5) / static_cast<double>(n), 0.0, 1.0);
  };
  CHECK(ksStatistic(sorted, midpointCdf) == doctest::Approx(0.5 / n).epsilon(1e-12));

  auto far = [](double) { return 0.0; };
  CHECK(ksStatistic(sorted, far) == doctest::Approx(1.0));
  auto shifted = [&](double x) { return midpointCdf(x - 3.0); };
  CHECK(ksStatistic(sorted, shifted) > 0.5 / n);
}
