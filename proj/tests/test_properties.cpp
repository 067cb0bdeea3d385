#include "TestWorlds.hpp"

#include "semantic_mesh/Errors.hpp"
#include "semantic_mesh/Properties.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>

using namespace semantic_mesh;

TEST_CASE("shipped friction models")
{
  const PropertyModelSet set = loadModels(defaultModelsPath());
  CHECK(set.property == "friction");
  REQUIRE(set.models.size() == 10);
  const auto grass = *set.catalog.indexOf("grass");
  CHECK(set.models[grass].mu == 0.577);
  CHECK(set.models[grass].sigma == 0.077);
  const auto wood = *set.catalog.indexOf("wood");
  CHECK(set.models[wood].mu == 0.372);
  CHECK(set.models[wood].sigma == 0.055);

  const std::string text = formatModels(set);
  const PropertyModelSet again = parseModels(text);
  CHECK(again.models == set.models);
  CHECK(again.catalog == set.catalog);
  CHECK(formatModels(again) == text);
}

TEST_CASE("model file errors")
{
  const std::string head = "TERRAIN_PROPERTY_MODELS 1\nproperty friction\n";
  CHECK_NOTHROW(parseModels(head + "# comment\n\na,0.5,0.1\n"));
  CHECK_THROWS_AS(parseModels(head + "a,0.5,0\n"), ConfigError);
  CHECK_THROWS_AS(parseModels(head + "a,0.5,-0.1\n"), ConfigError);
  CHECK_THROWS_AS(parseModels(head + "a,0.5,0.1\na,0.4,0.1\n"), ConfigError);
  CHECK_THROWS_AS(parseModels(head + "a,0.5\n"), ConfigError);
  CHECK_THROWS_AS(parseModels(head + "a,zero,0.1\n"), ConfigError);
  CHECK_THROWS_AS(parseModels("TERRAIN_PROPERTY_MODELS 2\nproperty friction\na,0.5,0.1\n"), ConfigError);
  CHECK_THROWS_AS(parseModels(head), ConfigError);
  CHECK_THROWS_AS(loadModels("/nonexistent/models.txt"), ConfigError);
}

TEST_CASE("property mixture")
{
  const PropertyModelSet set = loadModels(defaultModelsPath());
  const std::size_t k = set.models.size();
  const auto ice = *set.catalog.indexOf("ice");
  const auto concrete = *set.catalog.indexOf("concrete");

  std::vector<double> alpha(k, 0.0);
  CHECK_FALSE(propertyMixture(alpha, set.models).has_value());
  alpha[ice] = 3.0;
  const auto single = *propertyMixture(alpha, set.models);
  CHECK(single.mean() == doctest::Approx(0.192).epsilon(1e-15));
  CHECK(single.variance() == doctest::Approx(0.046 * 0.046).epsilon(1e-12));

  const std::vector<PropertyModel> pair{set.models[concrete], set.models[ice]};
  const auto half = *propertyMixture(std::vector<double>{1, 1}, pair);
  CHECK(half.mean() == doctest::Approx(0.3675).epsilon(1e-15));
  CHECK_THROWS_AS(propertyMixture(std::vector<double>{1, 1, 1}, pair), ConfigError);

  std::vector<double> mixed(k);
  for (std::size_t j = 0; j < k; ++j) mixed[j] = 0.5 + j;
  const auto m = *propertyMixture(mixed, set.models);
  const auto pred = *classPredictive(mixed);
  for (std::size_t j = 0; j < k; ++j) CHECK(std::abs(m.weights[j] - pred[j]) < 1e-12);
  CHECK(m.cdf(10.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(m.cdf(-10.0)) < 1e-12);

  // Moving weight toward the higher-mean class never lowers the mean.
  const auto lo = std::min_element(set.models.begin(), set.models.end(), [](auto& a, auto& b) { return a.mu < b.mu; }) - set.models.begin();
  const auto hi = std::max_element(set.models.begin(), set.models.end(), [](auto& a, auto& b) { return a.mu < b.mu; }) - set.models.begin();
  double previous = m.mean();
  for (int step = 0; step < 5; ++step) {
    mixed[static_cast<std::size_t>(lo)] = std::max(0.0, mixed[static_cast<std::size_t>(lo)] - 0.1);
    mixed[static_cast<std::size_t>(hi)] += 0.1;
    const double now = propertyMixture(mixed, set.models)->mean();
    CHECK(now >= previous - 1e-15);
    previous = now;
  }
}

TEST_CASE("mixture statistics match sampling")
{
  PropertyMixture m;
  m.weights = {0.3, 0.7};
  m.components = {{"a", 0.2, 0.05}, {"b", 0.6, 0.1}};
  std::mt19937_64 rng(12);
  std::bernoulli_distribution pick(0.7);
  std::normal_distribution<double> n;
  double sum = 0.0, sumSq = 0.0;
  const int samples = 1000000;
  for (int i = 0; i < samples; ++i) {
    const auto& c = m.components[pick(rng) ? 1 : 0];
    const double x = c.mu + c.sigma * n(rng);
    sum += x;
    sumSq += x * x;
  }
  const double mean = sum / samples;
  const double var = sumSq / samples - mean * mean;
  CHECK(m.mean() == doctest::Approx(mean).epsilon(0.005));
  CHECK(m.variance() == doctest::Approx(var).epsilon(0.005));
  const MixtureStats s = mixtureStats(m);
  CHECK(s.mean == m.mean());
  CHECK(s.variance == m.variance());
}

TEST_CASE("friction from force")
{
  ForceLog log;
  log.massKg = 2.0;
  for (int i = 0; i < 100; ++i) {
    log.timeSeconds.push_back(0.01 * i);
    log.forceNewtons.push_back(log.massKg * log.gravity);
  }
  for (double mu : frictionFromForce(log, 5.0)) CHECK(mu == doctest::Approx(1.0).epsilon(1e-12));
  for (double& f : log.forceNewtons) f = 0.543 * log.massKg * log.gravity;
  for (double mu : frictionFromForce(log, 5.0)) CHECK(mu == doctest::Approx(0.543).epsilon(1e-12));

  log.massKg = 0.0;
  CHECK_THROWS_AS(frictionFromForce(log, 5.0), InputError);
}

TEST_CASE("low-pass step response")
{
  const double dt = 0.01, cutoff = 3.0;
  std::vector<double> t, x;
  for (int i = 0; i < 200; ++i) {
    t.push_back(dt * i);
    x.push_back(i == 0 ? 0.0 : 1.0);
  }
  const auto y = lowPassFilter(t, x, cutoff);
  const double rc = 1.0 / (2.0 * std::numbers::pi * cutoff);
  const double a = dt / (rc + dt);
  for (int i = 0; i < 200; ++i) CHECK(std::abs(y[i] - (1.0 - std::pow(1.0 - a, i))) < 1e-9);
  CHECK(lowPassFilter(t, x, 0.0) == x);
}

TEST_CASE("force log files")
{
  const auto dir = test::freshDir("forcelog");
  {
    std::ofstream f(dir / "rug.csv");
    f << "# mass_kg=1.5\nt_seconds,force_newtons\n0.0,7.0\n0.1,7.2\n";
  }
  const ForceLog log = readForceLog(dir / "rug.csv");
  CHECK(log.massKg == 1.5);
  CHECK(log.forceNewtons == std::vector<double>{7.0, 7.2});
  CHECK(readForceLog(dir / "rug.csv", 3.0).massKg == 3.0);
  {
    std::ofstream f(dir / "bad.csv");
    f << "time,force\n0,1\n";
  }
  CHECK_THROWS_AS(readForceLog(dir / "bad.csv"), InputError);
}
