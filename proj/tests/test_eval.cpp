#include "TestWorlds.hpp"

#include "semantic_mesh/Errors.hpp"
#include "semantic_mesh/Evaluation.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include <cmath>

using namespace semantic_mesh;

namespace {

PropertyMixture gaussian(double mu, double sigma)
{
  return {{1.0}, {{"g", mu, sigma}}};
}

PropertyMixture randomMixture(std::mt19937_64& rng, std::size_t k)
{
  std::uniform_real_distribution<double> mu(0.1, 0.9), sigma(0.03, 0.15), w(0.05, 1.0);
  PropertyMixture m;
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    m.weights.push_back(w(rng));
    total += m.weights.back();
    m.components.push_back({"c" + std::to_string(i), mu(rng), sigma(rng)});
  }
  for (double& x : m.weights) x /= total;
  return m;
}

// Same flags as std::vector<bool>, but contiguous.
std::unique_ptr<bool[]> flags(const std::vector<int>& v)
{
  std::unique_ptr<bool[]> out(new bool[v.size()]);
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] != 0;
  return out;
}

}  // namespace

TEST_CASE("Gaussian KL closed form")
{
  // Concrete vs. ice from the shipped friction table, both directions.
  CHECK(gaussianKl(0.543, 0.065, 0.192, 0.046) == doctest::Approx(29.264367548143557).epsilon(1e-12));
  CHECK(gaussianKl(0.192, 0.046, 0.543, 0.065) == doctest::Approx(14.676160074589975).epsilon(1e-12));
  CHECK(gaussianKl(0.3, 0.1, 0.3, 0.1) == 0.0);

  // Independent check of the formula by adaptive quadrature on the real line.
  using boost::math::quadrature::gauss_kronrod;
  auto logpdf = [](double x, double m, double s) {
    return -0.5 * std::pow((x - m) / s, 2) - std::log(s * std::sqrt(2 * std::numbers::pi));
  };
  const double oracle = gauss_kronrod<double, 61>::integrate(
      [&](double x) { return std::exp(logpdf(x, 0.543, 0.065)) * (logpdf(x, 0.543, 0.065) - logpdf(x, 0.192, 0.046)); },
      -1.0, 2.0, 15, 1e-14);
  CHECK(gaussianKl(0.543, 0.065, 0.192, 0.046) == doctest::Approx(oracle).epsilon(1e-10));
}

TEST_CASE("KL quadrature")
{
  const auto models = loadModels(defaultModelsPath()).models;
  for (const auto& p : models) {
    for (const auto& q : models) {
      const double quad = klMixture(gaussian(p.mu, p.sigma), gaussian(q.mu, q.sigma));
      REQUIRE(std::abs(quad - gaussianKl(p.mu, p.sigma, q.mu, q.sigma)) < 1e-4);
    }
  }
  std::mt19937_64 rng(31);
  for (int t = 0; t < 50; ++t) {
    const auto p = randomMixture(rng, 1 + t % 4);
    const auto q = randomMixture(rng, 1 + (t + 1) % 4);
    CHECK(klMixture(p, p) < 1e-6);
    CHECK(klMixtureUnclamped(p, q) >= -1e-6);
    CHECK(klMixture(p, q) >= 0.0);
  }
  CHECK(std::isinf(klMixture(gaussian(-0.4, 0.001), gaussian(1.4, 0.001))));
}

TEST_CASE("precision-recall")
{
  SUBCASE("perfect detector")
  {
    const std::vector<std::optional<double>> s{0.9, 0.8, 0.2, 0.1, 0.95};
    const auto pos = flags({1, 1, 0, 0, 1});
    const PrCurve c = prCurve(s, {pos.get(), 5});
    CHECK(c.averagePrecision == doctest::Approx(1.0));
    for (const auto& p : c.points) {
      CHECK((p.recall >= 0.0 && p.recall <= 1.0));
      CHECK((p.precision >= 0.0 && p.precision <= 1.0));
    }
  }
  SUBCASE("constant detector has base-rate precision")
  {
    std::vector<std::optional<double>> s(40, 0.3);
    std::vector<int> labels(40, 0);
    for (int i = 0; i < 12; ++i) labels[i] = 1;
    const auto pos = flags(labels);
    const PrCurve c = prCurve(s, {pos.get(), 40});
    for (const auto& p : c.points) CHECK(p.precision == doctest::Approx(0.3));
    CHECK(std::abs(c.averagePrecision - 0.3) <= 1.0 / 40);
  }
  SUBCASE("unknown faces are missed positives")
  {
    const std::vector<std::optional<double>> s{0.9, std::nullopt, 0.1, std::nullopt};
    const auto pos = flags({1, 1, 0, 0});
    const PrCurve c = prCurve(s, {pos.get(), 4});
    CHECK(c.points.back().recall == 0.5);
    CHECK(c.averagePrecision == doctest::Approx(0.5));
  }
  CHECK_THROWS_AS(prCurve({}, {}), EvaluationError);
}

TEST_CASE("accuracy")
{
  const auto low = gaussian(0.2, 0.05);
  const auto high = gaussian(0.6, 0.05);
  const auto truth = flags({1, 0, 0, 1});
  CHECK(lowHighAccuracy(std::vector<std::optional<PropertyMixture>>{low, high, high, low}, {truth.get(), 4}) == 1.0);
  CHECK(lowHighAccuracy(std::vector<std::optional<PropertyMixture>>(4), {truth.get(), 4}) == 0.0);

  std::vector<int> labels(100, 0);
  for (int i = 0; i < 30; ++i) labels[i] = 1;
  const auto seventy = flags(labels);
  CHECK(lowHighAccuracy(std::vector<std::optional<PropertyMixture>>(100, high), {seventy.get(), 100}) == doctest::Approx(0.7));
}

TEST_CASE("map evaluation")
{
  const auto set = loadModels(defaultModelsPath());
  const auto world = sim::scenario("two-class-split", set.catalog, 0).value();
  PipelineConfig config;
  config.mesh = {world.meshSideLength, world.meshHalfExtent, static_cast<int>(world.numClasses())};
  SemanticMapper mapper(config);
  mapper.processFrame(sim::renderFrame(world, 0).frame);
  MapMetadata meta;
  meta.classNames = world.classNames;
  meta.scenario = world.name;
  const std::vector<EvalInput> inputs{{"rec", {mapper.mesh(), meta}}};
  const auto truth = sim::groundTruth(world, mapper.mesh(), set.models);
  const EvalReport report = evaluateMaps(inputs, truth.faceClass, set.models, world.name);
  REQUIRE(report.scores.size() == 1);
  // Clean single-class faces: the estimate is the truth, except for faces
  // straddling the class boundary.
  CHECK(report.scores[0].klMedian < 1e-6);
  CHECK(report.scores[0].lowPr.averagePrecision > 0.95);
  CHECK(report.scores[0].accuracy > 0.95);

  CHECK_THROWS_AS(evaluateMaps(inputs, truth.faceClass, set.models, "other"), EvaluationError);
  MapMetadata otherMeta = meta;
  std::vector<EvalInput> mismatched{inputs[0], {"coarse", {Mesh(MeshConfig{0.1, 1.0, 10}), otherMeta}}};
  CHECK_THROWS_AS(evaluateMaps(mismatched, truth.faceClass, set.models, world.name), EvaluationError);
  const std::vector<EvalInput> blank{{"blank", {Mesh(config.mesh), meta}}};
  CHECK_THROWS_AS(evaluateMaps(blank, truth.faceClass, set.models, world.name), EvaluationError);

  const auto dir = test::freshDir("eval");
  writeEvalReport(report, dir);
  CHECK(std::filesystem::exists(dir / "eval_summary.csv"));
  CHECK(std::filesystem::exists(dir / "pr_curve.csv"));
  CHECK(std::filesystem::exists(dir / "eval_summary.json"));
}
