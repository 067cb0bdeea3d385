#include "semantic_mesh/Errors.hpp"
#include "semantic_mesh/Semantics.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace semantic_mesh;

TEST_CASE("class catalog")
{
  const ClassCatalog c({"a", "b", "c"});
  CHECK(c.indexOf("b") == 1);
  CHECK_FALSE(c.indexOf("z").has_value());
  CHECK_THROWS_AS(ClassCatalog({"a", "a"}), ConfigError);
  CHECK_THROWS_AS(ClassCatalog(std::vector<std::string>{}), ConfigError);
}

TEST_CASE("dirichlet update")
{
  for (UpdateMode mode : {UpdateMode::Soft, UpdateMode::Hard}) {
    std::vector<double> alpha(4, 0.0);
    dirichletUpdate(alpha, std::vector<double>{1, 0, 0, 0}, mode);
    CHECK(alpha == std::vector<double>{1, 0, 0, 0});
  }
  std::vector<double> alpha{2, 1};
  dirichletUpdate(alpha, std::vector<double>{0.5, 0.5}, UpdateMode::Soft);
  CHECK(alpha == std::vector<double>{2.5, 1.5});

  std::vector<double> tie{0, 0, 0};
  dirichletUpdate(tie, std::vector<double>{0.4, 0.4, 0.2}, UpdateMode::Hard);
  CHECK(tie == std::vector<double>{1, 0, 0});

  std::vector<double> bad{-1.0, 1.0};
  CHECK_THROWS_AS(dirichletUpdate(bad, std::vector<double>{0.5, 0.5}, UpdateMode::Soft), InputError);
  std::vector<double> ok{1.0, 1.0};
  CHECK_THROWS_AS(dirichletUpdate(ok, std::vector<double>{0.5, 0.6}, UpdateMode::Soft), InputError);
}

TEST_CASE("hard updates count labels exactly")
{
  std::mt19937_64 rng(1);
  std::bernoulli_distribution first(0.7);
  std::vector<std::vector<double>> labels;
  double counts[2] = {0, 0};
  for (int i = 0; i < 1000; ++i) {
    const int c = first(rng) ? 0 : 1;
    counts[c] += 1;
    labels.push_back(c == 0 ? std::vector<double>{1, 0} : std::vector<double>{0, 1});
  }
  const std::vector<double> prior{0.5, 2.0};
  const auto post = dirichletUpdate(prior, labels, UpdateMode::Hard);
  CHECK(post[0] - prior[0] == counts[0]);
  CHECK(post[1] - prior[1] == counts[1]);

  std::shuffle(labels.begin(), labels.end(), rng);
  CHECK(dirichletUpdate(prior, labels, UpdateMode::Hard) == post);
}

TEST_CASE("soft updates are order independent")
{
  std::mt19937_64 rng(2);
  std::gamma_distribution<double> g(1.0);
  std::vector<std::vector<double>> scores;
  for (int i = 0; i < 200; ++i) {
    std::vector<double> s(3);
    double sum = 0.0;
    for (double& x : s) sum += (x = g(rng));
    for (double& x : s) x /= sum;
    scores.push_back(s);
  }
  const std::vector<double> prior{0.0, 0.0, 0.0};
  const auto a = dirichletUpdate(prior, scores, UpdateMode::Soft);
  std::shuffle(scores.begin(), scores.end(), rng);
  const auto b = dirichletUpdate(prior, scores, UpdateMode::Soft);
  double total = 0.0;
  for (int j = 0; j < 3; ++j) {
    CHECK(std::abs(a[j] - b[j]) < 1e-12 * 200);
    total += a[j];
  }
  CHECK(total == doctest::Approx(200.0).epsilon(1e-12));
}

TEST_CASE("class predictive")
{
  CHECK(*classPredictive(std::vector<double>{3, 1}) == std::vector<double>{0.75, 0.25});
  CHECK(*classPredictive(std::vector<double>{5, 5, 5, 5}) == std::vector<double>{0.25, 0.25, 0.25, 0.25});
  CHECK_FALSE(classPredictive(std::vector<double>{0, 0, 0}).has_value());

  const std::vector<double> truth{0.5, 0.3, 0.15, 0.05};
  std::mt19937_64 rng(9);
  std::discrete_distribution<int> draw(truth.begin(), truth.end());
  std::vector<double> alpha(4, 0.0);
  for (int i = 0; i < 10000; ++i) {
    std::vector<double> onehot(4, 0.0);
    onehot[draw(rng)] = 1.0;
    dirichletUpdate(alpha, onehot, UpdateMode::Hard);
  }
  const auto pred = *classPredictive(alpha);
  double tv = 0.0;
  for (int j = 0; j < 4; ++j) tv += 0.5 * std::abs(pred[j] - truth[j]);
  CHECK(tv < 0.02);
}

TEST_CASE("dirichlet density")
{
  for (double x : {0.1, 0.5, 0.77}) {
    CHECK(dirichletPdf(std::vector<double>{x, 1 - x}, std::vector<double>{1, 1}) == doctest::Approx(1.0));
  }
  CHECK(dirichletPdf(std::vector<double>{0.5, 0.5}, std::vector<double>{2, 2}) == doctest::Approx(1.5));
  CHECK_THROWS_AS(dirichletPdf(std::vector<double>{0.5, 0.5}, std::vector<double>{0, 2}), DomainError);

  using boost::math::quadrature::gauss_kronrod;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> a(1.0, 4.0);
  for (int t = 0; t < 3; ++t) {
    const std::vector<double> alpha{a(rng), a(rng), a(rng)};
    const double total = gauss_kronrod<double, 31>::integrate(
        [&](double x) {
          return gauss_kronrod<double, 31>::integrate(
              [&](double y) { return dirichletPdf(std::vector<double>{x, y, std::max(0.0, 1 - x - y)}, alpha); }, 0.0,
              1.0 - x, 5, 1e-10);
        },
        0.0, 1.0, 5, 1e-10);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-3));
  }
}
