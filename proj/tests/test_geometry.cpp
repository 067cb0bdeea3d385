#include "TestWorlds.hpp"

#include "semantic_mesh/Errors.hpp"
#include "semantic_mesh/Geometry.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace semantic_mesh;

TEST_CASE("transformToMap follows p_M = R^T p_S - t")
{
  Pose identity;
  const Eigen::Vector3d p(1.0, 2.0, 3.0);
  CHECK(transformToMap(p, identity) == p);

  Pose shifted;
  shifted.translation = {0.0, 0.0, 1.0};
  CHECK(transformToMap(Eigen::Vector3d::Zero(), shifted) == Eigen::Vector3d(0.0, 0.0, -1.0));

  // 90 degree yaw, checked against an explicit matrix product.
  Pose yaw;
  yaw.rotation << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  yaw.translation = {0.5, -0.25, 2.0};
  const Eigen::Vector3d q(0.3, -1.7, 4.2);
  double expected[3];
  for (int r = 0; r < 3; ++r) {
    expected[r] = 0.0;
    for (int c = 0; c < 3; ++c) expected[r] += yaw.rotation(c, r) * q[c];
    expected[r] -= yaw.translation[r];
  }
  const Eigen::Vector3d got = transformToMap(q, yaw);
  for (int r = 0; r < 3; ++r) CHECK(got[r] == doctest::Approx(expected[r]).epsilon(1e-15));
}

TEST_CASE("projectFrame back-projects valid pixels")
{
  CameraIntrinsics intr;
  intr.fx = intr.fy = 1.0;
  intr.cx = intr.cy = 0.0;
  intr.width = 2;
  intr.height = 2;
  const std::vector<float> depth{1.0f, 2.0f, 3.0f, 4.0f};
  const std::vector<float> scores{1, 0, 0, 1, 1, 0, 0, 1};
  const SemanticCloud cloud = projectFrame(depth, scores, 2, intr, Pose{});
  REQUIRE(cloud.size() == 4);
  for (int v = 0; v < 2; ++v) {
    for (int u = 0; u < 2; ++u) {
      const std::size_t i = static_cast<std::size_t>(v * 2 + u);
      const double d = depth[i];
      CHECK(cloud.mapPoint(i) == Eigen::Vector3d(u * d, v * d, d));
      CHECK(cloud.scores(i)[0] == scores[2 * i]);
    }
  }

  SUBCASE("principal point ray")
  {
    CameraIntrinsics c;
    c.fx = c.fy = 500.0;
    c.width = 3;
    c.height = 3;
    c.cx = c.cy = 1.0;
    std::vector<float> d(9, std::numeric_limits<float>::quiet_NaN());
    d[4] = 2.0f;
    const SemanticCloud one = projectFrame(d, std::vector<float>(9, 1.0f), 1, c, Pose{});
    REQUIRE(one.size() == 1);
    CHECK(one.mapPoint(0) == Eigen::Vector3d(0.0, 0.0, 2.0));
  }

  SUBCASE("invalid depth is skipped")
  {
    const std::vector<float> bad{std::numeric_limits<float>::quiet_NaN(), 0.0f, -1.0f,
                                 std::numeric_limits<float>::infinity()};
    CHECK(projectFrame(bad, scores, 2, intr, Pose{}).empty());
  }

  SUBCASE("size mismatch")
  {
    CHECK_THROWS_AS(projectFrame(std::vector<float>(3, 1.0f), scores, 2, intr, Pose{}), InputError);
    CHECK_THROWS_AS(projectFrame(depth, std::vector<float>(7, 0.5f), 2, intr, Pose{}), InputError);
  }
}

TEST_CASE("barycentric coordinates")
{
  const Eigen::Vector2d a(0, 0), b(1, 0), c(0, 1);
  const auto centroid = barycentric((a + b + c) / 3.0, a, b, c);
  for (double l : centroid) CHECK(l == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  const auto corner = barycentric(a, a, b, c);
  CHECK(corner[0] == doctest::Approx(1.0));
  CHECK(std::abs(corner[1]) < 1e-15);
  CHECK(std::abs(corner[2]) < 1e-15);

  CHECK_THROWS_AS(barycentric({0.5, 0.5}, {0, 0}, {1, 1}, {2, 2}), DegenerateSimplexError);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-10.0, 10.0), w(0.0, 1.0);
  for (int t = 0; t < 1000; ++t) {
    const Eigen::Vector2d v1(u(rng), u(rng)), v2(u(rng), u(rng)), v3(u(rng), u(rng));
    double l1 = w(rng), l2 = w(rng);
    if (l1 + l2 > 1.0) {
      l1 = 1.0 - l1;
      l2 = 1.0 - l2;
    }
    const Eigen::Vector2d p = l1 * v1 + l2 * v2 + (1.0 - l1 - l2) * v3;
    Barycentric lam;
    try {
      lam = barycentric(p, v1, v2, v3);
    } catch (const DegenerateSimplexError&) {
      continue;
    }
    CHECK(std::abs(lam[0] + lam[1] + lam[2] - 1.0) < 1e-9);
    CHECK((lam[0] * v1 + lam[1] * v2 + lam[2] * v3 - p).norm() < 1e-9);
  }
}

TEST_CASE("inSimplex is closed, inSimplexStrict is open")
{
  CHECK(inSimplex({1.0 / 3, 1.0 / 3, 1.0 / 3}));
  CHECK_FALSE(inSimplex({1.2, -0.1, -0.1}));
  CHECK(inSimplex({0.0, 0.5, 0.5}));
  CHECK_FALSE(inSimplexStrict({0.0, 0.5, 0.5}));
  CHECK(inSimplexStrict({0.2, 0.3, 0.5}));
}

TEST_CASE("pose validation")
{
  Pose p;
  CHECK_NOTHROW(p.validate());
  p.rotation(0, 0) = 1.1;
  CHECK_THROWS_AS(p.validate(), InputError);
  Pose mirrored;
  mirrored.rotation(2, 2) = -1.0;
  CHECK_THROWS_AS(mirrored.validate(), InputError);
  Pose badCov;
  badCov.rotationCov(0, 0) = -1e-3;
  CHECK_THROWS_AS(badCov.validate(), InputError);
}
