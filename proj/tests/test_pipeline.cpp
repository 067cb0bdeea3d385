#include "TestWorlds.hpp"

#include "semantic_mesh/Pipeline.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace semantic_mesh;

namespace {

PipelineConfig configFor(const sim::WorldSpec& w, EstimatorKind kind = EstimatorKind::Recursive)
{
  PipelineConfig c;
  c.mesh = {w.meshSideLength, w.meshHalfExtent, static_cast<int>(w.numClasses())};
  c.estimator = kind;
  return c;
}

}  // namespace

TEST_CASE("frame without valid depth only bumps the frame counter")
{
  const sim::WorldSpec w = test::flatWorld("grass", 0.0);
  FrameBundle frame = sim::renderFrame(w, 0).frame;
  std::fill(frame.depth.begin(), frame.depth.end(), std::numeric_limits<float>::quiet_NaN());
  SemanticMapper mapper(configFor(w));
  const Mesh before = mapper.mesh();
  const FrameTiming t = mapper.processFrame(frame);
  CHECK_FALSE(t.skipped);
  CHECK(t.points == 0);
  Mesh expected = before;
  expected.setFrameCount(1);
  CHECK(mapper.mesh().sameState(expected));
}

TEST_CASE("flat grass plane")
{
  const sim::WorldSpec w = test::flatWorld("grass", 0.1);
  const auto grass = *test::shippedCatalog().indexOf("grass");
  SemanticMapper mapper(configFor(w));
  const FrameTiming t = mapper.processFrame(sim::renderFrame(w, 0).frame);
  CHECK(t.assignedPoints > 0);
  CHECK(mapper.mesh().interiorPointsEmpty());
  std::size_t observed = 0;
  for (std::size_t f = 0; f < mapper.mesh().numFaces(); ++f) {
    const auto pred = classPredictive(mapper.mesh().alpha(f));
    if (!pred) continue;
    ++observed;
    CHECK((*pred)[grass] == 1.0);
  }
  CHECK(observed > 0);
  for (const Vertex& v : mapper.mesh().vertices()) {
    if (v.observations > 0) CHECK(std::abs(v.zMean - 0.1) < 1e-5);
  }
  CHECK(t.partsSum() == doctest::Approx(t.total).epsilon(1e-9));
}

TEST_CASE("invalid frames are skipped and counted")
{
  const sim::WorldSpec w = test::flatWorld("grass", 0.0);
  FrameBundle frame = sim::renderFrame(w, 0).frame;
  frame.scores[0] = 3.0f;
  SemanticMapper mapper(configFor(w));
  const FrameTiming t = mapper.processFrame(frame);
  CHECK(t.skipped);
  CHECK_FALSE(t.skipReason.empty());
  CHECK(mapper.framesSkipped() == 1);
  CHECK(mapper.framesProcessed() == 0);
  CHECK(mapper.mesh().frameCount() == 0);
}

TEST_CASE("estimators agree on one clean frame and differ on history")
{
  const auto catalog = test::shippedCatalog();
  const auto models = loadModels(defaultModelsPath()).models;
  const auto ice = *catalog.indexOf("ice");
  const auto concrete = *catalog.indexOf("concrete");
  const sim::WorldSpec iceWorld = test::flatWorld("ice", 0.0);
  const sim::WorldSpec concreteWorld = test::flatWorld("concrete", 0.0);

  std::vector<SemanticMapper> mappers;
  for (auto kind : {EstimatorKind::Recursive, EstimatorKind::MultimodalNonRecursive, EstimatorKind::UnimodalNonRecursive}) {
    mappers.emplace_back(configFor(iceWorld, kind));
  }
  const FrameBundle first = sim::renderFrame(iceWorld, 0).frame;
  for (auto& m : mappers) m.processFrame(first);
  for (std::size_t f = 0; f < mappers[0].mesh().numFaces(); ++f) {
    const auto r = estimateFaceProperty(mappers[0].mesh(), f, EstimatorKind::Recursive, models);
    const auto mm = estimateFaceProperty(mappers[1].mesh(), f, EstimatorKind::MultimodalNonRecursive, models);
    const auto u = estimateFaceProperty(mappers[2].mesh(), f, EstimatorKind::UnimodalNonRecursive, models);
    REQUIRE(r.has_value() == u.has_value());
    REQUIRE(r.has_value() == mm.has_value());
    if (!r) continue;
    CHECK(r->mean() == mm->mean());
    CHECK(r->mean() == u->mean());
    CHECK(r->variance() == doctest::Approx(u->variance()).epsilon(1e-9));
  }

  const FrameBundle second = sim::renderFrame(concreteWorld, 0).frame;
  for (auto& m : mappers) m.processFrame(second);
  std::size_t checked = 0;
  for (std::size_t f = 0; f < mappers[0].mesh().numFaces(); ++f) {
    const auto r = estimateFaceProperty(mappers[0].mesh(), f, EstimatorKind::Recursive, models);
    if (!r) continue;
    ++checked;
    CHECK(r->weights[ice] == 0.5);
    CHECK(r->weights[concrete] == 0.5);
    const auto mm = estimateFaceProperty(mappers[1].mesh(), f, EstimatorKind::MultimodalNonRecursive, models);
    const auto u = estimateFaceProperty(mappers[2].mesh(), f, EstimatorKind::UnimodalNonRecursive, models);
    CHECK(mm->weights[concrete] == 1.0);
    CHECK(u->mean() == models[concrete].mu);
  }
  CHECK(checked > 0);

  // Baselines never touch alpha, and resetting it does not change them.
  Mesh mesh = mappers[1].mesh();
  for (std::size_t f = 0; f < mesh.numFaces(); ++f) {
    for (double a : mesh.alpha(f)) REQUIRE(a == 0.0);
    mesh.alpha(f)[0] = 42.0;
    const auto a = estimateFaceProperty(mesh, f, EstimatorKind::MultimodalNonRecursive, models);
    const auto b = estimateFaceProperty(mappers[1].mesh(), f, EstimatorKind::MultimodalNonRecursive, models);
    REQUIRE(a.has_value() == b.has_value());
    if (a) CHECK(a->mean() == b->mean());
  }
}

TEST_CASE("soft alpha equals the sum of per-frame score sums")
{
  sim::WorldSpec w = test::flatWorld("rug", 0.0, 4);
  const auto k = static_cast<Eigen::Index>(w.numClasses());
  w.noise.confusion = Eigen::MatrixXd::Constant(k, k, 0.3 / (k - 1));
  w.noise.confusion.diagonal().setConstant(0.7);
  w.noise.scoreSoftness = 0.2;
  w.seed = 77;
  SemanticMapper mapper(configFor(w));
  std::vector<double> expected(mapper.mesh().numFaces() * w.numClasses(), 0.0);
  for (const auto& r : sim::renderFrames(w)) {
    // Independent accumulation over the same assignment rule.
    const SemanticCloud cloud = projectFrame(r.frame.depth, r.frame.scores, r.frame.numClasses, r.frame.intrinsics, r.frame.pose);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const auto f = mapper.mesh().lookupFace(cloud.mapPoint(i).head<2>());
      if (!f) continue;
      double sum = 0.0;
      for (double s : cloud.scores(i)) sum += s;
      for (std::size_t j = 0; j < w.numClasses(); ++j) expected[*f * w.numClasses() + j] += cloud.scores(i)[j] / sum;
    }
    mapper.processFrame(r.frame);
  }
  for (std::size_t f = 0; f < mapper.mesh().numFaces(); ++f) {
    for (std::size_t j = 0; j < w.numClasses(); ++j) {
      REQUIRE(std::abs(mapper.mesh().alpha(f)[j] - expected[f * w.numClasses() + j]) < 1e-12 * std::max(1.0, expected[f * w.numClasses() + j]));
    }
  }
}

TEST_CASE("recursive estimate settles on the true class while the unimodal baseline flickers")
{
  sim::WorldSpec w = test::flatWorld("rug", 0.0, 40);
  const auto k = static_cast<Eigen::Index>(w.numClasses());
  w.noise.confusion = Eigen::MatrixXd::Constant(k, k, 0.4 / (k - 1));
  w.noise.confusion.diagonal().setConstant(0.6);
  w.noise.scoreSoftness = 0.3;
  w.noise.labelTilePx = 16;
  w.seed = 5;
  const auto rug = *test::shippedCatalog().indexOf("rug");
  SemanticMapper rec(configFor(w));
  SemanticMapper uni(configFor(w, EstimatorKind::UnimodalNonRecursive));
  const Mesh& rm = rec.mesh();
  const std::size_t face = rm.lookupFace({0.02, 0.03}).value();
  std::vector<std::size_t> recArgmax, uniArgmax;
  for (const auto& r : sim::renderFrames(w)) {
    rec.processFrame(r.frame);
    uni.processFrame(r.frame);
    recArgmax.push_back(argmaxClass(rm.alpha(face)));
    uniArgmax.push_back(argmaxClass(uni.mesh().latestScores(face)));
  }
  for (std::size_t i = recArgmax.size() - 10; i < recArgmax.size(); ++i) CHECK(recArgmax[i] == rug);
  std::size_t changes = 0;
  for (std::size_t i = 1; i < uniArgmax.size(); ++i) changes += uniArgmax[i] != uniArgmax[i - 1];
  CHECK(changes > 0);
}

TEST_CASE("mapping is deterministic")
{
  auto world = sim::scenario("two-class-split-noisy", test::shippedCatalog(), 3).value();
  world.trajectory.resize(5);
  SemanticMapper a(configFor(world)), b(configFor(world));
  for (const auto& r : sim::renderFrames(world)) a.processFrame(r.frame);
  for (const auto& r : sim::renderFrames(world)) b.processFrame(r.frame);
  CHECK(a.mesh().sameState(b.mesh()));
}

TEST_CASE("follow-camera recenters under the camera")
{
  sim::WorldSpec w = test::flatWorld("grass", 0.0, 1);
  w.trajectory[0].position.x() = 0.55;
  PipelineConfig c = configFor(w);
  c.followCamera = true;
  SemanticMapper mapper(c);
  mapper.processFrame(sim::renderFrame(w, 0).frame);
  CHECK(mapper.mesh().centerCell() == std::array<std::int64_t, 2>{5, 0});
}
