#include "semantic_mesh/Pipeline.hpp"

#include "semantic_mesh/Errors.hpp"

#include <algorithm>
#include <chrono>

namespace semantic_mesh {

namespace {

using Clock = std::chrono::steady_clock;

double secondsSince(Clock::time_point start, Clock::time_point end)
{
  return std::chrono::duration<double>(end - start).count();
}

}  // namespace

std::string toString(EstimatorKind kind)
{
  switch (kind) {
    case EstimatorKind::Recursive:
      return "recursive";
    case EstimatorKind::UnimodalNonRecursive:
      return "unimodal_nonrecursive";
    case EstimatorKind::MultimodalNonRecursive:
      return "multimodal_nonrecursive";
  }
  return "unknown";
}

EstimatorKind parseEstimatorKind(const std::string& text)
{
  if (text == "recursive") return EstimatorKind::Recursive;
  if (text == "unimodal_nonrecursive") return EstimatorKind::UnimodalNonRecursive;
  if (text == "multimodal_nonrecursive") return EstimatorKind::MultimodalNonRecursive;
  throw ConfigError("unknown estimator '" + text +
                    "' (expected recursive, unimodal_nonrecursive or multimodal_nonrecursive)");
}

SemanticMapper::SemanticMapper(const PipelineConfig& config) : config_(config), mesh_(config.mesh)
{
  config_.noise.validate();
}

void SemanticMapper::setFrameCounters(std::uint64_t processed, std::uint64_t skipped)
{
  framesProcessed_ = processed;
  framesSkipped_ = skipped;
}

FrameTiming SemanticMapper::processFrame(const FrameBundle& frame)
{
  FrameTiming timing;
  timing.frameId = frame.frameId;
  const auto start = Clock::now();
  try {
    frame.validate();
    if (frame.numClasses != mesh_.numClasses()) throw InputError("frame class count does not match the mesh");
  } catch (const Error& e) {
    timing.skipped = true;
    timing.skipReason = e.what();
    ++framesSkipped_;
    timing.total = secondsSince(start, Clock::now());
    return timing;
  }

  if (config_.followCamera) mesh_.recenter(-frame.pose.translation.head<2>());

  const auto t0 = Clock::now();
  SemanticCloud cloud = projectFrame(frame.depth, frame.scores, frame.numClasses, frame.intrinsics, frame.pose);
  const auto t1 = Clock::now();

  std::vector<std::uint32_t> touchedFaces;
  timing.assignedPoints = assignPoints(cloud, touchedFaces);
  const auto t2 = Clock::now();

  const std::vector<HeightMeasurement> heights = computeHeightMeasurements(cloud, frame.pose, config_.noise);
  updateElevation(mesh_, heights);
  const auto t3 = Clock::now();

  updateSemantics(cloud, touchedFaces);
  for (std::uint32_t f : touchedFaces) mesh_.face(f).interiorPoints.clear();
  const auto t4 = Clock::now();

  mesh_.setFrameCount(mesh_.frameCount() + 1);
  ++framesProcessed_;

  timing.points = cloud.size();
  timing.validation = secondsSince(start, t0);
  timing.projection = secondsSince(t0, t1);
  timing.assignment = secondsSince(t1, t2);
  timing.elevation = secondsSince(t2, t3);
  timing.semantics = secondsSince(t3, t4);
  timing.total = secondsSince(start, t4);
  return timing;
}

std::size_t SemanticMapper::assignPoints(const SemanticCloud& cloud, std::vector<std::uint32_t>& touchedFaces)
{
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3d& p = cloud.mapPoint(i);
    const auto f = mesh_.lookupFace(p.head<2>());
    if (!f) continue;
    auto& buffer = mesh_.face(*f).interiorPoints;
    if (buffer.empty()) touchedFaces.push_back(static_cast<std::uint32_t>(*f));
    buffer.push_back(static_cast<std::uint32_t>(i));
    ++assigned;
  }
  std::sort(touchedFaces.begin(), touchedFaces.end());
  return assigned;
}

void SemanticMapper::updateSemantics(const SemanticCloud& cloud, const std::vector<std::uint32_t>& touchedFaces)
{
  const std::size_t k = static_cast<std::size_t>(mesh_.numClasses());
  std::vector<double> scores(k);
  for (std::uint32_t f : touchedFaces) {
    const auto& points = mesh_.face(f).interiorPoints;
    auto latest = mesh_.latestScores(f);
    std::fill(latest.begin(), latest.end(), 0.0);
    auto alpha = mesh_.alpha(f);
    for (std::uint32_t p : points) {
      // Renormalise in double precision; frames carry float32 scores.
      const auto raw = cloud.scores(p);
      double sum = 0.0;
      for (double s : raw) sum += s;
      for (std::size_t j = 0; j < k; ++j) scores[j] = raw[j] / sum;
      if (config_.estimator == EstimatorKind::Recursive) dirichletUpdate(alpha, scores, config_.updateMode);
      for (std::size_t j = 0; j < k; ++j) latest[j] += scores[j];
    }
    const double n = static_cast<double>(points.size());
    for (double& s : latest) s /= n;
    mesh_.setFaceObservations(f, mesh_.faceObservations(f) + 1);
  }
}

std::optional<PropertyMixture> estimateFaceProperty(const Mesh& mesh, std::size_t face, EstimatorKind kind,
                                                    std::span<const PropertyModel> models)
{
  if (models.size() != static_cast<std::size_t>(mesh.numClasses())) {
    throw ConfigError("property models do not cover the mesh's classes");
  }
  switch (kind) {
    case EstimatorKind::Recursive:
      return propertyMixture(mesh.alpha(face), models);
    case EstimatorKind::MultimodalNonRecursive:
      if (mesh.faceObservations(face) == 0) return std::nullopt;
      return propertyMixture(mesh.latestScores(face), models);
    case EstimatorKind::UnimodalNonRecursive:
      if (mesh.faceObservations(face) == 0) return std::nullopt;
      return singleClassMixture(argmaxClass(mesh.latestScores(face)), models);
  }
  return std::nullopt;
}

std::vector<std::optional<PropertyMixture>> estimateProperties(const Mesh& mesh, EstimatorKind kind,
                                                               std::span<const PropertyModel> models)
{
  std::vector<std::optional<PropertyMixture>> out(mesh.numFaces());
  for (std::size_t f = 0; f < mesh.numFaces(); ++f) out[f] = estimateFaceProperty(mesh, f, kind, models);
  return out;
}

}  // namespace semantic_mesh
