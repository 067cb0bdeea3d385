#pragma once

#include "semantic_mesh/Elevation.hpp"
#include "semantic_mesh/FrameBundle.hpp"
#include "semantic_mesh/Mesh.hpp"
#include "semantic_mesh/Properties.hpp"
#include "semantic_mesh/Semantics.hpp"

#include <optional>
#include <string>
#include <vector>

namespace semantic_mesh {

enum class EstimatorKind
{
  Recursive,
  UnimodalNonRecursive,
  MultimodalNonRecursive,
};

std::string toString(EstimatorKind kind);
EstimatorKind parseEstimatorKind(const std::string& text);

struct PipelineConfig
{
  MeshConfig mesh;
  EstimatorKind estimator = EstimatorKind::Recursive;
  UpdateMode updateMode = UpdateMode::Soft;
  SensorNoiseModel noise;
  //! Recenter the mesh on the camera's ground position before each frame.
  bool followCamera = false;
};

//! Wall-clock breakdown of one processed frame, in seconds.
struct FrameTiming
{
  std::uint64_t frameId = 0;
  bool skipped = false;
  std::string skipReason;
  std::size_t points = 0;          // valid projected points
  std::size_t assignedPoints = 0;  // points that landed inside the mesh
  double validation = 0.0;         // frame checks and recentering
  double projection = 0.0;
  double assignment = 0.0;
  double elevation = 0.0;
  double semantics = 0.0;
  double total = 0.0;

  double partsSum() const { return validation + projection + assignment + elevation + semantics; }
  //! Point assignment, elevation and class update, without projection.
  double update() const { return assignment + elevation + semantics; }
};

/*!
 * Runs the per-frame mapping loop: project the frame, assign points to faces,
 * fuse heights into vertices, then update the per-face class belief.
 *
 * With the recursive estimator every interior point updates the face's
 * Dirichlet parameters. The non-recursive estimators leave alpha untouched and
 * only keep the mean scores of the latest frame that observed each face.
 */
class SemanticMapper
{
 public:
  explicit SemanticMapper(const PipelineConfig& config);

  const PipelineConfig& config() const { return config_; }
  const Mesh& mesh() const { return mesh_; }
  Mesh& mesh() { return mesh_; }

  //! Processes one frame. A frame failing validation is skipped and counted, not thrown.
  FrameTiming processFrame(const FrameBundle& frame);

  std::uint64_t framesProcessed() const { return framesProcessed_; }
  std::uint64_t framesSkipped() const { return framesSkipped_; }
  void setFrameCounters(std::uint64_t processed, std::uint64_t skipped);

 private:
  std::size_t assignPoints(const SemanticCloud& cloud, std::vector<std::uint32_t>& touchedFaces);
  void updateSemantics(const SemanticCloud& cloud, const std::vector<std::uint32_t>& touchedFaces);

  PipelineConfig config_;
  Mesh mesh_;
  std::uint64_t framesProcessed_ = 0;
  std::uint64_t framesSkipped_ = 0;
};

//! Property belief of one face under the given estimator; nullopt means unknown.
std::optional<PropertyMixture> estimateFaceProperty(const Mesh& mesh, std::size_t face, EstimatorKind kind,
                                                    std::span<const PropertyModel> models);

std::vector<std::optional<PropertyMixture>> estimateProperties(const Mesh& mesh, EstimatorKind kind,
                                                               std::span<const PropertyModel> models);

}  // namespace semantic_mesh
