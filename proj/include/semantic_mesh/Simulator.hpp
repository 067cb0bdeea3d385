#pragma once

#include "semantic_mesh/FrameBundle.hpp"
#include "semantic_mesh/Mesh.hpp"
#include "semantic_mesh/Properties.hpp"

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace semantic_mesh::sim {

struct Rect
{
  double xmin = 0.0, ymin = 0.0, xmax = 0.0, ymax = 0.0;
  bool contains(double x, double y) const { return x >= xmin && x <= xmax && y >= ymin && y <= ymax; }
};

enum class PatchType
{
  Flat,
  Step,
  Ramp,
  Sinusoid,
};

/*!
 * Analytic height primitive over an axis-aligned region.
 *   Flat / Step: height
 *   Ramp:        height + gradient . (xy - origin)
 *   Sinusoid:    height + amplitude * sin(2 pi direction . (xy - origin) / wavelength)
 */
struct HeightPatch
{
  PatchType type = PatchType::Flat;
  Rect region;
  double height = 0.0;
  Eigen::Vector2d gradient = Eigen::Vector2d::Zero();
  Eigen::Vector2d origin = Eigen::Vector2d::Zero();
  double amplitude = 0.0;
  double wavelength = 1.0;
  Eigen::Vector2d direction = Eigen::Vector2d::UnitX();

  double heightAt(double x, double y) const;
};

//! Piecewise terrain: the first patch containing a point defines its height, otherwise baseHeight.
struct Heightfield
{
  double baseHeight = 0.0;
  std::vector<HeightPatch> patches;

  int activePatch(double x, double y) const;
  double heightAt(double x, double y) const;
};

struct ClassRegion
{
  std::size_t classIndex = 0;
  std::vector<Eigen::Vector2d> polygon;
};

//! Camera placement: optical center and heading (yaw about +z), pitch below the horizon.
struct CameraWaypoint
{
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  double yaw = 0.0;
  double pitch = 0.0;
};

//! Columns are the camera x (right), y (down), z (optical axis) axes in the map frame.
Eigen::Matrix3d cameraAxes(double yaw, double pitch);

struct NoiseSpec
{
  //! Depth noise sigma_d(z) = a + b z + c z^2; all zero disables it.
  double depthA = 0.0, depthB = 0.0, depthC = 0.0;
  //! k x k row-stochastic class confusion; row = true class, column = reported class.
  Eigen::MatrixXd confusion;
  //! Weight of a uniform-Dirichlet jitter mixed into the one-hot reported label, in [0, 0.5).
  double scoreSoftness = 0.0;
  //! Reported labels are drawn once per square tile of this many pixels.
  int labelTilePx = 1;
  //! Covariance of the small-angle rotation error applied to reported poses.
  Eigen::Matrix3d rotationCov = Eigen::Matrix3d::Zero();
};

struct WorldSpec
{
  std::string name;
  std::vector<std::string> classNames;
  Heightfield terrain;
  std::size_t defaultClass = 0;
  std::vector<ClassRegion> classRegions;  // first containing polygon wins
  CameraIntrinsics camera;
  std::vector<CameraWaypoint> trajectory;
  NoiseSpec noise;
  double maxRange = 30.0;
  double meshSideLength = 0.05;
  double meshHalfExtent = 1.0;
  std::uint64_t seed = 0;

  std::size_t numClasses() const { return classNames.size(); }
  std::size_t classAt(double x, double y) const;
  //! Throws ConfigError on inconsistent specs (confusion shape/rows, class indices, softness range).
  void validate() const;
};

struct RenderedFrame
{
  FrameBundle frame;
  bool valid = true;
  std::string reason;
  //! Noise-free ray length along the optical axis per pixel (NaN for misses).
  std::vector<double> exactDepth;
  std::vector<std::size_t> trueClass;  // per pixel, only meaningful where exactDepth is finite
};

/*!
 * Ray-casts frame `index` of the trajectory. All randomness is drawn from
 * streams keyed by (seed, frame, pixel or tile), so rendering is independent
 * of order and thread count.
 */
RenderedFrame renderFrame(const WorldSpec& world, std::size_t index);
std::vector<RenderedFrame> renderFrames(const WorldSpec& world);

//! Distance along the ray origin + t * direction to the first terrain hit.
std::optional<double> castRay(const Heightfield& terrain, const Eigen::Vector3d& origin,
                              const Eigen::Vector3d& direction, double maxT);

struct GroundTruth
{
  std::vector<std::size_t> faceClass;  // class at each face centroid
  std::vector<double> vertexHeight;
  std::vector<PropertyModel> classModels;
};

GroundTruth groundTruth(const WorldSpec& world, const Mesh& mesh, std::span<const PropertyModel> models);

nlohmann::json worldToJson(const WorldSpec& world);
WorldSpec worldFromJson(const nlohmann::json& j);
WorldSpec loadWorld(const std::filesystem::path& path);

/*!
 * Writes a frame-bundle directory for the world plus `truth.json`, which holds
 * the full world spec (ground truth is derived from it for any mesh).
 */
void writeSimulation(const WorldSpec& world, const std::filesystem::path& outDir);

//! Names of the built-in scenarios.
std::vector<std::string> scenarioNames();
//! Built-in scenario by name; classes come from the catalog (default: shipped models).
std::optional<WorldSpec> scenario(const std::string& name, const ClassCatalog& catalog, std::uint64_t seed);

}  // namespace semantic_mesh::sim
