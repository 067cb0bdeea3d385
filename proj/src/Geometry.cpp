#include "semantic_mesh/Geometry.hpp"

#include "semantic_mesh/Errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace semantic_mesh {

Pose Pose::fromCameraInMap(const Eigen::Matrix3d& cameraAxesInMap, const Eigen::Vector3d& cameraCenterInMap,
                           const Eigen::Matrix3d& rotationCov)
{
  Pose pose;
  pose.rotation = cameraAxesInMap.transpose();
  pose.translation = -cameraCenterInMap;
  pose.rotationCov = rotationCov;
  return pose;
}

void Pose::validate() const
{
  if (!rotation.allFinite() || !translation.allFinite() || !rotationCov.allFinite()) {
    throw InputError("pose contains non-finite values");
  }
  const double orthoError = (rotation * rotation.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (orthoError > 1e-9 || std::abs(rotation.determinant() - 1.0) > 1e-9) {
    throw InputError("pose rotation is not a proper rotation matrix");
  }
  if ((rotationCov - rotationCov.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw InputError("pose rotation covariance is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(rotationCov, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -1e-12) {
    throw InputError("pose rotation covariance is not positive semi-definite");
  }
}

void CameraIntrinsics::validate() const
{
  if (!(fx > 0.0) || !(fy > 0.0) || width <= 0 || height <= 0 || !(cx >= 0.0) || !(cx < width) || !(cy >= 0.0) ||
      !(cy < height)) {
    std::ostringstream msg;
    msg << "invalid camera intrinsics fx=" << fx << " fy=" << fy << " cx=" << cx << " cy=" << cy << " size=" << width
        << "x" << height;
    throw InputError(msg.str());
  }
}

void SemanticCloud::reserve(std::size_t n)
{
  mapPoints_.reserve(n);
  sensorPoints_.reserve(n);
  scores_.reserve(n * static_cast<std::size_t>(numClasses_));
}

void SemanticCloud::clear()
{
  mapPoints_.clear();
  sensorPoints_.clear();
  scores_.clear();
}

void SemanticCloud::push_back(const Eigen::Vector3d& mapPoint, const Eigen::Vector3d& sensorPoint,
                              std::span<const double> scores)
{
  if (scores.size() != static_cast<std::size_t>(numClasses_)) {
    throw InputError("score vector length does not match the number of classes");
  }
  mapPoints_.push_back(mapPoint);
  sensorPoints_.push_back(sensorPoint);
  scores_.insert(scores_.end(), scores.begin(), scores.end());
}

Eigen::Vector3d transformToMap(const Eigen::Vector3d& sensorPoint, const Pose& pose)
{
  return pose.rotation.transpose() * sensorPoint - pose.translation;
}

SemanticCloud projectFrame(std::span<const float> depth, std::span<const float> scores, int numClasses,
                           const CameraIntrinsics& intrinsics, const Pose& pose)
{
  if (numClasses <= 0) {
    throw InputError("number of classes must be positive");
  }
  const std::size_t pixels = static_cast<std::size_t>(intrinsics.width) * static_cast<std::size_t>(intrinsics.height);
  const std::size_t k = static_cast<std::size_t>(numClasses);
  if (depth.size() != pixels || scores.size() != pixels * k) {
    std::ostringstream msg;
    msg << "frame dimension mismatch: depth has " << depth.size() << " values, scores " << scores.size()
        << ", expected " << pixels << " and " << pixels * k;
    throw InputError(msg.str());
  }

  SemanticCloud cloud(numClasses);
  cloud.reserve(pixels);
  const Eigen::Matrix3d rotationT = pose.rotation.transpose();
  std::vector<double> pixelScores(k);
  for (int v = 0; v < intrinsics.height; ++v) {
    for (int u = 0; u < intrinsics.width; ++u) {
      const std::size_t index = static_cast<std::size_t>(v) * intrinsics.width + u;
      const double d = depth[index];
      if (!std::isfinite(d) || d <= 0.0) continue;
      const Eigen::Vector3d sensorPoint((u - intrinsics.cx) * d / intrinsics.fx, (v - intrinsics.cy) * d / intrinsics.fy,
                                        d);
      const Eigen::Vector3d mapPoint = rotationT * sensorPoint - pose.translation;
      for (std::size_t j = 0; j < k; ++j) pixelScores[j] = scores[index * k + j];
      cloud.push_back(mapPoint, sensorPoint, pixelScores);
    }
  }
  return cloud;
}

Barycentric barycentric(const Eigen::Vector2d& p, const Eigen::Vector2d& v1, const Eigen::Vector2d& v2,
                        const Eigen::Vector2d& v3)
{
  // Inverse of [1 1 1; x1 x2 x3; y1 y2 y3] applied to [1; px; py], written out
  // with cofactors relative to v1.
  const Eigen::Vector2d e2 = v2 - v1;
  const Eigen::Vector2d e3 = v3 - v1;
  const double det = e2.x() * e3.y() - e3.x() * e2.y();
  const double scale = std::max({e2.squaredNorm(), e3.squaredNorm(), (v3 - v2).squaredNorm()});
  if (!(std::abs(det) > 1e-12 * scale)) {
    throw DegenerateSimplexError("triangle vertices are collinear");
  }
  const Eigen::Vector2d d = p - v1;
  const double l2 = (d.x() * e3.y() - e3.x() * d.y()) / det;
  const double l3 = (e2.x() * d.y() - d.x() * e2.y()) / det;
  return {1.0 - l2 - l3, l2, l3};
}

bool inSimplex(const Barycentric& lambda)
{
  for (double l : lambda) {
    if (!(l >= 0.0 && l <= 1.0)) return false;
  }
  return true;
}

bool inSimplexStrict(const Barycentric& lambda)
{
  for (double l : lambda) {
    if (!(l > 0.0 && l < 1.0)) return false;
  }
  return true;
}

}  // namespace semantic_mesh
