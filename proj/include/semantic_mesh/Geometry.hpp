#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace semantic_mesh {

/*!
 * Camera pose in the mapping frame.
 *
 * `rotation` is R_S^M (sensor to map) and `translation` is t_S^M. Points are
 * mapped with p_M = R^T p_S - t, so a camera whose axes are given in the map
 * frame by the columns of C and whose optical center sits at c is represented
 * by rotation = C^T and translation = -c (see Pose::fromCameraInMap).
 *
 * `rotationCov` is the covariance of a small-angle rotation perturbation
 * delta (radians^2) acting as R^T -> R^T Exp(delta).
 */
struct Pose
{
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  Eigen::Matrix3d rotationCov = Eigen::Matrix3d::Zero();

  static Pose fromCameraInMap(const Eigen::Matrix3d& cameraAxesInMap, const Eigen::Vector3d& cameraCenterInMap,
                              const Eigen::Matrix3d& rotationCov = Eigen::Matrix3d::Zero());

  //! Throws InputError unless rotation is orthonormal with det +1 (1e-9) and rotationCov is symmetric PSD.
  void validate() const;
};

struct CameraIntrinsics
{
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  void validate() const;
};

//! Non-owning view of one projected measurement.
struct SemanticPoint
{
  Eigen::Vector3d position;
  std::span<const double> scores;
};

/*!
 * Projected point cloud with per-point class scores stored contiguously
 * (point i owns scores[i*k, (i+1)*k)). The sensor-frame coordinates are kept
 * alongside because the height variance is a function of them.
 */
class SemanticCloud
{
 public:
  explicit SemanticCloud(int numClasses = 1) : numClasses_(numClasses) {}

  int numClasses() const { return numClasses_; }
  std::size_t size() const { return mapPoints_.size(); }
  bool empty() const { return mapPoints_.empty(); }

  void reserve(std::size_t n);
  void clear();
  void push_back(const Eigen::Vector3d& mapPoint, const Eigen::Vector3d& sensorPoint, std::span<const double> scores);

  SemanticPoint operator[](std::size_t i) const { return {mapPoints_[i], scores(i)}; }
  const Eigen::Vector3d& mapPoint(std::size_t i) const { return mapPoints_[i]; }
  const Eigen::Vector3d& sensorPoint(std::size_t i) const { return sensorPoints_[i]; }
  std::span<const double> scores(std::size_t i) const
  {
    return {scores_.data() + i * static_cast<std::size_t>(numClasses_), static_cast<std::size_t>(numClasses_)};
  }

 private:
  int numClasses_;
  std::vector<Eigen::Vector3d> mapPoints_;
  std::vector<Eigen::Vector3d> sensorPoints_;
  std::vector<double> scores_;
};

Eigen::Vector3d transformToMap(const Eigen::Vector3d& sensorPoint, const Pose& pose);

/*!
 * Back-projects every pixel with finite positive depth through the pinhole
 * model (z-forward, depth is metric z) and transforms it into the map frame.
 *
 * depth is row-major height x width; scores is row-major height x width x k.
 * Score vectors are copied as given; callers normalise them beforehand.
 */
SemanticCloud projectFrame(std::span<const float> depth, std::span<const float> scores, int numClasses,
                           const CameraIntrinsics& intrinsics, const Pose& pose);

using Barycentric = std::array<double, 3>;

//! Throws DegenerateSimplexError when the triangle is collinear.
Barycentric barycentric(const Eigen::Vector2d& p, const Eigen::Vector2d& v1, const Eigen::Vector2d& v2,
                        const Eigen::Vector2d& v3);

//! Closed test: every coordinate in [0, 1].
bool inSimplex(const Barycentric& lambda);

//! Open test: every coordinate in (0, 1).
bool inSimplexStrict(const Barycentric& lambda);

}  // namespace semantic_mesh
