#pragma once

#include "semantic_mesh/Geometry.hpp"
#include "semantic_mesh/Mesh.hpp"

#include <Eigen/Core>

namespace semantic_mesh {

/*!
 * Depth noise of the range sensor: sigma_d(z) = a + b z + c z^2 meters.
 * The defaults follow the usual quadratic growth of stereo depth error.
 */
struct SensorNoiseModel
{
  double a = 0.001;
  double b = 0.0;
  double c = 0.0019;

  double depthStdDev(double depth) const { return a + b * depth + c * depth * depth; }
  //! Diagonal sensor-frame covariance with sigma_d^2 on the optical (z) axis.
  Eigen::Matrix3d covariance(double depth) const;
  void validate() const;

  bool operator==(const SensorNoiseModel&) const = default;
};

struct HeightMeasurement
{
  double z = 0.0;
  double variance = 0.0;
};

/*!
 * Height of a sensor-frame point in the map frame and its first-order variance
 *   sigma^2 = Js Ss Js^T + Jp Sp Jp^T,
 * with Js the third row of R^T and Jp = Js x p_S.
 */
HeightMeasurement heightVariance(const Eigen::Vector3d& sensorPoint, const Pose& pose,
                                 const Eigen::Matrix3d& sensorCov, const Eigen::Matrix3d& rotationCov);

struct HeightEstimate
{
  double mean = 0.0;
  double variance = 0.0;
};

//! One-dimensional Kalman (precision-weighted) fusion. Throws InconsistentCertaintyError
//! when both variances are zero and the means disagree.
HeightEstimate kalmanUpdate(HeightEstimate prior, HeightMeasurement observation);

/*!
 * Fuses an observation into a mesh vertex. A vertex that has never been
 * observed carries no information yet, so it takes the observation as is.
 */
void fuseIntoVertex(Vertex& vertex, HeightMeasurement observation);

/*!
 * Updates every vertex from the interior points of its incident faces.
 * `measurements[i]` is the precomputed height measurement of cloud point i
 * (see computeHeightMeasurements). Faces are visited in index order and
 * points in buffer order.
 */
void updateElevation(Mesh& mesh, std::span<const HeightMeasurement> measurements);

std::vector<HeightMeasurement> computeHeightMeasurements(const SemanticCloud& cloud, const Pose& pose,
                                                         const SensorNoiseModel& noise);

}  // namespace semantic_mesh
