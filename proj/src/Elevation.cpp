#include "semantic_mesh/Elevation.hpp"

#include "semantic_mesh/Errors.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <sstream>

namespace semantic_mesh {

Eigen::Matrix3d SensorNoiseModel::covariance(double depth) const
{
  const double sigma = depthStdDev(depth);
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  cov(2, 2) = sigma * sigma;
  return cov;
}

void SensorNoiseModel::validate() const
{
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c) || a <= 0.0 || b < 0.0 || c < 0.0) {
    std::ostringstream msg;
    msg << "sensor noise model must satisfy a > 0, b >= 0, c >= 0 (got " << a << ", " << b << ", " << c << ")";
    throw ConfigError(msg.str());
  }
}

HeightMeasurement heightVariance(const Eigen::Vector3d& sensorPoint, const Pose& pose,
                                 const Eigen::Matrix3d& sensorCov, const Eigen::Matrix3d& rotationCov)
{
  // Third row of R^T is the third column of R.
  const Eigen::Vector3d js = pose.rotation.col(2);
  const Eigen::Vector3d jp = js.cross(sensorPoint);
  HeightMeasurement m;
  m.z = js.dot(sensorPoint) - pose.translation.z();
  m.variance = std::max(0.0, js.dot(sensorCov * js) + jp.dot(rotationCov * jp));
  return m;
}

HeightEstimate kalmanUpdate(HeightEstimate prior, HeightMeasurement observation)
{
  const double denom = observation.variance + prior.variance;
  if (denom == 0.0) {
    if (prior.mean != observation.z) {
      std::ostringstream msg;
      msg << "cannot fuse two zero-variance heights that disagree (" << prior.mean << " vs " << observation.z << ")";
      throw InconsistentCertaintyError(msg.str());
    }
    return prior;
  }
  HeightEstimate posterior;
  posterior.mean = (prior.mean * observation.variance + observation.z * prior.variance) / denom;
  posterior.variance = prior.variance * observation.variance / denom;
  return posterior;
}

void fuseIntoVertex(Vertex& vertex, HeightMeasurement observation)
{
  if (vertex.observations == 0) {
    vertex.zMean = observation.z;
    vertex.zVar = observation.variance;
  } else {
    const HeightEstimate fused = kalmanUpdate({vertex.zMean, vertex.zVar}, observation);
    vertex.zMean = fused.mean;
    vertex.zVar = fused.variance;
  }
  ++vertex.observations;
}

void updateElevation(Mesh& mesh, std::span<const HeightMeasurement> measurements)
{
  const std::size_t numVertices = mesh.numVertices();
  for (std::size_t v = 0; v < numVertices; ++v) {
    Vertex& vertex = mesh.vertex(v);
    for (std::uint32_t f : mesh.incidentFaces(v)) {
      for (std::uint32_t p : mesh.face(f).interiorPoints) fuseIntoVertex(vertex, measurements[p]);
    }
  }
}

std::vector<HeightMeasurement> computeHeightMeasurements(const SemanticCloud& cloud, const Pose& pose,
                                                         const SensorNoiseModel& noise)
{
  std::vector<HeightMeasurement> out(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3d& ps = cloud.sensorPoint(i);
    out[i] = heightVariance(ps, pose, noise.covariance(ps.z()), pose.rotationCov);
  }
  return out;
}

}  // namespace semantic_mesh
