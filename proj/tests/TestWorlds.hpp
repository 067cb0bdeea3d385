#pragma once

#include "semantic_mesh/Simulator.hpp"

#include <Eigen/Geometry>

#include <filesystem>
#include <numbers>
#include <random>
#include <string>

namespace semantic_mesh::test {

inline ClassCatalog shippedCatalog()
{
  return loadModels(defaultModelsPath()).catalog;
}

// Clean flat world of one class, seen from 2 m above the ground.
inline sim::WorldSpec flatWorld(const std::string& className, double groundHeight, int frames = 1)
{
  const ClassCatalog catalog = shippedCatalog();
  sim::WorldSpec w;
  w.name = "test-flat";
  w.classNames = catalog.names();
  w.defaultClass = *catalog.indexOf(className);
  w.terrain.baseHeight = groundHeight;
  w.camera.fx = w.camera.fy = 60.0;
  w.camera.width = 64;
  w.camera.height = 48;
  w.camera.cx = 31.5;
  w.camera.cy = 23.5;
  for (int i = 0; i < frames; ++i) {
    w.trajectory.push_back({Eigen::Vector3d(0.0, 0.0, groundHeight + 2.0), std::numbers::pi / 2, std::numbers::pi / 2 - 0.02});
  }
  const auto k = static_cast<Eigen::Index>(w.classNames.size());
  w.noise.confusion = Eigen::MatrixXd::Identity(k, k);
  w.meshSideLength = 0.1;
  w.meshHalfExtent = 1.0;
  return w;
}

inline std::filesystem::path freshDir(const std::string& name)
{
  const auto dir = std::filesystem::temp_directory_path() / ("semantic_mesh_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline Eigen::Matrix3d randomRotation(std::mt19937_64& rng)
{
  std::normal_distribution<double> n;
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

inline Eigen::Matrix3d randomPsd(std::mt19937_64& rng, double scale)
{
  std::normal_distribution<double> n;
  Eigen::Matrix3d a;
  for (int i = 0; i < 9; ++i) a(i / 3, i % 3) = n(rng);
  return scale * a * a.transpose();
}

}  // namespace semantic_mesh::test
