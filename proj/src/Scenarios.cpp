#include "semantic_mesh/Errors.hpp"
#include "semantic_mesh/Simulator.hpp"

#include <cmath>
#include <numbers>

namespace semantic_mesh::sim {

namespace {

constexpr int kCleanFrames = 5;
constexpr int kNoisyFrames = 50;
constexpr std::string_view kNoisySuffix = "-noisy";

std::vector<Eigen::Vector2d> box(double xmin, double ymin, double xmax, double ymax)
{
  return {{xmin, ymin}, {xmax, ymin}, {xmax, ymax}, {xmin, ymax}};
}

CameraIntrinsics deskCamera()
{
  CameraIntrinsics c;
  c.fx = 100.0;
  c.fy = 100.0;
  c.cx = 79.5;
  c.cy = 59.5;
  c.width = 160;
  c.height = 120;
  return c;
}

// Near-nadir hover with a small deterministic wobble, so consecutive frames
// see each face from slightly different rays.
std::vector<CameraWaypoint> hover(int frames, double groundHeight)
{
  std::vector<CameraWaypoint> out;
  for (int i = 0; i < frames; ++i) {
    CameraWaypoint wp;
    wp.position = {0.05 * std::sin(0.7 * i), 0.05 * std::cos(0.9 * i) - 0.05, groundHeight + 2.0 + 0.02 * std::sin(0.3 * i)};
    wp.yaw = std::numbers::pi / 2 + 0.03 * std::sin(0.5 * i);
    wp.pitch = std::numbers::pi / 2 - 0.05 + 0.02 * std::cos(0.4 * i);
    out.push_back(wp);
  }
  return out;
}

std::size_t need(const ClassCatalog& catalog, const std::string& name)
{
  const auto idx = catalog.indexOf(name);
  if (!idx) throw ConfigError("scenario needs class '" + name + "', which the model catalog lacks");
  return *idx;
}

NoiseSpec cleanNoise(std::size_t k)
{
  NoiseSpec n;
  n.confusion = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  return n;
}

NoiseSpec heavyNoise(std::size_t k)
{
  NoiseSpec n;
  n.depthA = 0.001;
  n.depthC = 0.0019;
  const auto kk = static_cast<Eigen::Index>(k);
  const double diag = 0.8;
  n.confusion = Eigen::MatrixXd::Constant(kk, kk, k > 1 ? (1.0 - diag) / static_cast<double>(k - 1) : 0.0);
  n.confusion.diagonal().setConstant(k > 1 ? diag : 1.0);
  n.scoreSoftness = 0.3;
  n.labelTilePx = 12;
  n.rotationCov = Eigen::Matrix3d::Identity() * (0.002 * 0.002);
  return n;
}

WorldSpec base(const std::string& name, const ClassCatalog& catalog, std::uint64_t seed, bool noisy)
{
  WorldSpec w;
  w.name = name;
  w.classNames = catalog.names();
  w.camera = deskCamera();
  w.noise = noisy ? heavyNoise(w.numClasses()) : cleanNoise(w.numClasses());
  w.seed = seed;
  return w;
}

}  // namespace

std::vector<std::string> scenarioNames()
{
  std::vector<std::string> names{"flat-single-class", "two-class-split", "ramp", "imbalanced"};
  const std::size_t clean = names.size();
  for (std::size_t i = 0; i < clean; ++i) names.push_back(names[i] + std::string(kNoisySuffix));
  return names;
}

std::optional<WorldSpec> scenario(const std::string& name, const ClassCatalog& catalog, std::uint64_t seed)
{
  std::string stem = name;
  const bool noisy = stem.size() > kNoisySuffix.size() && stem.ends_with(kNoisySuffix);
  if (noisy) stem.resize(stem.size() - kNoisySuffix.size());

  WorldSpec w = base(name, catalog, seed, noisy);
  const int frames = noisy ? kNoisyFrames : kCleanFrames;

  if (stem == "flat-single-class") {
    w.terrain.baseHeight = 0.1;
    w.defaultClass = need(catalog, "grass");
    w.trajectory = hover(frames, 0.1);
  } else if (stem == "two-class-split") {
    // Icy left half (x < 0), concrete right half.
    w.defaultClass = need(catalog, "concrete");
    w.classRegions.push_back({need(catalog, "ice"), box(-50.0, -50.0, 0.0, 50.0)});
    w.trajectory = hover(frames, 0.0);
  } else if (stem == "ramp") {
    HeightPatch ramp;
    ramp.type = PatchType::Ramp;
    ramp.region = {-50.0, -50.0, 50.0, 50.0};
    ramp.gradient = {0.2, 0.0};
    HeightPatch bumps;
    bumps.type = PatchType::Sinusoid;
    bumps.region = {0.3, 0.2, 0.9, 0.8};
    bumps.height = 0.12;
    bumps.amplitude = 0.03;
    bumps.wavelength = 0.4;
    bumps.origin = {0.3, 0.2};
    HeightPatch step;
    step.type = PatchType::Step;
    step.region = {-0.8, -0.8, -0.4, -0.3};
    step.height = -0.05;
    // First match wins, so the local features go before the covering ramp.
    w.terrain.patches = {bumps, step, ramp};
    w.defaultClass = need(catalog, "grass");
    w.classRegions.push_back({need(catalog, "rocks"), box(0.3, 0.2, 0.9, 0.8)});
    w.classRegions.push_back({need(catalog, "concrete"), box(-0.8, -0.8, -0.4, -0.3)});
    w.trajectory = hover(frames, 0.0);
  } else if (stem == "imbalanced") {
    // Street-like scene dominated by high-friction classes.
    w.defaultClass = need(catalog, "concrete");
    w.classRegions.push_back({need(catalog, "ice"), box(-0.8, -0.8, -0.3, -0.2)});
    w.classRegions.push_back({need(catalog, "snow"), box(0.3, 0.2, 0.8, 0.7)});
    w.classRegions.push_back({need(catalog, "pebbles"), box(-0.2, 0.5, 0.2, 0.9)});
    w.classRegions.push_back({need(catalog, "grass"), box(0.2, -0.9, 0.8, -0.5)});
    w.classRegions.push_back({need(catalog, "rubber"), box(-0.9, 0.3, -0.6, 0.6)});
    w.trajectory = hover(frames, 0.0);
  } else {
    return std::nullopt;
  }
  w.validate();
  return w;
}

}  // namespace semantic_mesh::sim
