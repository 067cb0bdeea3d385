#include "semantic_mesh/Simulator.hpp"

#include "semantic_mesh/Errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

namespace semantic_mesh::sim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Stream tags keep the random sequences of different noise sources apart.
enum Stream : std::uint64_t
{
  kDepthStream = 1,
  kLabelStream = 2,
  kScoreStream = 3,
  kPoseStream = 4,
};

std::uint64_t splitmix(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Counter-based generator keyed by (seed, frame, stream, index).
class StreamRng
{
 public:
  StreamRng(std::uint64_t seed, std::uint64_t frame, std::uint64_t stream, std::uint64_t index)
      : state_(splitmix(seed ^ splitmix(frame ^ splitmix(stream ^ splitmix(index)))))
  {
  }

  std::uint64_t next()
  {
    state_ += 0x9e3779b97f4a7c15ULL;
    return splitmix(state_);
  }

  //! Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

  double normal()
  {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t state_;
};

bool pointInPolygon(const std::vector<Eigen::Vector2d>& poly, double x, double y)
{
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const auto& a = poly[i];
    const auto& b = poly[j];
    if ((a.y() > y) != (b.y() > y) && x < (b.x() - a.x()) * (y - a.y()) / (b.y() - a.y()) + a.x()) inside = !inside;
  }
  return inside;
}

bool isLinear(PatchType type)
{
  return type != PatchType::Sinusoid;
}

Eigen::Matrix3d smallRotation(const Eigen::Vector3d& delta)
{
  const double angle = delta.norm();
  if (angle == 0.0) return Eigen::Matrix3d::Identity();
  return Eigen::AngleAxisd(angle, delta / angle).toRotationMatrix();
}

Eigen::Matrix3d psdSqrt(const Eigen::Matrix3d& cov)
{
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  const Eigen::Vector3d roots = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return solver.eigenvectors() * roots.asDiagonal();
}

std::string patchTypeName(PatchType type)
{
  switch (type) {
    case PatchType::Flat:
      return "flat";
    case PatchType::Step:
      return "step";
    case PatchType::Ramp:
      return "ramp";
    case PatchType::Sinusoid:
      return "sinusoid";
  }
  return "flat";
}

PatchType parsePatchType(const std::string& s)
{
  if (s == "flat") return PatchType::Flat;
  if (s == "step") return PatchType::Step;
  if (s == "ramp") return PatchType::Ramp;
  if (s == "sinusoid") return PatchType::Sinusoid;
  throw ConfigError("unknown height patch type '" + s + "'");
}

nlohmann::json vec2(const Eigen::Vector2d& v)
{
  return {v.x(), v.y()};
}

Eigen::Vector2d vec2(const nlohmann::json& j)
{
  if (!j.is_array() || j.size() != 2) throw ConfigError("expected a 2-vector");
  return {j[0].get<double>(), j[1].get<double>()};
}

nlohmann::json matrixJson(const Eigen::MatrixXd& m)
{
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrixFromJson(const nlohmann::json& j)
{
  if (!j.is_array() || j.empty()) throw ConfigError("expected a matrix");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(j[0].size()));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (j[r].size() != static_cast<std::size_t>(m.cols())) throw ConfigError("ragged matrix");
    for (std::size_t c = 0; c < j[r].size(); ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
    }
  }
  return m;
}

}  // namespace

double HeightPatch::heightAt(double x, double y) const
{
  switch (type) {
    case PatchType::Flat:
    case PatchType::Step:
      return height;
    case PatchType::Ramp:
      return height + gradient.dot(Eigen::Vector2d(x, y) - origin);
    case PatchType::Sinusoid:
      return height +
             amplitude * std::sin(2.0 * std::numbers::pi * direction.dot(Eigen::Vector2d(x, y) - origin) / wavelength);
  }
  return height;
}

int Heightfield::activePatch(double x, double y) const
{
  for (std::size_t i = 0; i < patches.size(); ++i) {
    if (patches[i].region.contains(x, y)) return static_cast<int>(i);
  }
  return -1;
}

double Heightfield::heightAt(double x, double y) const
{
  const int p = activePatch(x, y);
  return p < 0 ? baseHeight : patches[static_cast<std::size_t>(p)].heightAt(x, y);
}

Eigen::Matrix3d cameraAxes(double yaw, double pitch)
{
  const Eigen::Vector3d forward(std::cos(pitch) * std::cos(yaw), std::cos(pitch) * std::sin(yaw), -std::sin(pitch));
  const Eigen::Vector3d right(std::sin(yaw), -std::cos(yaw), 0.0);
  const Eigen::Vector3d down = forward.cross(right);
  Eigen::Matrix3d axes;
  axes.col(0) = right;
  axes.col(1) = down;
  axes.col(2) = forward;
  return axes;
}

std::size_t WorldSpec::classAt(double x, double y) const
{
  for (const auto& region : classRegions) {
    if (pointInPolygon(region.polygon, x, y)) return region.classIndex;
  }
  return defaultClass;
}

void WorldSpec::validate() const
{
  const auto k = static_cast<Eigen::Index>(numClasses());
  if (k == 0) throw ConfigError("world has no classes");
  if (defaultClass >= numClasses()) throw ConfigError("world default class out of range");
  for (const auto& r : classRegions) {
    if (r.classIndex >= numClasses()) throw ConfigError("class region index out of range");
    if (r.polygon.size() < 3) throw ConfigError("class region polygon needs at least 3 corners");
  }
  if (noise.confusion.rows() != k || noise.confusion.cols() != k) {
    throw ConfigError("confusion matrix must be k x k");
  }
  for (Eigen::Index r = 0; r < k; ++r) {
    if (noise.confusion.row(r).minCoeff() < 0.0 || std::abs(noise.confusion.row(r).sum() - 1.0) > 1e-9) {
      throw ConfigError("confusion matrix row " + std::to_string(r) + " is not a probability vector");
    }
  }
  if (!(noise.scoreSoftness >= 0.0 && noise.scoreSoftness < 0.5)) throw ConfigError("score softness must be in [0, 0.5)");
  if (noise.labelTilePx < 1) throw ConfigError("label tile size must be at least one pixel");
  if (noise.depthA < 0.0 || noise.depthB < 0.0 || noise.depthC < 0.0) throw ConfigError("negative depth noise");
  for (const auto& p : terrain.patches) {
    if (p.type == PatchType::Sinusoid && !(p.wavelength > 0.0)) throw ConfigError("sinusoid wavelength must be > 0");
  }
  camera.validate();
  MeshConfig{meshSideLength, meshHalfExtent, static_cast<int>(numClasses())}.validate();
}

std::optional<double> castRay(const Heightfield& terrain, const Eigen::Vector3d& origin,
                              const Eigen::Vector3d& direction, double maxT)
{
  std::vector<double> breaks{0.0, maxT};
  auto addCrossing = [&](double o, double d, double bound) {
    if (d == 0.0) return;
    const double t = (bound - o) / d;
    if (t > 0.0 && t < maxT) breaks.push_back(t);
  };
  for (const auto& p : terrain.patches) {
    addCrossing(origin.x(), direction.x(), p.region.xmin);
    addCrossing(origin.x(), direction.x(), p.region.xmax);
    addCrossing(origin.y(), direction.y(), p.region.ymin);
    addCrossing(origin.y(), direction.y(), p.region.ymax);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  auto gap = [&](const HeightPatch* patch, double t) {
    const double x = origin.x() + t * direction.x();
    const double y = origin.y() + t * direction.y();
    const double h = patch ? patch->heightAt(x, y) : terrain.baseHeight;
    return origin.z() + t * direction.z() - h;
  };

  for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
    const double ta = breaks[b];
    const double tb = breaks[b + 1];
    const double tm = 0.5 * (ta + tb);
    const int active = terrain.activePatch(origin.x() + tm * direction.x(), origin.y() + tm * direction.y());
    const HeightPatch* patch = active < 0 ? nullptr : &terrain.patches[static_cast<std::size_t>(active)];

    const double fa = gap(patch, ta);
    if (fa <= 0.0) return ta;  // vertical wall at a patch boundary (or origin below terrain)
    const double fb = gap(patch, tb);

    if (!patch || isLinear(patch->type)) {
      if (fb > 0.0) continue;
      double h0 = terrain.baseHeight;
      double slope = 0.0;
      if (patch) {
        const Eigen::Vector2d g = patch->type == PatchType::Ramp ? patch->gradient : Eigen::Vector2d::Zero();
        h0 = patch->height + g.dot(origin.head<2>() - patch->origin);
        slope = g.dot(direction.head<2>());
      }
      const double denom = direction.z() - slope;
      const double t = denom != 0.0 ? (h0 - origin.z()) / denom : tb;
      return std::clamp(t, ta, tb);
    }

    // Sinusoid: march until the gap changes sign, then bisect.
    const double stepXY = patch->wavelength / 64.0;
    const double planar = direction.head<2>().norm();
    const int steps = std::clamp(planar > 0.0 ? static_cast<int>(std::ceil((tb - ta) * planar / stepXY)) : 1, 1, 100000);
    double lo = ta;
    double flo = fa;
    for (int s = 1; s <= steps; ++s) {
      const double hi = ta + (tb - ta) * s / steps;
      const double fhi = gap(patch, hi);
      if (fhi <= 0.0) {
        double a = lo, bnd = hi;
        for (int it = 0; it < 200 && bnd - a > 1e-14 * std::max(1.0, bnd); ++it) {
          const double mid = 0.5 * (a + bnd);
          if (gap(patch, mid) > 0.0) a = mid; else bnd = mid;
        }
        return 0.5 * (a + bnd);
      }
      lo = hi;
      flo = fhi;
    }
    (void)flo;
  }
  return std::nullopt;
}

RenderedFrame renderFrame(const WorldSpec& world, std::size_t index)
{
  const CameraWaypoint& wp = world.trajectory.at(index);
  const CameraIntrinsics& cam = world.camera;
  const std::size_t k = world.numClasses();
  const std::uint64_t frameId = index;

  RenderedFrame out;
  FrameBundle& frame = out.frame;
  frame.frameId = frameId;
  frame.timestamp = static_cast<double>(index) * 0.1;
  frame.intrinsics = cam;
  frame.numClasses = static_cast<int>(k);

  const Eigen::Matrix3d axes = cameraAxes(wp.yaw, wp.pitch);
  Eigen::Matrix3d reportedAxes = axes;
  if (world.noise.rotationCov.cwiseAbs().maxCoeff() > 0.0) {
    StreamRng rng(world.seed, frameId, kPoseStream, 0);
    const Eigen::Vector3d z(rng.normal(), rng.normal(), rng.normal());
    reportedAxes = axes * smallRotation(psdSqrt(world.noise.rotationCov) * z);
  }
  frame.pose = Pose::fromCameraInMap(reportedAxes, wp.position, world.noise.rotationCov);

  if (world.terrain.heightAt(wp.position.x(), wp.position.y()) >= wp.position.z()) {
    out.valid = false;
    out.reason = "camera is below the terrain surface";
    return out;
  }

  const std::size_t pixels = static_cast<std::size_t>(cam.width) * cam.height;
  frame.depth.assign(pixels, std::numeric_limits<float>::quiet_NaN());
  frame.scores.assign(pixels * k, 1.0f / static_cast<float>(k));
  out.exactDepth.assign(pixels, kNaN);
  out.trueClass.assign(pixels, world.defaultClass);

  const int tile = world.noise.labelTilePx;
  const int tilesX = (cam.width + tile - 1) / tile;
  const bool depthNoise = world.noise.depthA > 0.0 || world.noise.depthB > 0.0 || world.noise.depthC > 0.0;
  std::vector<double> jitter(k);

  for (int v = 0; v < cam.height; ++v) {
    for (int u = 0; u < cam.width; ++u) {
      const std::size_t p = static_cast<std::size_t>(v) * cam.width + u;
      const Eigen::Vector3d ray((u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0);
      const auto t = castRay(world.terrain, wp.position, axes * ray, world.maxRange);
      if (!t) continue;
      const double depth = *t;
      const Eigen::Vector3d hit = wp.position + depth * (axes * ray);
      const std::size_t trueClass = world.classAt(hit.x(), hit.y());
      out.exactDepth[p] = depth;
      out.trueClass[p] = trueClass;

      double noisy = depth;
      if (depthNoise) {
        StreamRng rng(world.seed, frameId, kDepthStream, p);
        const double sigma = world.noise.depthA + world.noise.depthB * depth + world.noise.depthC * depth * depth;
        noisy += sigma * rng.normal();
      }
      frame.depth[p] = static_cast<float>(noisy);

      StreamRng labelRng(world.seed, frameId, kLabelStream, static_cast<std::uint64_t>(v / tile) * tilesX + u / tile);
      const double draw = labelRng.uniform();
      std::size_t reported = k - 1;
      double cumulative = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        cumulative += world.noise.confusion(static_cast<Eigen::Index>(trueClass), static_cast<Eigen::Index>(j));
        if (draw < cumulative) {
          reported = j;
          break;
        }
      }

      float* scores = frame.scores.data() + p * k;
      const double eta = world.noise.scoreSoftness;
      if (eta > 0.0) {
        StreamRng scoreRng(world.seed, frameId, kScoreStream, p);
        double total = 0.0;
        for (double& g : jitter) {
          g = -std::log(scoreRng.uniform());
          total += g;
        }
        for (std::size_t j = 0; j < k; ++j) {
          scores[j] = static_cast<float>((j == reported ? 1.0 - eta : 0.0) + eta * jitter[j] / total);
        }
      } else {
        for (std::size_t j = 0; j < k; ++j) scores[j] = j == reported ? 1.0f : 0.0f;
      }
    }
  }
  return out;
}

std::vector<RenderedFrame> renderFrames(const WorldSpec& world)
{
  world.validate();
  std::vector<RenderedFrame> frames;
  frames.reserve(world.trajectory.size());
  for (std::size_t i = 0; i < world.trajectory.size(); ++i) frames.push_back(renderFrame(world, i));
  return frames;
}

GroundTruth groundTruth(const WorldSpec& world, const Mesh& mesh, std::span<const PropertyModel> models)
{
  if (models.size() != world.numClasses()) throw ConfigError("property models do not match the world's classes");
  GroundTruth truth;
  truth.classModels.assign(models.begin(), models.end());
  truth.faceClass.resize(mesh.numFaces());
  for (std::size_t f = 0; f < mesh.numFaces(); ++f) {
    const Eigen::Vector2d c = mesh.faceCentroid(f);
    truth.faceClass[f] = world.classAt(c.x(), c.y());
  }
  truth.vertexHeight.resize(mesh.numVertices());
  for (std::size_t v = 0; v < mesh.numVertices(); ++v) {
    truth.vertexHeight[v] = world.terrain.heightAt(mesh.vertex(v).x, mesh.vertex(v).y);
  }
  return truth;
}

nlohmann::json worldToJson(const WorldSpec& w)
{
  nlohmann::json j;
  j["format"] = "semantic-mesh-world";
  j["version"] = 1;
  j["name"] = w.name;
  j["seed"] = w.seed;
  j["class_names"] = w.classNames;
  j["default_class"] = w.classNames.at(w.defaultClass);
  j["base_height"] = w.terrain.baseHeight;
  nlohmann::json patches = nlohmann::json::array();
  for (const auto& p : w.terrain.patches) {
    patches.push_back({{"type", patchTypeName(p.type)},
                       {"region", {p.region.xmin, p.region.ymin, p.region.xmax, p.region.ymax}},
                       {"height", p.height},
                       {"gradient", vec2(p.gradient)},
                       {"origin", vec2(p.origin)},
                       {"amplitude", p.amplitude},
                       {"wavelength", p.wavelength},
                       {"direction", vec2(p.direction)}});
  }
  j["height_patches"] = std::move(patches);
  nlohmann::json regions = nlohmann::json::array();
  for (const auto& r : w.classRegions) {
    nlohmann::json poly = nlohmann::json::array();
    for (const auto& c : r.polygon) poly.push_back(vec2(c));
    regions.push_back({{"class", w.classNames.at(r.classIndex)}, {"polygon", std::move(poly)}});
  }
  j["class_regions"] = std::move(regions);
  j["camera"] = intrinsicsToJson(w.camera);
  nlohmann::json traj = nlohmann::json::array();
  for (const auto& wp : w.trajectory) {
    traj.push_back({{"position", {wp.position.x(), wp.position.y(), wp.position.z()}}, {"yaw", wp.yaw},
                    {"pitch", wp.pitch}});
  }
  j["trajectory"] = std::move(traj);
  j["noise"] = {{"depth", {w.noise.depthA, w.noise.depthB, w.noise.depthC}},
                {"confusion", matrixJson(w.noise.confusion)},
                {"score_softness", w.noise.scoreSoftness},
                {"label_tile_px", w.noise.labelTilePx},
                {"rotation_cov", matrixJson(w.noise.rotationCov)}};
  j["max_range"] = w.maxRange;
  j["mesh"] = {{"side_length", w.meshSideLength}, {"half_extent", w.meshHalfExtent}};
  return j;
}

WorldSpec worldFromJson(const nlohmann::json& j)
{
  try {
    WorldSpec w;
    w.name = j.value("name", std::string("custom"));
    w.seed = j.value("seed", std::uint64_t{0});
    w.classNames = j.at("class_names").get<std::vector<std::string>>();
    const ClassCatalog catalog(w.classNames);
    auto classIndex = [&](const std::string& name) {
      const auto idx = catalog.indexOf(name);
      if (!idx) throw ConfigError("unknown class '" + name + "' in world spec");
      return *idx;
    };
    w.defaultClass = classIndex(j.at("default_class").get<std::string>());
    w.terrain.baseHeight = j.value("base_height", 0.0);
    for (const auto& p : j.value("height_patches", nlohmann::json::array())) {
      HeightPatch patch;
      patch.type = parsePatchType(p.at("type").get<std::string>());
      const auto r = p.at("region").get<std::vector<double>>();
      if (r.size() != 4) throw ConfigError("patch region needs [xmin, ymin, xmax, ymax]");
      patch.region = {r[0], r[1], r[2], r[3]};
      patch.height = p.value("height", 0.0);
      if (p.contains("gradient")) patch.gradient = vec2(p["gradient"]);
      if (p.contains("origin")) patch.origin = vec2(p["origin"]);
      patch.amplitude = p.value("amplitude", 0.0);
      patch.wavelength = p.value("wavelength", 1.0);
      if (p.contains("direction")) patch.direction = vec2(p["direction"]);
      w.terrain.patches.push_back(patch);
    }
    for (const auto& r : j.value("class_regions", nlohmann::json::array())) {
      ClassRegion region;
      region.classIndex = classIndex(r.at("class").get<std::string>());
      for (const auto& c : r.at("polygon")) region.polygon.push_back(vec2(c));
      w.classRegions.push_back(std::move(region));
    }
    w.camera = intrinsicsFromJson(j.at("camera"));
    for (const auto& t : j.at("trajectory")) {
      const auto p = t.at("position").get<std::vector<double>>();
      if (p.size() != 3) throw ConfigError("trajectory position needs 3 entries");
      w.trajectory.push_back({Eigen::Vector3d(p[0], p[1], p[2]), t.at("yaw").get<double>(), t.at("pitch").get<double>()});
    }
    const auto& n = j.at("noise");
    const auto depth = n.value("depth", std::vector<double>{0.0, 0.0, 0.0});
    if (depth.size() != 3) throw ConfigError("depth noise needs [a, b, c]");
    w.noise.depthA = depth[0];
    w.noise.depthB = depth[1];
    w.noise.depthC = depth[2];
    const auto k = static_cast<Eigen::Index>(w.classNames.size());
    if (n.contains("confusion")) {
      w.noise.confusion = matrixFromJson(n["confusion"]);
    } else {
      const double diag = n.value("confusion_diagonal", 1.0);
      const double off = k > 1 ? (1.0 - diag) / static_cast<double>(k - 1) : 0.0;
      w.noise.confusion = Eigen::MatrixXd::Constant(k, k, off);
      w.noise.confusion.diagonal().setConstant(k > 1 ? diag : 1.0);
    }
    w.noise.scoreSoftness = n.value("score_softness", 0.0);
    w.noise.labelTilePx = n.value("label_tile_px", 1);
    if (n.contains("rotation_cov")) w.noise.rotationCov = matrixFromJson(n["rotation_cov"]);
    w.maxRange = j.value("max_range", 30.0);
    if (j.contains("mesh")) {
      w.meshSideLength = j["mesh"].at("side_length").get<double>();
      w.meshHalfExtent = j["mesh"].at("half_extent").get<double>();
    }
    w.validate();
    return w;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("world spec: ") + e.what());
  }
}

WorldSpec loadWorld(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open world spec " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  if (j.contains("world")) return worldFromJson(j["world"]);
  return worldFromJson(j);
}

void writeSimulation(const WorldSpec& world, const std::filesystem::path& outDir)
{
  world.validate();
  std::error_code ec;
  std::filesystem::create_directories(outDir, ec);
  if (ec || !std::filesystem::is_directory(outDir)) throw ConfigError("cannot create output directory " + outDir.string());

  BundleManifest manifest;
  manifest.numClasses = static_cast<int>(world.numClasses());
  manifest.classNames = world.classNames;
  manifest.scenario = world.name;
  manifest.suggestedSideLength = world.meshSideLength;
  manifest.suggestedHalfExtent = world.meshHalfExtent;
  for (std::size_t i = 0; i < world.trajectory.size(); ++i) {
    RenderedFrame r = renderFrame(world, i);
    if (r.valid) {
      manifest.frames.push_back(writeFrame(outDir, r.frame));
    } else {
      FrameEntry e;
      e.frameId = r.frame.frameId;
      e.timestamp = r.frame.timestamp;
      e.valid = false;
      e.intrinsics = r.frame.intrinsics;
      e.pose = r.frame.pose;
      manifest.frames.push_back(std::move(e));
    }
  }
  writeManifest(outDir, manifest);

  std::ofstream truth(outDir / "truth.json", std::ios::binary);
  if (!truth) throw ConfigError("cannot write truth sidecar in " + outDir.string());
  truth << nlohmann::json{{"format", "semantic-mesh-truth"}, {"version", 1}, {"world", worldToJson(world)}}.dump(2)
        << '\n';
}

}  // namespace semantic_mesh::sim
