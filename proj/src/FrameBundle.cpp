#include "semantic_mesh/FrameBundle.hpp"

#include "semantic_mesh/Errors.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace semantic_mesh {

namespace {

constexpr char kArrayMagic[8] = {'S', 'M', 'A', 'R', 'R', 'A', 'Y', '1'};
constexpr std::uint32_t kArrayVersion = 1;

template <typename T>
void writePod(std::ostream& out, const T& value)
{
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T readPod(std::istream& in)
{
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  return value;
}

std::string frameFileName(std::uint64_t id, const char* kind)
{
  std::ostringstream name;
  name << "frame_" << std::setw(6) << std::setfill('0') << id << '_' << kind << ".bin";
  return name.str();
}

nlohmann::json matrixToJson(const Eigen::Matrix3d& m)
{
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < 3; ++r) rows.push_back({m(r, 0), m(r, 1), m(r, 2)});
  return rows;
}

Eigen::Matrix3d matrixFromJson(const nlohmann::json& j)
{
  Eigen::Matrix3d m;
  if (!j.is_array() || j.size() != 3) throw FormatError("expected a 3x3 matrix");
  for (int r = 0; r < 3; ++r) {
    if (!j[r].is_array() || j[r].size() != 3) throw FormatError("expected a 3x3 matrix");
    for (int c = 0; c < 3; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

}  // namespace

void FrameBundle::validate() const
{
  intrinsics.validate();
  pose.validate();
  if (numClasses < 1) throw InputError("frame has no classes");
  const std::size_t pixels = static_cast<std::size_t>(intrinsics.width) * intrinsics.height;
  const std::size_t k = static_cast<std::size_t>(numClasses);
  if (depth.size() != pixels) throw InputError("depth image size does not match intrinsics");
  if (scores.size() != pixels * k) throw InputError("score tensor size does not match intrinsics and class count");
  for (std::size_t p = 0; p < pixels; ++p) {
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const float s = scores[p * k + j];
      if (!std::isfinite(s) || s < 0.0f) {
        throw InputError("pixel " + std::to_string(p) + " has a negative or non-finite class score");
      }
      sum += s;
    }
    if (std::abs(sum - 1.0) > kScoreSumTolerance) {
      std::ostringstream msg;
      msg << "pixel " << p << " class scores sum to " << sum;
      throw InputError(msg.str());
    }
  }
}

nlohmann::json poseToJson(const Pose& pose)
{
  return {{"rotation", matrixToJson(pose.rotation)},
          {"translation", {pose.translation.x(), pose.translation.y(), pose.translation.z()}},
          {"rotation_cov", matrixToJson(pose.rotationCov)}};
}

Pose poseFromJson(const nlohmann::json& j)
{
  Pose pose;
  pose.rotation = matrixFromJson(j.at("rotation"));
  const auto& t = j.at("translation");
  if (!t.is_array() || t.size() != 3) throw FormatError("pose translation must have 3 entries");
  pose.translation = {t[0].get<double>(), t[1].get<double>(), t[2].get<double>()};
  pose.rotationCov = matrixFromJson(j.at("rotation_cov"));
  return pose;
}

nlohmann::json intrinsicsToJson(const CameraIntrinsics& in)
{
  return {{"fx", in.fx}, {"fy", in.fy}, {"cx", in.cx}, {"cy", in.cy}, {"width", in.width}, {"height", in.height}};
}

CameraIntrinsics intrinsicsFromJson(const nlohmann::json& j)
{
  CameraIntrinsics in;
  in.fx = j.at("fx").get<double>();
  in.fy = j.at("fy").get<double>();
  in.cx = j.at("cx").get<double>();
  in.cy = j.at("cy").get<double>();
  in.width = j.at("width").get<int>();
  in.height = j.at("height").get<int>();
  return in;
}

void writeArray(const std::filesystem::path& path, std::span<const float> data, int width, int height, int channels)
{
  const std::size_t expected = static_cast<std::size_t>(width) * height * channels;
  if (data.size() != expected) throw InputError("array size does not match its declared shape");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write(kArrayMagic, sizeof(kArrayMagic));
  writePod(out, kArrayVersion);
  writePod(out, static_cast<std::uint32_t>(width));
  writePod(out, static_cast<std::uint32_t>(height));
  writePod(out, static_cast<std::uint32_t>(channels));
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(float)));
  if (!out) throw FormatError("failed writing " + path.string());
}

std::vector<float> readArray(const std::filesystem::path& path, int width, int height, int channels)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kArrayMagic, sizeof(magic)) != 0) throw FormatError(path.string() + ": bad magic");
  const auto version = readPod<std::uint32_t>(in);
  const auto w = readPod<std::uint32_t>(in);
  const auto h = readPod<std::uint32_t>(in);
  const auto c = readPod<std::uint32_t>(in);
  if (!in || version != kArrayVersion) throw FormatError(path.string() + ": unsupported array version");
  if (w != static_cast<std::uint32_t>(width) || h != static_cast<std::uint32_t>(height) ||
      c != static_cast<std::uint32_t>(channels)) {
    std::ostringstream msg;
    msg << path.string() << ": shape " << w << "x" << h << "x" << c << " does not match expected " << width << "x"
        << height << "x" << channels;
    throw FormatError(msg.str());
  }
  std::vector<float> data(static_cast<std::size_t>(w) * h * c);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(float)));
  if (!in) throw FormatError(path.string() + ": truncated data");
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError(path.string() + ": trailing bytes");
  return data;
}

BundleManifest readManifest(const std::filesystem::path& dir)
{
  const auto path = dir / "manifest.json";
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != kBundleFormat) throw FormatError(path.string() + ": not a frame bundle");
    if (j.at("version").get<int>() != kBundleVersion) throw FormatError(path.string() + ": unsupported version");
    BundleManifest m;
    m.numClasses = j.at("num_classes").get<int>();
    m.classNames = j.at("class_names").get<std::vector<std::string>>();
    if (m.numClasses < 1 || m.classNames.size() != static_cast<std::size_t>(m.numClasses)) {
      throw FormatError(path.string() + ": class_names does not match num_classes");
    }
    m.scenario = j.value("scenario", std::string());
    if (j.contains("mesh")) {
      m.suggestedSideLength = j["mesh"].at("side_length").get<double>();
      m.suggestedHalfExtent = j["mesh"].at("half_extent").get<double>();
    }
    for (const auto& f : j.at("frames")) {
      FrameEntry e;
      e.frameId = f.at("frame_id").get<std::uint64_t>();
      e.timestamp = f.at("timestamp").get<double>();
      e.valid = f.value("valid", true);
      e.intrinsics = intrinsicsFromJson(f.at("intrinsics"));
      e.pose = poseFromJson(f.at("pose"));
      if (e.valid) {
        e.depthFile = f.at("depth_file").get<std::string>();
        e.scoresFile = f.at("scores_file").get<std::string>();
      }
      m.frames.push_back(std::move(e));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void writeManifest(const std::filesystem::path& dir, const BundleManifest& m)
{
  nlohmann::json j;
  j["format"] = kBundleFormat;
  j["version"] = kBundleVersion;
  j["num_classes"] = m.numClasses;
  j["class_names"] = m.classNames;
  j["scenario"] = m.scenario;
  if (m.suggestedSideLength && m.suggestedHalfExtent) {
    j["mesh"] = {{"side_length", *m.suggestedSideLength}, {"half_extent", *m.suggestedHalfExtent}};
  }
  nlohmann::json frames = nlohmann::json::array();
  for (const auto& e : m.frames) {
    nlohmann::json f = {{"frame_id", e.frameId},
                        {"timestamp", e.timestamp},
                        {"valid", e.valid},
                        {"intrinsics", intrinsicsToJson(e.intrinsics)},
                        {"pose", poseToJson(e.pose)}};
    if (e.valid) {
      f["depth_file"] = e.depthFile;
      f["scores_file"] = e.scoresFile;
    }
    frames.push_back(std::move(f));
  }
  j["frames"] = std::move(frames);
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) throw FormatError("cannot write manifest in " + dir.string());
  out << j.dump(2) << '\n';
}

FrameBundle loadFrame(const std::filesystem::path& dir, const BundleManifest& manifest, const FrameEntry& entry)
{
  if (!entry.valid) throw FormatError("frame " + std::to_string(entry.frameId) + " is flagged invalid");
  FrameBundle frame;
  frame.frameId = entry.frameId;
  frame.timestamp = entry.timestamp;
  frame.intrinsics = entry.intrinsics;
  frame.pose = entry.pose;
  frame.numClasses = manifest.numClasses;
  frame.depth = readArray(dir / entry.depthFile, entry.intrinsics.width, entry.intrinsics.height, 1);
  frame.scores = readArray(dir / entry.scoresFile, entry.intrinsics.width, entry.intrinsics.height, manifest.numClasses);
  return frame;
}

FrameEntry writeFrame(const std::filesystem::path& dir, const FrameBundle& frame)
{
  FrameEntry e;
  e.frameId = frame.frameId;
  e.timestamp = frame.timestamp;
  e.intrinsics = frame.intrinsics;
  e.pose = frame.pose;
  e.depthFile = frameFileName(frame.frameId, "depth");
  e.scoresFile = frameFileName(frame.frameId, "scores");
  writeArray(dir / e.depthFile, frame.depth, frame.intrinsics.width, frame.intrinsics.height, 1);
  writeArray(dir / e.scoresFile, frame.scores, frame.intrinsics.width, frame.intrinsics.height, frame.numClasses);
  return e;
}

BundleCheck checkBundle(const std::filesystem::path& dir)
{
  BundleCheck check;
  BundleManifest manifest;
  try {
    manifest = readManifest(dir);
  } catch (const Error& e) {
    check.ok = false;
    check.message = e.what();
    return check;
  }
  std::optional<std::uint64_t> previous;
  for (const auto& entry : manifest.frames) {
    ++check.framesChecked;
    try {
      if (previous && entry.frameId <= *previous) throw FormatError("frame ids are not strictly increasing");
      previous = entry.frameId;
      if (!entry.valid) {
        ++check.framesInvalid;
        continue;
      }
      loadFrame(dir, manifest, entry).validate();
    } catch (const Error& e) {
      check.ok = false;
      check.firstFailingFrame = entry.frameId;
      check.message = "frame " + std::to_string(entry.frameId) + ": " + e.what();
      return check;
    }
  }
  return check;
}

}  // namespace semantic_mesh
