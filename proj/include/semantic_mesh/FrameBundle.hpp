#pragma once

#include "semantic_mesh/Geometry.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace semantic_mesh {

/*!
 * One observation: metric depth (row-major height x width), per-pixel class
 * scores (row-major height x width x k), camera pose with its rotation
 * covariance, and intrinsics.
 */
struct FrameBundle
{
  std::uint64_t frameId = 0;
  double timestamp = 0.0;
  CameraIntrinsics intrinsics;
  Pose pose;
  int numClasses = 1;
  std::vector<float> depth;
  std::vector<float> scores;

  //! Tolerance on per-pixel |sum(scores) - 1| for float32 score tensors.
  static constexpr double kScoreSumTolerance = 1e-4;

  //! Throws InputError naming the first inconsistency.
  void validate() const;
};

/*
 * Frame-bundle directory layout (version 1):
 *
 *   manifest.json             frame order, file names, poses, intrinsics
 *   frame_<id>_depth.bin      binary array, channels = 1
 *   frame_<id>_scores.bin     binary array, channels = k
 *
 * Binary array layout, little-endian:
 *   char[8]  magic "SMARRAY1"
 *   uint32   version (1)
 *   uint32   width, height, channels
 *   float32  data[height][width][channels]
 */
inline constexpr const char* kBundleFormat = "semantic-mesh-frame-bundle";
inline constexpr int kBundleVersion = 1;

struct FrameEntry
{
  std::uint64_t frameId = 0;
  double timestamp = 0.0;
  bool valid = true;
  std::string depthFile;
  std::string scoresFile;
  CameraIntrinsics intrinsics;
  Pose pose;
};

struct BundleManifest
{
  int numClasses = 1;
  std::vector<std::string> classNames;
  std::string scenario;
  std::optional<double> suggestedSideLength;
  std::optional<double> suggestedHalfExtent;
  std::vector<FrameEntry> frames;
};

nlohmann::json poseToJson(const Pose& pose);
Pose poseFromJson(const nlohmann::json& j);
nlohmann::json intrinsicsToJson(const CameraIntrinsics& intrinsics);
CameraIntrinsics intrinsicsFromJson(const nlohmann::json& j);

void writeArray(const std::filesystem::path& path, std::span<const float> data, int width, int height, int channels);
std::vector<float> readArray(const std::filesystem::path& path, int width, int height, int channels);

BundleManifest readManifest(const std::filesystem::path& dir);
void writeManifest(const std::filesystem::path& dir, const BundleManifest& manifest);

//! Loads the arrays of one manifest entry. Throws FormatError on missing or malformed files.
FrameBundle loadFrame(const std::filesystem::path& dir, const BundleManifest& manifest, const FrameEntry& entry);

//! Writes a frame's arrays and returns its manifest entry.
FrameEntry writeFrame(const std::filesystem::path& dir, const FrameBundle& frame);

struct BundleCheck
{
  bool ok = true;
  std::size_t framesChecked = 0;
  std::size_t framesInvalid = 0;  // flagged invalid by the producer
  std::optional<std::uint64_t> firstFailingFrame;
  std::string message;
};

//! Checks the manifest and every frame's arrays and contents.
BundleCheck checkBundle(const std::filesystem::path& dir);

}  // namespace semantic_mesh
