#pragma once

#include "semantic_mesh/Mesh.hpp"
#include "semantic_mesh/Pipeline.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace semantic_mesh {

/*
 * Map export, version 1: a binary body plus a JSON sidecar header.
 *
 * <stem>.bin (little-endian):
 *   char[8]  magic "SMMESH01"
 *   uint32   version (1)
 *   uint32   num_classes k
 *   uint32   cells per axis n
 *   uint32   reserved (0)
 *   float64  side_length, half_extent
 *   int64    center_cell_x, center_cell_y
 *   uint64   frame_count, num_vertices, num_faces
 *   per vertex: float64 x, y, z_mean, z_var; uint32 observations
 *   per face:   uint32 v0, v1, v2, observations; float64 alpha[k]; float64 latest_scores[k]
 *
 * <stem>.json: format/version, mesh config, center cell, frame counters,
 * class names, estimator, update mode, scenario name and the body file name.
 */
inline constexpr int kMapExportVersion = 1;

struct MapMetadata
{
  std::vector<std::string> classNames;
  EstimatorKind estimator = EstimatorKind::Recursive;
  UpdateMode updateMode = UpdateMode::Soft;
  std::string scenario;
  std::uint64_t framesProcessed = 0;
  std::uint64_t framesSkipped = 0;
};

struct MapData
{
  Mesh mesh;
  MapMetadata meta;
};

//! Writes <stem>.bin and <stem>.json. Returns the two paths.
std::pair<std::filesystem::path, std::filesystem::path> writeMap(const std::filesystem::path& stem, const Mesh& mesh,
                                                                 const MapMetadata& meta);

//! Reads a map from its JSON header path (or the stem). Throws FormatError on any mismatch.
MapData readMap(const std::filesystem::path& headerOrStem);

}  // namespace semantic_mesh
