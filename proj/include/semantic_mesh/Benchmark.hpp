#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace semantic_mesh {

struct BenchConfig
{
  std::vector<double> sideLengths{0.01, 0.02, 0.04, 0.08};
  double halfExtent = 0.5;  // rounded up to whole cells per side length
  int frameWidth = 424;
  int frameHeight = 240;
  int trials = 100;
  int warmup = 3;
  std::uint64_t seed = 0;
};

struct StageStats
{
  double mean = 0.0;
  double stddev = 0.0;
};

struct BenchRow
{
  double sideLength = 0.0;
  double halfExtent = 0.0;
  std::size_t faces = 0;
  std::size_t points = 0;  // points assigned to the mesh per frame
  int trials = 0;
  StageStats projection, assignment, elevation, semantics, update, total;
  //! Worst |sum of stage times - total| / total over the trials.
  double partsSumError = 0.0;
};

/*!
 * Times the non-segmentation part of the per-frame update on one synthetic
 * frame of a flat, noisy world seen from above. `update` is the time of the
 * point assignment, elevation and class updates; `total` includes projection.
 * Trials of the configurations are interleaved so slow drifts of the machine
 * hit all of them alike.
 */
std::vector<BenchRow> benchUpdate(const BenchConfig& config);

//! Plot-ready CSV, times in milliseconds.
void writeBenchCsv(std::ostream& out, const std::vector<BenchRow>& rows);

}  // namespace semantic_mesh
