#include "semantic_mesh/Benchmark.hpp"

#include "semantic_mesh/Errors.hpp"
#include "semantic_mesh/Evaluation.hpp"
#include "semantic_mesh/Pipeline.hpp"
#include "semantic_mesh/Simulator.hpp"

#include <cmath>
#include <numbers>

namespace semantic_mesh {

namespace {

constexpr int kBenchClasses = 10;

struct Accumulator
{
  double sum = 0.0;
  double sumSq = 0.0;
  int n = 0;

  void add(double seconds)
  {
    const double ms = seconds * 1e3;
    sum += ms;
    sumSq += ms * ms;
    ++n;
  }

  StageStats stats() const
  {
    if (n == 0) return {};
    const double mean = sum / n;
    const double var = n > 1 ? std::max(0.0, (sumSq - n * mean * mean) / (n - 1)) : 0.0;
    return {mean, std::sqrt(var)};
  }
};

// Nadir view from 1 m over flat ground; the footprint fits inside a 1 m square.
sim::WorldSpec benchWorld(const BenchConfig& config)
{
  sim::WorldSpec w;
  w.name = "bench";
  for (int c = 0; c < kBenchClasses; ++c) w.classNames.push_back("class" + std::to_string(c));
  w.classRegions.push_back({1, {{-1.0, -1.0}, {0.0, -1.0}, {0.0, 1.0}, {-1.0, 1.0}}});
  w.camera.width = config.frameWidth;
  w.camera.height = config.frameHeight;
  w.camera.fx = w.camera.fy = 470.0 * config.frameWidth / 424.0;
  w.camera.cx = 0.5 * (config.frameWidth - 1);
  w.camera.cy = 0.5 * (config.frameHeight - 1);
  w.trajectory.push_back({Eigen::Vector3d(0.0, 0.0, 1.0), std::numbers::pi / 2, std::numbers::pi / 2});
  w.noise.depthA = 0.001;
  w.noise.depthC = 0.0019;
  w.noise.confusion = Eigen::MatrixXd::Constant(kBenchClasses, kBenchClasses, 0.2 / (kBenchClasses - 1));
  w.noise.confusion.diagonal().setConstant(0.8);
  w.noise.scoreSoftness = 0.3;
  w.noise.labelTilePx = 8;
  w.seed = config.seed;
  return w;
}

}  // namespace

std::vector<BenchRow> benchUpdate(const BenchConfig& config)
{
  if (config.sideLengths.empty()) throw ConfigError("bench needs at least one side length");
  if (config.trials < 1) throw ConfigError("bench needs at least one trial");
  if (config.frameWidth < 1 || config.frameHeight < 1) throw ConfigError("bench frame size must be positive");

  const sim::WorldSpec world = benchWorld(config);
  const sim::RenderedFrame rendered = sim::renderFrame(world, 0);

  std::vector<SemanticMapper> mappers;
  std::vector<BenchRow> rows;
  for (double side : config.sideLengths) {
    if (!(side > 0.0)) throw ConfigError("bench side lengths must be positive");
    PipelineConfig pc;
    pc.mesh.sideLength = side;
    pc.mesh.halfExtent = std::ceil(config.halfExtent / side - 1e-9) * side;
    pc.mesh.numClasses = kBenchClasses;
    mappers.emplace_back(pc);
    BenchRow row;
    row.sideLength = side;
    row.halfExtent = pc.mesh.halfExtent;
    row.faces = mappers.back().mesh().numFaces();
    row.trials = config.trials;
    rows.push_back(row);
  }

  for (int w = 0; w < config.warmup; ++w) {
    for (auto& m : mappers) m.processFrame(rendered.frame);
  }

  std::vector<std::array<Accumulator, 6>> acc(rows.size());
  for (int t = 0; t < config.trials; ++t) {
    for (std::size_t i = 0; i < mappers.size(); ++i) {
      const FrameTiming timing = mappers[i].processFrame(rendered.frame);
      if (timing.skipped) throw InputError("bench frame rejected: " + timing.skipReason);
      rows[i].points = timing.assignedPoints;
      acc[i][0].add(timing.projection);
      acc[i][1].add(timing.assignment);
      acc[i][2].add(timing.elevation);
      acc[i][3].add(timing.semantics);
      acc[i][4].add(timing.update());
      acc[i][5].add(timing.total);
      if (timing.total > 0.0) {
        rows[i].partsSumError = std::max(rows[i].partsSumError, std::abs(timing.partsSum() - timing.total) / timing.total);
      }
    }
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].projection = acc[i][0].stats();
    rows[i].assignment = acc[i][1].stats();
    rows[i].elevation = acc[i][2].stats();
    rows[i].semantics = acc[i][3].stats();
    rows[i].update = acc[i][4].stats();
    rows[i].total = acc[i][5].stats();
  }
  return rows;
}

void writeBenchCsv(std::ostream& out, const std::vector<BenchRow>& rows)
{
  out << "side_length_m,half_extent_m,faces,points,trials,"
         "projection_ms_mean,projection_ms_std,assignment_ms_mean,assignment_ms_std,"
         "elevation_ms_mean,elevation_ms_std,semantics_ms_mean,semantics_ms_std,"
         "update_ms_mean,update_ms_std,total_ms_mean,total_ms_std,parts_sum_rel_error\n";
  for (const auto& r : rows) {
    out << formatNumber(r.sideLength) << ',' << formatNumber(r.halfExtent) << ',' << r.faces << ',' << r.points << ','
        << r.trials;
    for (const StageStats* s : {&r.projection, &r.assignment, &r.elevation, &r.semantics, &r.update, &r.total}) {
      out << ',' << formatNumber(s->mean) << ',' << formatNumber(s->stddev);
    }
    out << ',' << formatNumber(r.partsSumError) << '\n';
  }
}

}  // namespace semantic_mesh
