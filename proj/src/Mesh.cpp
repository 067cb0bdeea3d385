#include "semantic_mesh/Mesh.hpp"

#include "semantic_mesh/Errors.hpp"
#include "semantic_mesh/Geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace semantic_mesh {

namespace {

constexpr double kLatticeTolerance = 1e-9;

// Inside a cell by at least this fraction of a side on every edge (including
// the diagonal) a point belongs to exactly one face, so the neighbourhood scan
// can be skipped.
constexpr double kInteriorMargin = 1e-9;

int halfCellsOf(const MeshConfig& config)
{
  return static_cast<int>(std::llround(config.halfExtent / config.sideLength));
}

}  // namespace

void MeshConfig::validate() const
{
  std::ostringstream msg;
  if (!std::isfinite(sideLength) || sideLength <= 0.0) {
    msg << "mesh side length must be positive, got " << sideLength;
    throw ConfigError(msg.str());
  }
  if (!std::isfinite(halfExtent) || halfExtent <= 0.0) {
    msg << "mesh half extent must be positive, got " << halfExtent;
    throw ConfigError(msg.str());
  }
  const double ratio = halfExtent / sideLength;
  if (std::abs(ratio - std::round(ratio)) > kLatticeTolerance * std::max(1.0, ratio) || std::round(ratio) < 1.0) {
    msg << "mesh half extent " << halfExtent << " is not a whole multiple of side length " << sideLength;
    throw ConfigError(msg.str());
  }
  const double vertices = std::pow(2.0 * std::round(ratio) + 1.0, 2.0);
  if (vertices > static_cast<double>(std::numeric_limits<std::uint32_t>::max())) {
    throw ConfigError("mesh is too large");
  }
  if (numClasses < 1) {
    msg << "number of classes must be at least 1, got " << numClasses;
    throw ConfigError(msg.str());
  }
}

int MeshConfig::cellsPerAxis() const
{
  return 2 * halfCellsOf(*this);
}

Mesh::Mesh(const MeshConfig& config) : config_(config)
{
  config_.validate();
  halfCells_ = halfCellsOf(config_);
  cells_ = 2 * halfCells_;

  const std::size_t n = static_cast<std::size_t>(cells_);
  vertices_.resize((n + 1) * (n + 1));
  placeVertices();

  faces_.resize(2 * n * n);
  for (int j = 0; j < cells_; ++j) {
    for (int i = 0; i < cells_; ++i) {
      const auto v00 = static_cast<std::uint32_t>(vertexIndex(i, j));
      const auto v10 = static_cast<std::uint32_t>(vertexIndex(i + 1, j));
      const auto v11 = static_cast<std::uint32_t>(vertexIndex(i + 1, j + 1));
      const auto v01 = static_cast<std::uint32_t>(vertexIndex(i, j + 1));
      faces_[faceIndex(i, j, false)].vertexIds = {v00, v10, v11};
      faces_[faceIndex(i, j, true)].vertexIds = {v00, v11, v01};
    }
  }

  alpha_.assign(faces_.size() * classes(), 0.0);
  latest_.assign(faces_.size() * classes(), 0.0);
  faceObservations_.assign(faces_.size(), 0);

  // Vertex -> incident faces, compressed rows ordered by face index.
  incidentOffsets_.assign(vertices_.size() + 1, 0);
  for (const Face& face : faces_) {
    for (std::uint32_t v : face.vertexIds) ++incidentOffsets_[v + 1];
  }
  for (std::size_t v = 0; v < vertices_.size(); ++v) incidentOffsets_[v + 1] += incidentOffsets_[v];
  incidentFaces_.resize(incidentOffsets_.back());
  std::vector<std::size_t> cursor(incidentOffsets_.begin(), incidentOffsets_.end() - 1);
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    for (std::uint32_t v : faces_[f].vertexIds) incidentFaces_[cursor[v]++] = static_cast<std::uint32_t>(f);
  }
}

void Mesh::placeVertices()
{
  for (int j = 0; j <= cells_; ++j) {
    for (int i = 0; i <= cells_; ++i) {
      Vertex& v = vertices_[vertexIndex(i, j)];
      v.x = static_cast<double>(centerCell_[0] - halfCells_ + i) * config_.sideLength;
      v.y = static_cast<double>(centerCell_[1] - halfCells_ + j) * config_.sideLength;
    }
  }
}

Eigen::Vector2d Mesh::center() const
{
  return {static_cast<double>(centerCell_[0]) * config_.sideLength,
          static_cast<double>(centerCell_[1]) * config_.sideLength};
}

void Mesh::setCenterCell(std::array<std::int64_t, 2> cell)
{
  centerCell_ = cell;
  placeVertices();
}

std::array<Eigen::Vector2d, 3> Mesh::faceCorners(std::size_t f) const
{
  std::array<Eigen::Vector2d, 3> corners;
  for (int c = 0; c < 3; ++c) {
    const Vertex& v = vertices_[faces_[f].vertexIds[c]];
    corners[c] = {v.x, v.y};
  }
  return corners;
}

Eigen::Vector2d Mesh::faceCentroid(std::size_t f) const
{
  const auto corners = faceCorners(f);
  return (corners[0] + corners[1] + corners[2]) / 3.0;
}

bool Mesh::testFace(std::size_t f, const Eigen::Vector2d& xy) const
{
  const auto corners = faceCorners(f);
  return inSimplex(barycentric(xy, corners[0], corners[1], corners[2]));
}

std::optional<std::size_t> Mesh::lookupFace(const Eigen::Vector2d& xy) const
{
  if (!xy.allFinite()) return std::nullopt;
  const Vertex& origin = vertices_.front();
  const double u = (xy.x() - origin.x) / config_.sideLength;
  const double v = (xy.y() - origin.y) / config_.sideLength;
  if (u < -1.0 || v < -1.0 || u > cells_ + 1.0 || v > cells_ + 1.0) return std::nullopt;

  const double fi = std::floor(u);
  const double fj = std::floor(v);
  const int i = static_cast<int>(fi);
  const int j = static_cast<int>(fj);
  const double du = u - fi;
  const double dv = v - fj;

  if (i >= 0 && j >= 0 && i < cells_ && j < cells_ && du > kInteriorMargin && du < 1.0 - kInteriorMargin &&
      dv > kInteriorMargin && dv < 1.0 - kInteriorMargin && std::abs(du - dv) > kInteriorMargin) {
    const std::size_t f = faceIndex(i, j, dv > du);
    if (testFace(f, xy)) return f;
  }

  // Near an edge: test every face of the surrounding cells and keep the lowest
  // index that passes, mirroring the exhaustive scan's first-match rule.
  std::optional<std::size_t> best;
  for (int cj = std::max(j - 1, 0); cj <= std::min(j + 1, cells_ - 1); ++cj) {
    for (int ci = std::max(i - 1, 0); ci <= std::min(i + 1, cells_ - 1); ++ci) {
      for (bool upper : {false, true}) {
        const std::size_t f = faceIndex(ci, cj, upper);
        if (best && f >= *best) continue;
        if (testFace(f, xy)) best = f;
      }
    }
  }
  return best;
}

std::optional<std::size_t> Mesh::lookupFaceExhaustive(const Eigen::Vector2d& xy) const
{
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    if (testFace(f, xy)) return f;
  }
  return std::nullopt;
}

std::array<std::int64_t, 2> Mesh::recenter(const Eigen::Vector2d& newCenter)
{
  const Eigen::Vector2d offset = (newCenter - center()) / config_.sideLength;
  std::array<std::int64_t, 2> shift{0, 0};
  for (int axis = 0; axis < 2; ++axis) {
    const double q = offset[axis];
    if (!std::isfinite(q)) return {0, 0};
    const double nearest = std::round(q);
    shift[axis] = static_cast<std::int64_t>(std::abs(q - nearest) < kLatticeTolerance ? nearest : std::trunc(q));
  }
  if (shift[0] == 0 && shift[1] == 0) return shift;

  const std::size_t k = classes();
  const std::int64_t n = cells_;
  const std::vector<Vertex> oldVertices = vertices_;
  const std::vector<double> oldAlpha = alpha_;
  const std::vector<double> oldLatest = latest_;
  const std::vector<std::uint32_t> oldObservations = faceObservations_;

  centerCell_[0] += shift[0];
  centerCell_[1] += shift[1];
  placeVertices();

  for (std::int64_t j = 0; j <= n; ++j) {
    for (std::int64_t i = 0; i <= n; ++i) {
      Vertex& v = vertices_[vertexIndex(static_cast<int>(i), static_cast<int>(j))];
      const std::int64_t si = i + shift[0];
      const std::int64_t sj = j + shift[1];
      if (si >= 0 && sj >= 0 && si <= n && sj <= n) {
        const Vertex& old = oldVertices[vertexIndex(static_cast<int>(si), static_cast<int>(sj))];
        v.zMean = old.zMean;
        v.zVar = old.zVar;
        v.observations = old.observations;
      } else {
        v.zMean = 0.0;
        v.zVar = 0.0;
        v.observations = 0;
      }
    }
  }

  for (std::int64_t j = 0; j < n; ++j) {
    for (std::int64_t i = 0; i < n; ++i) {
      const std::int64_t si = i + shift[0];
      const std::int64_t sj = j + shift[1];
      const bool survives = si >= 0 && sj >= 0 && si < n && sj < n;
      for (bool upper : {false, true}) {
        const std::size_t f = faceIndex(static_cast<int>(i), static_cast<int>(j), upper);
        if (survives) {
          const std::size_t src = faceIndex(static_cast<int>(si), static_cast<int>(sj), upper);
          std::copy_n(oldAlpha.begin() + src * k, k, alpha_.begin() + f * k);
          std::copy_n(oldLatest.begin() + src * k, k, latest_.begin() + f * k);
          faceObservations_[f] = oldObservations[src];
        } else {
          std::fill_n(alpha_.begin() + f * k, k, 0.0);
          std::fill_n(latest_.begin() + f * k, k, 0.0);
          faceObservations_[f] = 0;
        }
      }
    }
  }
  return shift;
}

void Mesh::clearInteriorPoints()
{
  for (Face& face : faces_) face.interiorPoints.clear();
}

bool Mesh::interiorPointsEmpty() const
{
  return std::all_of(faces_.begin(), faces_.end(), [](const Face& f) { return f.interiorPoints.empty(); });
}

bool Mesh::sameState(const Mesh& other) const
{
  if (!(config_ == other.config_) || centerCell_ != other.centerCell_ || frameCount_ != other.frameCount_) return false;
  if (vertices_ != other.vertices_ || alpha_ != other.alpha_ || latest_ != other.latest_ ||
      faceObservations_ != other.faceObservations_) {
    return false;
  }
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    if (faces_[f].vertexIds != other.faces_[f].vertexIds) return false;
  }
  return true;
}

}  // namespace semantic_mesh
