#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace semantic_mesh {

struct MeshConfig
{
  double sideLength = 0.02;  // meters per triangle leg
  double halfExtent = 5.0;   // meters from the mesh center to its edge
  int numClasses = 10;

  //! Throws ConfigError when the side is not positive or the extent is not a whole number of cells.
  void validate() const;
  //! Number of grid cells along one axis.
  int cellsPerAxis() const;

  bool operator==(const MeshConfig&) const = default;
};

struct Vertex
{
  double x = 0.0;
  double y = 0.0;
  double zMean = 0.0;
  double zVar = 0.0;
  //! Number of fused height observations; zero marks an uninformed vertex.
  std::uint32_t observations = 0;

  bool operator==(const Vertex&) const = default;
};

struct Face
{
  std::array<std::uint32_t, 3> vertexIds{};  // counterclockwise in the ground plane
  //! Indices into the point cloud of the frame being processed. Empty between frames.
  std::vector<std::uint32_t> interiorPoints;
};

/*!
 * Robot-centric regular triangular mesh.
 *
 * The mesh covers a square of (2 * halfExtent)^2 around a center that always
 * lies on the global lattice (integer multiples of the side length). Each grid
 * cell (i, j) is split along its (i, j)-(i+1, j+1) diagonal into a lower face
 * (index 2 * (j * n + i)) and an upper face (index 2 * (j * n + i) + 1).
 *
 * Per-face state besides the geometry: the Dirichlet parameters alpha, the mean
 * class scores of the most recent frame that observed the face (used by the
 * non-recursive estimators) and the number of frames that observed it.
 */
class Mesh
{
 public:
  explicit Mesh(const MeshConfig& config);

  const MeshConfig& config() const { return config_; }
  int numClasses() const { return config_.numClasses; }
  int cellsPerAxis() const { return cells_; }
  std::size_t numVertices() const { return vertices_.size(); }
  std::size_t numFaces() const { return faces_.size(); }

  std::span<const Vertex> vertices() const { return vertices_; }
  std::span<Vertex> vertices() { return vertices_; }
  const Vertex& vertex(std::size_t i) const { return vertices_[i]; }
  Vertex& vertex(std::size_t i) { return vertices_[i]; }

  std::span<const Face> faces() const { return faces_; }
  const Face& face(std::size_t f) const { return faces_[f]; }
  Face& face(std::size_t f) { return faces_[f]; }

  std::span<const double> alpha(std::size_t f) const { return {alpha_.data() + f * classes(), classes()}; }
  std::span<double> alpha(std::size_t f) { return {alpha_.data() + f * classes(), classes()}; }
  std::span<const double> latestScores(std::size_t f) const { return {latest_.data() + f * classes(), classes()}; }
  std::span<double> latestScores(std::size_t f) { return {latest_.data() + f * classes(), classes()}; }
  std::uint32_t faceObservations(std::size_t f) const { return faceObservations_[f]; }
  void setFaceObservations(std::size_t f, std::uint32_t n) { faceObservations_[f] = n; }

  //! Faces that contain the vertex, in increasing face index.
  std::span<const std::uint32_t> incidentFaces(std::size_t v) const
  {
    return {incidentFaces_.data() + incidentOffsets_[v], incidentOffsets_[v + 1] - incidentOffsets_[v]};
  }

  std::size_t vertexIndex(int i, int j) const { return static_cast<std::size_t>(j) * (cells_ + 1) + i; }
  std::size_t faceIndex(int i, int j, bool upper) const
  {
    return 2 * (static_cast<std::size_t>(j) * cells_ + i) + (upper ? 1 : 0);
  }

  //! Center cell on the global lattice.
  std::array<std::int64_t, 2> centerCell() const { return centerCell_; }
  Eigen::Vector2d center() const;
  void setCenterCell(std::array<std::int64_t, 2> cell);

  Eigen::Vector2d faceCentroid(std::size_t f) const;
  std::array<Eigen::Vector2d, 3> faceCorners(std::size_t f) const;

  /*!
   * Face whose closed ground-plane triangle contains xy. When xy lies on a
   * shared edge or vertex the lowest face index wins, which is what the
   * exhaustive scan returns.
   */
  std::optional<std::size_t> lookupFace(const Eigen::Vector2d& xy) const;
  //! Reference implementation: barycentric test against every face in index order.
  std::optional<std::size_t> lookupFaceExhaustive(const Eigen::Vector2d& xy) const;

  /*!
   * Moves the mesh toward newCenter by whole cells (truncated toward zero).
   * State of cells that stay inside the window is kept; new border cells start
   * fresh. Returns the applied shift in cells.
   */
  std::array<std::int64_t, 2> recenter(const Eigen::Vector2d& newCenter);

  void clearInteriorPoints();
  bool interiorPointsEmpty() const;

  std::uint64_t frameCount() const { return frameCount_; }
  void setFrameCount(std::uint64_t n) { frameCount_ = n; }

  //! Compares all persistent state (geometry, heights, alpha, latest scores, counters).
  bool sameState(const Mesh& other) const;

 private:
  std::size_t classes() const { return static_cast<std::size_t>(config_.numClasses); }
  void placeVertices();
  bool testFace(std::size_t f, const Eigen::Vector2d& xy) const;

  MeshConfig config_;
  int cells_ = 0;
  int halfCells_ = 0;
  std::array<std::int64_t, 2> centerCell_{0, 0};
  std::uint64_t frameCount_ = 0;

  std::vector<Vertex> vertices_;
  std::vector<Face> faces_;
  std::vector<double> alpha_;
  std::vector<double> latest_;
  std::vector<std::uint32_t> faceObservations_;
  std::vector<std::uint32_t> incidentFaces_;
  std::vector<std::size_t> incidentOffsets_;
};

}  // namespace semantic_mesh
