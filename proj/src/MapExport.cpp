#include "semantic_mesh/MapExport.hpp"

#include "semantic_mesh/Errors.hpp"

#include <nlohmann/json.hpp>

#include <cstring>
#include <fstream>

namespace semantic_mesh {

namespace {

constexpr char kMapMagic[8] = {'S', 'M', 'M', 'E', 'S', 'H', '0', '1'};
constexpr const char* kMapFormat = "semantic-mesh-map";

template <typename T>
void put(std::ostream& out, const T& value)
{
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in)
{
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw FormatError("map body is truncated");
  return value;
}

std::filesystem::path withExtension(std::filesystem::path p, const char* ext)
{
  if (p.extension() == ".json" || p.extension() == ".bin") p.replace_extension();
  p += ext;
  return p;
}

}  // namespace

std::pair<std::filesystem::path, std::filesystem::path> writeMap(const std::filesystem::path& stem, const Mesh& mesh,
                                                                 const MapMetadata& meta)
{
  const auto bodyPath = withExtension(stem, ".bin");
  const auto headerPath = withExtension(stem, ".json");
  const MeshConfig& cfg = mesh.config();
  const std::size_t k = static_cast<std::size_t>(cfg.numClasses);
  if (!meta.classNames.empty() && meta.classNames.size() != k) {
    throw ConfigError("class name list does not match the mesh's class count");
  }

  std::ofstream body(bodyPath, std::ios::binary);
  if (!body) throw FormatError("cannot write " + bodyPath.string());
  body.write(kMapMagic, sizeof(kMapMagic));
  put<std::uint32_t>(body, kMapExportVersion);
  put<std::uint32_t>(body, static_cast<std::uint32_t>(k));
  put<std::uint32_t>(body, static_cast<std::uint32_t>(mesh.cellsPerAxis()));
  put<std::uint32_t>(body, 0);
  put<double>(body, cfg.sideLength);
  put<double>(body, cfg.halfExtent);
  put<std::int64_t>(body, mesh.centerCell()[0]);
  put<std::int64_t>(body, mesh.centerCell()[1]);
  put<std::uint64_t>(body, mesh.frameCount());
  put<std::uint64_t>(body, mesh.numVertices());
  put<std::uint64_t>(body, mesh.numFaces());
  for (const Vertex& v : mesh.vertices()) {
    put(body, v.x);
    put(body, v.y);
    put(body, v.zMean);
    put(body, v.zVar);
    put(body, v.observations);
  }
  for (std::size_t f = 0; f < mesh.numFaces(); ++f) {
    for (std::uint32_t id : mesh.face(f).vertexIds) put(body, id);
    put(body, mesh.faceObservations(f));
    for (double a : mesh.alpha(f)) put(body, a);
    for (double s : mesh.latestScores(f)) put(body, s);
  }
  if (!body) throw FormatError("failed writing " + bodyPath.string());

  nlohmann::json header;
  header["format"] = kMapFormat;
  header["version"] = kMapExportVersion;
  header["body"] = bodyPath.filename().string();
  header["mesh"] = {{"side_length", cfg.sideLength},
                    {"half_extent", cfg.halfExtent},
                    {"num_classes", cfg.numClasses},
                    {"cells_per_axis", mesh.cellsPerAxis()},
                    {"center_cell", {mesh.centerCell()[0], mesh.centerCell()[1]}},
                    {"num_vertices", mesh.numVertices()},
                    {"num_faces", mesh.numFaces()}};
  header["frame_count"] = mesh.frameCount();
  header["frames_processed"] = meta.framesProcessed;
  header["frames_skipped"] = meta.framesSkipped;
  header["class_names"] = meta.classNames;
  header["estimator"] = toString(meta.estimator);
  header["update_mode"] = toString(meta.updateMode);
  header["scenario"] = meta.scenario;
  std::ofstream out(headerPath, std::ios::binary);
  if (!out) throw FormatError("cannot write " + headerPath.string());
  out << header.dump(2) << '\n';
  return {bodyPath, headerPath};
}

MapData readMap(const std::filesystem::path& headerOrStem)
{
  const auto headerPath = withExtension(headerOrStem, ".json");
  std::ifstream in(headerPath);
  if (!in) throw FormatError("cannot open " + headerPath.string());
  nlohmann::json header;
  MeshConfig cfg;
  MapMetadata meta;
  std::filesystem::path bodyPath;
  try {
    in >> header;
    if (header.at("format").get<std::string>() != kMapFormat) throw FormatError(headerPath.string() + ": not a map");
    if (header.at("version").get<int>() != kMapExportVersion) {
      throw FormatError(headerPath.string() + ": unsupported map version");
    }
    const auto& m = header.at("mesh");
    cfg.sideLength = m.at("side_length").get<double>();
    cfg.halfExtent = m.at("half_extent").get<double>();
    cfg.numClasses = m.at("num_classes").get<int>();
    meta.classNames = header.at("class_names").get<std::vector<std::string>>();
    meta.estimator = parseEstimatorKind(header.at("estimator").get<std::string>());
    meta.updateMode = parseUpdateMode(header.at("update_mode").get<std::string>());
    meta.scenario = header.value("scenario", std::string());
    meta.framesProcessed = header.value("frames_processed", std::uint64_t{0});
    meta.framesSkipped = header.value("frames_skipped", std::uint64_t{0});
    bodyPath = headerPath.parent_path() / header.at("body").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(headerPath.string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(headerPath.string() + ": " + e.what());
  }

  std::ifstream body(bodyPath, std::ios::binary);
  if (!body) throw FormatError("cannot open " + bodyPath.string());
  char magic[8];
  body.read(magic, sizeof(magic));
  if (!body || std::memcmp(magic, kMapMagic, sizeof(magic)) != 0) throw FormatError(bodyPath.string() + ": bad magic");
  if (get<std::uint32_t>(body) != static_cast<std::uint32_t>(kMapExportVersion)) {
    throw FormatError(bodyPath.string() + ": unsupported version");
  }
  const auto k = get<std::uint32_t>(body);
  const auto cells = get<std::uint32_t>(body);
  get<std::uint32_t>(body);
  const double side = get<double>(body);
  const double extent = get<double>(body);
  if (k != static_cast<std::uint32_t>(cfg.numClasses) || side != cfg.sideLength || extent != cfg.halfExtent) {
    throw FormatError(bodyPath.string() + ": body does not match its header");
  }

  MapData data{Mesh(cfg), meta};
  Mesh& mesh = data.mesh;
  if (cells != static_cast<std::uint32_t>(mesh.cellsPerAxis())) throw FormatError("cell count mismatch");
  const auto cx = get<std::int64_t>(body);
  const auto cy = get<std::int64_t>(body);
  mesh.setCenterCell({cx, cy});
  mesh.setFrameCount(get<std::uint64_t>(body));
  if (get<std::uint64_t>(body) != mesh.numVertices() || get<std::uint64_t>(body) != mesh.numFaces()) {
    throw FormatError(bodyPath.string() + ": element counts do not match the mesh config");
  }
  for (Vertex& v : mesh.vertices()) {
    v.x = get<double>(body);
    v.y = get<double>(body);
    v.zMean = get<double>(body);
    v.zVar = get<double>(body);
    v.observations = get<std::uint32_t>(body);
  }
  for (std::size_t f = 0; f < mesh.numFaces(); ++f) {
    for (std::uint32_t expected : mesh.face(f).vertexIds) {
      if (get<std::uint32_t>(body) != expected) throw FormatError(bodyPath.string() + ": face topology mismatch");
    }
    mesh.setFaceObservations(f, get<std::uint32_t>(body));
    for (double& a : mesh.alpha(f)) a = get<double>(body);
    for (double& s : mesh.latestScores(f)) s = get<double>(body);
  }
  if (body.peek() != std::char_traits<char>::eof()) throw FormatError(bodyPath.string() + ": trailing bytes");
  return data;
}

}  // namespace semantic_mesh
