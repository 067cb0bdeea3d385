#include "semantic_mesh/Properties.hpp"

#include "semantic_mesh/Errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace semantic_mesh {

namespace {

constexpr const char* kModelsMagic = "TERRAIN_PROPERTY_MODELS";
constexpr int kModelsVersion = 1;

std::string trim(const std::string& s)
{
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double parseDouble(const std::string& text, const std::string& context)
{
  const std::string t = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError("cannot parse number '" + t + "' in " + context);
  }
  return value;
}

std::string shortest(double value)
{
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

double normalCdf(double x, double mu, double sigma)
{
  return 0.5 * std::erfc(-(x - mu) / (sigma * std::numbers::sqrt2));
}

}  // namespace

double PropertyMixture::mean() const
{
  double m = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) m += weights[i] * components[i].mu;
  return m;
}

double PropertyMixture::variance() const
{
  double second = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const auto& c = components[i];
    second += weights[i] * (c.sigma * c.sigma + c.mu * c.mu);
  }
  const double m = mean();
  return std::max(0.0, second - m * m);
}

double PropertyMixture::cdf(double x) const
{
  double p = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] == 0.0) continue;
    p += weights[i] * normalCdf(x, components[i].mu, components[i].sigma);
  }
  return p;
}

double PropertyMixture::pdf(double x) const
{
  constexpr double kInvSqrt2Pi = 0.3989422804014327;
  double p = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] == 0.0) continue;
    const double z = (x - components[i].mu) / components[i].sigma;
    p += weights[i] * kInvSqrt2Pi / components[i].sigma * std::exp(-0.5 * z * z);
  }
  return p;
}

MixtureStats mixtureStats(const PropertyMixture& mixture)
{
  return {mixture.mean(), mixture.variance()};
}

std::optional<PropertyMixture> propertyMixture(std::span<const double> alpha, std::span<const PropertyModel> models)
{
  if (alpha.size() != models.size()) {
    std::ostringstream msg;
    msg << "property models cover " << models.size() << " classes but alpha has " << alpha.size();
    throw ConfigError(msg.str());
  }
  auto weights = classPredictive(alpha);
  if (!weights) return std::nullopt;
  return PropertyMixture{std::move(*weights), std::vector<PropertyModel>(models.begin(), models.end())};
}

PropertyMixture singleClassMixture(std::size_t classIndex, std::span<const PropertyModel> models)
{
  PropertyMixture m;
  m.weights.assign(models.size(), 0.0);
  m.weights.at(classIndex) = 1.0;
  m.components.assign(models.begin(), models.end());
  return m;
}

PropertyModelSet parseModels(const std::string& text)
{
  std::istringstream in(text);
  std::string line;
  int lineNo = 0;
  bool sawMagic = false;
  PropertyModelSet set;
  std::vector<std::string> names;

  while (std::getline(in, line)) {
    ++lineNo;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const std::string where = "model file line " + std::to_string(lineNo);
    if (!sawMagic) {
      std::istringstream header(t);
      std::string magic;
      int version = 0;
      if (!(header >> magic >> version) || magic != kModelsMagic) {
        throw ConfigError(where + ": expected '" + std::string(kModelsMagic) + " <version>' header");
      }
      if (version != kModelsVersion) {
        throw ConfigError(where + ": unsupported model file version " + std::to_string(version));
      }
      sawMagic = true;
      continue;
    }
    if (t.rfind("property ", 0) == 0) {
      set.property = trim(t.substr(9));
      continue;
    }
    const auto c1 = t.find(',');
    const auto c2 = c1 == std::string::npos ? std::string::npos : t.find(',', c1 + 1);
    if (c2 == std::string::npos || t.find(',', c2 + 1) != std::string::npos) {
      throw ConfigError(where + ": expected 'name,mu,sigma'");
    }
    PropertyModel model;
    model.className = trim(t.substr(0, c1));
    model.mu = parseDouble(t.substr(c1 + 1, c2 - c1 - 1), where);
    model.sigma = parseDouble(t.substr(c2 + 1), where);
    if (!std::isfinite(model.mu)) throw ConfigError(where + ": mu must be finite");
    if (!(model.sigma > 0.0) || !std::isfinite(model.sigma)) {
      throw ConfigError(where + ": sigma must be positive for class '" + model.className + "'");
    }
    names.push_back(model.className);
    set.models.push_back(std::move(model));
  }
  if (!sawMagic) throw ConfigError("model file is missing its header");
  if (set.models.empty()) throw ConfigError("model file defines no classes");
  set.catalog = ClassCatalog(std::move(names));
  return set;
}

PropertyModelSet loadModels(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parseModels(buffer.str());
}

std::string formatModels(const PropertyModelSet& set)
{
  std::ostringstream out;
  out << kModelsMagic << ' ' << kModelsVersion << '\n';
  out << "property " << set.property << '\n';
  out << "# class,mu,sigma\n";
  for (const auto& m : set.models) out << m.className << ',' << shortest(m.mu) << ',' << shortest(m.sigma) << '\n';
  return out.str();
}

void saveModels(const PropertyModelSet& set, const std::filesystem::path& path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write model file " + path.string());
  out << formatModels(set);
}

std::filesystem::path defaultModelsPath()
{
  return std::filesystem::path(SEMANTIC_MESH_DATA_DIR) / "friction_models.txt";
}

ForceLog readForceLog(const std::filesystem::path& path, std::optional<double> massOverride)
{
  std::ifstream in(path);
  if (!in) throw InputError("cannot open force log " + path.string());
  ForceLog log;
  std::optional<double> mass;
  std::string line;
  bool sawHeader = false;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    const std::string t = trim(line);
    if (t.empty()) continue;
    const std::string where = path.filename().string() + " line " + std::to_string(lineNo);
    if (t.front() == '#') {
      const auto pos = t.find("mass_kg=");
      if (pos != std::string::npos) mass = parseDouble(t.substr(pos + 8), where);
      continue;
    }
    if (!sawHeader) {
      if (t != "t_seconds,force_newtons") throw InputError(where + ": expected header 't_seconds,force_newtons'");
      sawHeader = true;
      continue;
    }
    const auto comma = t.find(',');
    if (comma == std::string::npos) throw InputError(where + ": expected two columns");
    try {
      log.timeSeconds.push_back(parseDouble(t.substr(0, comma), where));
      log.forceNewtons.push_back(parseDouble(t.substr(comma + 1), where));
    } catch (const ConfigError& e) {
      throw InputError(e.what());
    }
  }
  if (!sawHeader) throw InputError(path.string() + ": missing header");
  if (massOverride) mass = massOverride;
  if (!mass) throw InputError(path.string() + ": sled mass not given (use '# mass_kg=<value>' or --mass)");
  log.massKg = *mass;
  return log;
}

std::vector<double> lowPassFilter(std::span<const double> time, std::span<const double> values, double cutoffHz)
{
  if (time.size() != values.size()) throw InputError("time and value series differ in length");
  std::vector<double> out(values.begin(), values.end());
  if (out.empty() || !std::isfinite(cutoffHz) || cutoffHz <= 0.0) return out;
  const double rc = 1.0 / (2.0 * std::numbers::pi * cutoffHz);
  for (std::size_t i = 1; i < out.size(); ++i) {
    const double dt = time[i] - time[i - 1];
    if (!(dt > 0.0)) throw InputError("force log timestamps must be strictly increasing");
    const double a = dt / (rc + dt);
    out[i] = out[i - 1] + a * (values[i] - out[i - 1]);
  }
  return out;
}

std::vector<double> frictionFromForce(const ForceLog& log, double cutoffHz)
{
  if (!(log.massKg > 0.0) || !std::isfinite(log.massKg)) {
    throw InputError("sled mass must be positive, got " + std::to_string(log.massKg));
  }
  for (double f : log.forceNewtons) {
    if (!std::isfinite(f)) throw InputError("force samples must be finite");
  }
  std::vector<double> mu = lowPassFilter(log.timeSeconds, log.forceNewtons, cutoffHz);
  const double normal = log.massKg * log.gravity;
  for (double& m : mu) m /= normal;
  return mu;
}

}  // namespace semantic_mesh
