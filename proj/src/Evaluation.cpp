#include "semantic_mesh/Evaluation.hpp"

#include "semantic_mesh/Errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <numbers>
#include <sstream>

namespace semantic_mesh {

namespace {

double normalPdf(double x, double mu, double sigma)
{
  const double z = (x - mu) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

double median(std::vector<double> values)
{
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

bool sameLayout(const Mesh& a, const Mesh& b)
{
  return a.config() == b.config() && a.centerCell() == b.centerCell();
}

}  // namespace

double gaussianKl(double mu1, double sigma1, double mu2, double sigma2)
{
  if (!(sigma1 > 0.0) || !(sigma2 > 0.0)) throw DomainError("Gaussian KL needs positive standard deviations");
  const double d = mu1 - mu2;
  return std::log(sigma2 / sigma1) + (sigma1 * sigma1 + d * d) / (2.0 * sigma2 * sigma2) - 0.5;
}

const KlGrid& KlGrid::standard()
{
  static const KlGrid grid = [] {
    KlGrid g;
    g.nodes.resize(kKlNodes);
    g.weights.resize(kKlNodes);
    const double h = (kKlUpper - kKlLower) / static_cast<double>(kKlNodes - 1);
    for (std::size_t i = 0; i < kKlNodes; ++i) {
      g.nodes[i] = kKlLower + h * static_cast<double>(i);
      g.weights[i] = (i == 0 || i + 1 == kKlNodes) ? 0.5 * h : h;
    }
    return g;
  }();
  return grid;
}

double klFromDensities(std::span<const double> p, std::span<const double> q)
{
  const KlGrid& grid = KlGrid::standard();
  if (p.size() != grid.nodes.size() || q.size() != grid.nodes.size()) {
    throw EvaluationError("density tables must match the quadrature grid");
  }
  double sum = 0.0;
  bool overlap = false;
  bool support = false;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pi = std::max(p[i], kDensityFloor);
    const double qi = std::max(q[i], kDensityFloor);
    if (p[i] > kDensityFloor) {
      support = true;
      if (q[i] > kDensityFloor) overlap = true;
    }
    sum += grid.weights[i] * pi * (std::log(pi) - std::log(qi));
  }
  if (support && !overlap) return kKlInfinite;
  return sum;
}

DensityTable::DensityTable(std::span<const PropertyModel> models) : models_(models.begin(), models.end())
{
  const KlGrid& grid = KlGrid::standard();
  table_.reserve(models_.size());
  for (const auto& m : models_) {
    std::vector<double> column(grid.nodes.size());
    for (std::size_t i = 0; i < column.size(); ++i) column[i] = normalPdf(grid.nodes[i], m.mu, m.sigma);
    table_.push_back(std::move(column));
  }
}

std::vector<double> DensityTable::mixtureDensity(const PropertyMixture& mixture) const
{
  const KlGrid& grid = KlGrid::standard();
  std::vector<double> out(grid.nodes.size(), 0.0);
  for (std::size_t c = 0; c < mixture.components.size(); ++c) {
    const double w = mixture.weights[c];
    if (w == 0.0) continue;
    // Components usually come straight from the table's models.
    const PropertyModel& m = mixture.components[c];
    const std::vector<double>* column = nullptr;
    if (c < models_.size() && models_[c] == m) column = &table_[c];
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] += w * (column ? (*column)[i] : normalPdf(grid.nodes[i], m.mu, m.sigma));
    }
  }
  return out;
}

double klMixtureUnclamped(const PropertyMixture& p, const PropertyMixture& q)
{
  const DensityTable none(std::span<const PropertyModel>{});
  return klFromDensities(none.mixtureDensity(p), none.mixtureDensity(q));
}

double klMixture(const PropertyMixture& p, const PropertyMixture& q)
{
  return std::max(0.0, klMixtureUnclamped(p, q));
}

double lowFrictionScore(const PropertyMixture& mixture)
{
  return mixture.cdf(kLowFrictionThreshold);
}

PrCurve prCurve(std::span<const std::optional<double>> scores, std::span<const bool> positive)
{
  if (scores.size() != positive.size()) throw EvaluationError("scores and labels differ in length");
  if (scores.empty()) throw EvaluationError("no faces to evaluate");

  PrCurve curve;
  curve.total = scores.size();
  curve.positives = static_cast<std::size_t>(std::count(positive.begin(), positive.end(), true));

  std::vector<std::pair<double, bool>> known;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i]) known.emplace_back(*scores[i], positive[i]);
  }
  std::sort(known.begin(), known.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

  if (curve.positives == 0) {
    curve.averagePrecision = std::numeric_limits<double>::quiet_NaN();
    return curve;
  }

  const double pos = static_cast<double>(curve.positives);
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < known.size();) {
    const double threshold = known[i].first;
    while (i < known.size() && known[i].first == threshold) {
      (known[i].second ? tp : fp) += 1;
      ++i;
    }
    curve.points.push_back({threshold, static_cast<double>(tp) / pos, static_cast<double>(tp) / static_cast<double>(tp + fp)});
  }
  if (curve.points.empty()) {
    curve.averagePrecision = 0.0;
    return curve;
  }
  curve.points.insert(curve.points.begin(), {curve.points.front().threshold, 0.0, curve.points.front().precision});

  double ap = 0.0;
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const auto& a = curve.points[i - 1];
    const auto& b = curve.points[i];
    ap += (b.recall - a.recall) * 0.5 * (a.precision + b.precision);
  }
  curve.averagePrecision = ap;
  return curve;
}

double lowHighAccuracy(std::span<const std::optional<PropertyMixture>> estimates, std::span<const bool> trueLow)
{
  if (estimates.size() != trueLow.size()) throw EvaluationError("estimates and labels differ in length");
  if (estimates.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    if (!estimates[i]) continue;
    const bool predictedLow = lowFrictionScore(*estimates[i]) >= 0.5;
    if (predictedLow == trueLow[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(estimates.size());
}

EvalReport evaluateMaps(std::span<const EvalInput> maps, std::span<const std::size_t> faceTrueClass,
                        std::span<const PropertyModel> models, const std::string& scenario)
{
  if (maps.empty()) throw EvaluationError("no maps to evaluate");
  const Mesh& ref = maps.front().map.mesh;
  for (const auto& in : maps) {
    if (!sameLayout(in.map.mesh, ref)) {
      throw EvaluationError("map '" + in.label + "' has a different mesh layout than '" + maps.front().label + "'");
    }
    if (in.map.meta.classNames != maps.front().map.meta.classNames) {
      throw EvaluationError("map '" + in.label + "' has different class names");
    }
    if (in.map.meta.scenario != scenario) {
      throw EvaluationError("map '" + in.label + "' is from scenario '" + in.map.meta.scenario + "', truth is '" +
                            scenario + "'");
    }
  }
  if (faceTrueClass.size() != ref.numFaces()) throw EvaluationError("truth does not cover the mesh faces");
  if (models.size() != static_cast<std::size_t>(ref.numClasses())) {
    throw EvaluationError("property models do not match the map's classes");
  }

  std::vector<std::size_t> faces;
  for (std::size_t f = 0; f < ref.numFaces(); ++f) {
    const bool seen = std::any_of(maps.begin(), maps.end(), [&](const auto& in) { return in.map.mesh.faceObservations(f) > 0; });
    if (seen) faces.push_back(f);
  }
  if (faces.empty()) throw EvaluationError("no face was observed in any map");

  const DensityTable table(models);
  std::vector<bool> trueLow(faces.size());
  for (std::size_t i = 0; i < faces.size(); ++i) {
    const std::size_t c = faceTrueClass[faces[i]];
    if (c >= models.size()) throw EvaluationError("truth class index out of range");
    trueLow[i] = models[c].mu <= kLowFrictionThreshold;
  }

  EvalReport report;
  report.scenario = scenario;
  const KlGrid& grid = KlGrid::standard();
  for (const auto& in : maps) {
    EstimatorScore score;
    score.label = in.label;
    score.estimator = in.map.meta.estimator;
    score.faces = faces.size();

    std::vector<std::optional<PropertyMixture>> estimates(faces.size());
    std::vector<std::optional<double>> lowScores(faces.size());
    std::vector<std::optional<double>> highScores(faces.size());
    std::vector<double> kls;
    std::vector<double> pooledP(grid.nodes.size(), 0.0);
    std::vector<double> pooledQ(grid.nodes.size(), 0.0);
    for (std::size_t i = 0; i < faces.size(); ++i) {
      estimates[i] = estimateFaceProperty(in.map.mesh, faces[i], in.map.meta.estimator, models);
      if (!estimates[i]) {
        ++score.unknown;
        continue;
      }
      const double low = lowFrictionScore(*estimates[i]);
      lowScores[i] = low;
      highScores[i] = 1.0 - low;
      const auto p = table.classDensity(faceTrueClass[faces[i]]);
      const auto q = table.mixtureDensity(*estimates[i]);
      const double kl = std::max(0.0, klFromDensities(p, q));
      if (std::isinf(kl)) ++score.klInfinite;
      kls.push_back(kl);
      for (std::size_t n = 0; n < pooledP.size(); ++n) {
        pooledP[n] += p[n];
        pooledQ[n] += q[n];
      }
    }
    if (!kls.empty()) {
      double total = 0.0;
      for (double v : kls) total += v;
      score.klMean = total / static_cast<double>(kls.size());
      score.klMedian = median(kls);
      const double inv = 1.0 / static_cast<double>(kls.size());
      for (std::size_t n = 0; n < pooledP.size(); ++n) {
        pooledP[n] *= inv;
        pooledQ[n] *= inv;
      }
      score.klPooled = std::max(0.0, klFromDensities(pooledP, pooledQ));
    } else {
      score.klMean = score.klMedian = score.klPooled = std::numeric_limits<double>::quiet_NaN();
    }

    std::vector<bool> trueHigh(trueLow.size());
    for (std::size_t i = 0; i < trueLow.size(); ++i) trueHigh[i] = !trueLow[i];
    // std::vector<bool> has no contiguous storage; copy into plain arrays for span.
    const std::unique_ptr<bool[]> lowFlags(new bool[trueLow.size()]);
    const std::unique_ptr<bool[]> highFlags(new bool[trueLow.size()]);
    for (std::size_t i = 0; i < trueLow.size(); ++i) {
      lowFlags[i] = trueLow[i];
      highFlags[i] = trueHigh[i];
    }
    score.lowPr = prCurve(lowScores, {lowFlags.get(), trueLow.size()});
    score.highPr = prCurve(highScores, {highFlags.get(), trueLow.size()});
    score.accuracy = lowHighAccuracy(estimates, {lowFlags.get(), trueLow.size()});
    report.scores.push_back(std::move(score));
  }

  auto find = [&](EstimatorKind kind) -> const EstimatorScore* {
    for (const auto& s : report.scores) {
      if (s.estimator == kind) return &s;
    }
    return nullptr;
  };
  const auto* rec = find(EstimatorKind::Recursive);
  const auto* multi = find(EstimatorKind::MultimodalNonRecursive);
  const auto* uni = find(EstimatorKind::UnimodalNonRecursive);
  if (rec && multi && uni) report.klOrderingHolds = rec->klMean < multi->klMean && multi->klMean < uni->klMean;
  if (rec && multi) report.lowApOrderingHolds = rec->lowPr.averagePrecision >= multi->lowPr.averagePrecision;
  return report;
}

std::string formatNumber(double value)
{
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void writeEvalReport(const EvalReport& report, const std::filesystem::path& outDir)
{
  std::error_code ec;
  std::filesystem::create_directories(outDir, ec);
  if (ec || !std::filesystem::is_directory(outDir)) throw EvaluationError("cannot create " + outDir.string());

  std::ofstream summary(outDir / "eval_summary.csv", std::ios::binary);
  std::ofstream pr(outDir / "pr_curve.csv", std::ios::binary);
  if (!summary || !pr) throw EvaluationError("cannot write evaluation files in " + outDir.string());
  summary << "estimator,label,faces,unknown,kl_mean,kl_median,kl_pooled,kl_infinite,ap_low,ap_high,accuracy\n";
  pr << "estimator,label,category,threshold,recall,precision\n";

  nlohmann::json j;
  j["format"] = "semantic-mesh-eval";
  j["version"] = 1;
  j["scenario"] = report.scenario;
  j["estimators"] = nlohmann::json::array();
  for (const auto& s : report.scores) {
    const std::string kind = toString(s.estimator);
    summary << kind << ',' << s.label << ',' << s.faces << ',' << s.unknown << ',' << formatNumber(s.klMean) << ','
            << formatNumber(s.klMedian) << ',' << formatNumber(s.klPooled) << ',' << s.klInfinite << ','
            << formatNumber(s.lowPr.averagePrecision) << ',' << formatNumber(s.highPr.averagePrecision) << ','
            << formatNumber(s.accuracy) << '\n';
    for (const auto& [category, curve] : {std::pair{"low", &s.lowPr}, std::pair{"high", &s.highPr}}) {
      for (const auto& p : curve->points) {
        pr << kind << ',' << s.label << ',' << category << ',' << formatNumber(p.threshold) << ','
           << formatNumber(p.recall) << ',' << formatNumber(p.precision) << '\n';
      }
    }
    // JSON has no inf/nan; those go out as strings.
    auto num = [](double v) -> nlohmann::json {
      if (std::isfinite(v)) return v;
      return formatNumber(v);
    };
    j["estimators"].push_back({{"estimator", kind},
                               {"label", s.label},
                               {"faces", s.faces},
                               {"unknown", s.unknown},
                               {"kl_mean", num(s.klMean)},
                               {"kl_median", num(s.klMedian)},
                               {"kl_pooled", num(s.klPooled)},
                               {"kl_infinite", s.klInfinite},
                               {"ap_low", num(s.lowPr.averagePrecision)},
                               {"ap_high", num(s.highPr.averagePrecision)},
                               {"accuracy", num(s.accuracy)}});
  }
  j["kl_ordering_holds"] = report.klOrderingHolds ? nlohmann::json(*report.klOrderingHolds) : nlohmann::json();
  j["low_ap_ordering_holds"] = report.lowApOrderingHolds ? nlohmann::json(*report.lowApOrderingHolds) : nlohmann::json();
  std::ofstream js(outDir / "eval_summary.json", std::ios::binary);
  if (!js) throw EvaluationError("cannot write eval_summary.json");
  js << j.dump(2) << '\n';
}

std::string formatEvalTable(const EvalReport& report)
{
  std::ostringstream out;
  out << "scenario " << report.scenario << '\n';
  out << std::left << std::setw(26) << "estimator" << std::right << std::setw(8) << "faces" << std::setw(8) << "unknown"
      << std::setw(11) << "kl_mean" << std::setw(11) << "kl_median" << std::setw(9) << "ap_low" << std::setw(9)
      << "ap_high" << std::setw(9) << "acc" << '\n';
  out << std::fixed;
  for (const auto& s : report.scores) {
    out << std::left << std::setw(26) << toString(s.estimator) << std::right << std::setw(8) << s.faces << std::setw(8)
        << s.unknown << std::setprecision(4) << std::setw(11) << s.klMean << std::setw(11) << s.klMedian
        << std::setprecision(3) << std::setw(9) << s.lowPr.averagePrecision << std::setw(9)
        << s.highPr.averagePrecision << std::setw(9) << s.accuracy << '\n';
  }
  if (report.klOrderingHolds) {
    out << "kl ordering recursive < multimodal < unimodal: " << (*report.klOrderingHolds ? "yes" : "no") << '\n';
  }
  if (report.lowApOrderingHolds) {
    out << "low-friction AP recursive >= multimodal: " << (*report.lowApOrderingHolds ? "yes" : "no") << '\n';
  }
  return out.str();
}

}  // namespace semantic_mesh
